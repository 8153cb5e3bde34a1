#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cadent/automaton.hpp"
#include "cadent/rng.hpp"

namespace cadent::tabular {

using automaton::ProductState;
using Action = int;

inline constexpr int kMaxActions = 8;

// Raised when a numeric invariant (finite values, parameter ranges) breaks.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Exponential per-episode decay, floored at `end`.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  double decay = 0.995;

  double at(int episode) const;

  friend bool operator==(const EpsilonSchedule&, const EpsilonSchedule&) = default;
};

struct LearningParams {
  double alpha = 0.1;
  double gamma = 0.99;
  EpsilonSchedule epsilon;
  double tau = 0.1;

  // Throws InvariantError when any field is out of range.
  void validate() const;

  friend bool operator==(const LearningParams&, const LearningParams&) = default;
};

/// Sparse action-value table; absent entries read as exactly 0.0.
class QTable {
 public:
  explicit QTable(int num_actions);

  int num_actions() const { return num_actions_; }
  std::size_t size() const { return rows_.size(); }
  bool contains(const ProductState& s) const { return rows_.contains(s); }

  double value(const ProductState& s, Action a) const;
  // View of the action values at s; a shared zero row when s is absent.
  std::span<const double> row(const ProductState& s) const;
  double max_value(const ProductState& s) const;

  void set(const ProductState& s, Action a, double v);

  // Stored states in ascending key order.
  std::vector<ProductState> states() const;

  void save(std::ostream& out) const;
  void save(const std::string& path) const;
  static QTable load(std::istream& in);
  static QTable load(const std::string& path);

  friend bool operator==(const QTable& a, const QTable& b);

 private:
  using Row = std::array<double, kMaxActions>;

  void check_action(Action a) const;

  int num_actions_;
  std::unordered_map<ProductState, Row> rows_;
};

// r + gamma * max_a' Q(s', a') - Q(s, a), with no bootstrap when done.
double td_error(const QTable& qt, const ProductState& s, Action a, double r, const ProductState& s_next, bool done,
                double gamma);

// Q(s, a) += alpha * delta. Non-finite delta is an InvariantError.
void q_update(QTable& qt, const ProductState& s, Action a, double delta, double alpha);

// Max-subtracted Boltzmann distribution over a row of action values.
std::vector<double> softmax_policy(std::span<const double> q_row, double tau);

// Index of the largest entry, lowest index on ties.
Action argmax(std::span<const double> q_row);

// Draws nothing from rng when epsilon is 0.
Action epsilon_greedy(const QTable& qt, const ProductState& s, double epsilon, Rng& rng);

std::map<ProductState, Action> greedy_policy(const QTable& qt);

}  // namespace cadent::tabular
