#pragma once

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "cadent/envs.hpp"
#include "cadent/tabular.hpp"
#include "cadent/teacher.hpp"

namespace cadent::student {

using automaton::ProductState;
using automaton::StateId;
using tabular::Action;
using tabular::QTable;
using teacher::TeacherKnowledge;

class StudentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrustParams {
  double eta = 0.1;
  double k = 10.0;
  double theta = 0.5;
  double v_init = 0.0;

  void validate() const;
  friend bool operator==(const TrustParams&, const TrustParams&) = default;
};

struct GuidanceParams {
  double lambda_ad = 0.5;
  double lambda_pd = 1.0;

  void validate() const;
  friend bool operator==(const GuidanceParams&, const GuidanceParams&) = default;
};

// How the trust weight is obtained each step.
//   adaptive: sigmoid gate on the volatility estimate
//   fixed:    constant omega0
//   bypass:   omega = 1 and guidance is never computed (plain Q-learning)
//   ungated:  student and teacher terms are summed without a gate
enum class GateMode { adaptive, fixed, bypass, ungated };

std::string to_string(GateMode mode);
GateMode parse_gate_mode(const std::string& text);

struct StudentConfig {
  tabular::LearningParams learn;
  TrustParams trust;
  GuidanceParams guide;
  GateMode gate = GateMode::adaptive;
  double omega0 = 0.5;

  void validate() const;
  friend bool operator==(const StudentConfig&, const StudentConfig&) = default;
};

/// Exponentially weighted |TD error| per state-action pair. Absent entries read
/// as v_init.
class VolatilityTracker {
 public:
  explicit VolatilityTracker(double v_init = 0.0) : v_init_(v_init) {}

  double value(const ProductState& s, Action a) const;
  void set(const ProductState& s, Action a, double v);
  double v_init() const { return v_init_; }
  std::size_t size() const { return rows_.size(); }

 private:
  using Row = std::array<double, tabular::kMaxActions>;
  double v_init_;
  std::unordered_map<ProductState, Row> rows_;
};

// V <- (1 - eta) V + eta |delta|; returns the stored value.
double update_volatility(VolatilityTracker& v, const ProductState& s, Action a, double delta, double eta);

// 1 / (1 + exp(k (V - theta))), evaluated without overflow.
double trust_gate(double v_value, double k, double theta);

// Dense lookup tables built from TeacherKnowledge.
class Guidance {
 public:
  explicit Guidance(const TeacherKnowledge& tk);

  int num_states() const { return nq_; }
  bool has_edge(StateId q, StateId q_next) const;
  double q_ad(StateId q, StateId q_next) const;
  // Teacher action distribution at q, empty when q has no policy row.
  std::span<const double> policy(StateId q) const;
  double q_max_ad() const { return q_max_ad_; }
  std::uint64_t novel_transitions() const { return novel_; }

  // Edges the teacher never saw count as novel and give no reward.
  double strategic_reward(StateId q, StateId q_next, double lambda_ad);

 private:
  int nq_;
  int na_;
  std::vector<double> q_ad_;
  std::vector<char> edge_;
  std::vector<double> pi_;
  std::vector<char> has_pi_;
  double q_max_ad_;
  std::uint64_t novel_ = 0;
};

// lambda_ad * Q_AD(q, q') on a known edge, 0 when q == q'. Unknown edges give
// 0 and bump the guidance's novel-transition counter.
double strategic_reward(Guidance& g, StateId q, StateId q_next, double lambda_ad);

// lambda_pd * (pi_teacher(a|q) - softmax(q_student_row)[a]); 0 when q has no
// teacher row.
double tactical_gradient(const Guidance& g, StateId q, std::span<const double> q_student_row, Action a,
                         double lambda_pd);

// omega * delta + (1 - omega) * (r_ad + g_pd).
double cadent_delta(double omega, double delta_student, double r_ad, double g_pd);

// R_max / (1 - gamma) + lambda_ad * Q_max_AD + 2 lambda_pd.
double update_bound(const tabular::LearningParams& learn, const GuidanceParams& guide, double r_max,
                    double q_max_ad);

struct StepTrace {
  double delta = 0.0;      // student TD error
  double volatility = 0.0;
  double omega = 1.0;
  double r_ad = 0.0;
  double g_pd = 0.0;
  double update = 0.0;     // fused delta applied through alpha
};

/// Q-table, volatility tracker and hyperparameters of one student run.
class StudentLearner {
 public:
  // knowledge may be null only when the gate is bypassed.
  StudentLearner(StudentConfig cfg, const TeacherKnowledge* knowledge, int num_actions);

  const StudentConfig& config() const { return cfg_; }
  const QTable& q() const { return q_; }
  QTable& q() { return q_; }
  const VolatilityTracker& volatility() const { return v_; }
  const Guidance* guidance() const { return guidance_ ? &*guidance_ : nullptr; }
  // Automaton the knowledge was distilled on; empty when bypassed.
  const std::vector<std::string>& knowledge_states() const { return states_; }
  const std::vector<std::string>& knowledge_alphabet() const { return alphabet_; }

  // One learning step on the transition (s, a, r, s_next).
  StepTrace update(const ProductState& s, Action a, double r, const ProductState& s_next, bool done);

 private:
  StudentConfig cfg_;
  QTable q_;
  VolatilityTracker v_;
  std::optional<Guidance> guidance_;
  std::vector<std::string> states_;
  std::vector<std::string> alphabet_;
};

struct EpisodeRecord {
  std::string variant;
  std::string env;
  std::uint64_t seed = 0;
  int episode = 0;
  double reward = 0.0;
  int steps = 0;
  std::int64_t cumulative_steps = 0;
  bool reached_accept = false;

  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

/// Thread-safe collector for records from concurrent runs.
class MetricsSink {
 public:
  void push(EpisodeRecord r);
  std::vector<EpisodeRecord> snapshot() const;

 private:
  mutable std::mutex mu_;
  std::vector<EpisodeRecord> records_;
};

struct BoundViolation {
  std::int64_t step = 0;  // global step index within the run
  int episode = 0;
  double magnitude = 0.0;
};

struct TrainOptions {
  std::string variant = "cadent";
  std::uint64_t seed = 0;
  int episodes = 0;
  bool assert_bound = false;
};

struct TrainReport {
  std::vector<EpisodeRecord> records;
  double max_abs_update = 0.0;
  double bound = 0.0;
  std::vector<BoundViolation> violations;
  std::uint64_t novel_transitions = 0;
  std::int64_t total_steps = 0;
};

// The training loop: epsilon-greedy acting on the target environment with the
// fused update applied every step.
TrainReport train_student(const envs::Environment& env, StudentLearner& learner, const TrainOptions& opts,
                          MetricsSink* sink = nullptr);

}  // namespace cadent::student
