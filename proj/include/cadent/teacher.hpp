#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cadent/automaton.hpp"
#include "cadent/envs.hpp"
#include "cadent/tabular.hpp"

namespace cadent::teacher {

using automaton::ProductState;
using automaton::StateId;
using tabular::Action;
using tabular::QTable;

using Edge = std::pair<StateId, StateId>;
using Trigger = std::pair<ProductState, Action>;

class TeacherError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Visit counts per product state, one slot per action.
using VisitationLog = std::map<ProductState, std::vector<std::uint64_t>>;
// (s, a) pairs observed to fire each automaton edge.
using TransitionLog = std::map<Edge, std::set<Trigger>>;

struct TeacherRun {
  QTable q{1};
  VisitationLog visits;
  TransitionLog transitions;
  int episodes = 0;
  int successes = 0;
};

// Plain Q-learning on the source product MDP. Throws TeacherError naming the
// environment when no episode reaches acceptance.
TeacherRun train_teacher(const envs::Environment& env, const tabular::LearningParams& params, int episodes,
                         std::uint64_t seed);

// Mean teacher value over the triggers of each edge. Throws TeacherError
// listing accepting-path edges that were never triggered.
std::map<Edge, double> distill_automaton_values(const QTable& q_teacher, const automaton::Dfa& dfa,
                                                const TransitionLog& transitions);

enum class PolicyAggregation { visitation_weighted, unweighted };

std::string to_string(PolicyAggregation mode);
PolicyAggregation parse_aggregation(const std::string& text);

// Per automaton state: average the teacher rows of the visited environment
// states, then soften with tau.
std::map<StateId, std::vector<double>> distill_teacher_policy(
    const QTable& q_teacher, const VisitationLog& visits, const automaton::Dfa& dfa, double tau,
    PolicyAggregation mode = PolicyAggregation::visitation_weighted);

struct Provenance {
  std::string env;
  std::string spec_hash;
  int episodes = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

/// Distilled transfer artifacts of one trained teacher.
struct TeacherKnowledge {
  static constexpr int kVersion = 1;

  std::vector<std::string> states;    // automaton state names, by id
  std::vector<std::string> alphabet;  // automaton symbols, by id
  int num_actions = 0;
  double tau = 0.1;
  std::map<Edge, double> q_ad;
  std::map<StateId, std::vector<double>> pi_teacher;
  Provenance provenance;

  // Largest |Q_AD| over all edges, 0 when empty.
  double q_max_ad() const;
  // Throws TeacherError on a malformed row, unknown state or empty provenance.
  void validate() const;

  nlohmann::json to_json() const;
  static TeacherKnowledge from_json(const nlohmann::json& j);

  friend bool operator==(const TeacherKnowledge&, const TeacherKnowledge&) = default;
};

TeacherKnowledge distill(const envs::Environment& source, const TeacherRun& run, double tau, std::uint64_t seed,
                         PolicyAggregation mode = PolicyAggregation::visitation_weighted);

void save_knowledge(const TeacherKnowledge& tk, const std::string& path);
TeacherKnowledge load_knowledge(const std::string& path);

// Greedy (epsilon 0) episode from reset.
envs::Rollout greedy_rollout(const envs::Environment& env, const QTable& q);

}  // namespace cadent::teacher
