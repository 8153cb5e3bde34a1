#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cadent/automaton.hpp"

namespace cadent::envs {

using automaton::ProductState;
using automaton::StateId;
using automaton::Symbol;
using Action = int;

enum class EnvName { blind_craftsman, dungeon_quest, mountain_car_collection, warehouse_robotics };
enum class Variant { source, target };

inline constexpr std::array<EnvName, 4> kAllEnvs{EnvName::blind_craftsman, EnvName::dungeon_quest,
                                                 EnvName::mountain_car_collection, EnvName::warehouse_robotics};

class EnvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_string(EnvName name);
std::string to_string(Variant variant);
EnvName parse_env_name(std::string_view text);
Variant parse_variant(std::string_view text);

// Reward table shared by every environment.
struct RewardTable {
  double step_penalty = -0.01;
  double progress = 1.0;
  double completion = 10.0;
};

struct EnvSpec {
  EnvName name = EnvName::dungeon_quest;
  Variant variant = Variant::target;
  std::uint64_t layout_seed = 0;
  int max_steps_per_episode = 0;
  // Per-environment layout: grid size, item/station positions, quota, ...
  // Generated from layout_seed when left empty.
  nlohmann::json parameters = nlohmann::json::object();

  nlohmann::json to_json() const;
  static EnvSpec from_json(const nlohmann::json& j);
  // Stable digest of the serialized spec.
  std::string hash() const;

  friend bool operator==(const EnvSpec&, const EnvSpec&) = default;
};

int default_max_steps(EnvName name);

// Spec with generated parameters filled in.
EnvSpec default_spec(EnvName name, Variant variant, std::uint64_t layout_seed = 0);

// Environment state: discrete variables plus the tracked automaton state.
// `t` counts steps in the episode and is not part of the state key.
struct EnvState {
  static constexpr std::size_t kMaxVars = 8;
  std::array<int, kMaxVars> vars{};
  StateId q = 0;
  int t = 0;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  Symbol event = automaton::kNullSymbol;
  bool done = false;     // accepting state reached or timeout
  bool timeout = false;  // step budget or battery exhausted
};

/// A deterministic environment composed with its task automaton.
///
/// Concrete environments supply the physics and the labeling function; this
/// base class advances the automaton, applies the shared reward table and
/// decides termination.
class Environment {
 public:
  virtual ~Environment() = default;

  const EnvSpec& spec() const { return spec_; }
  const automaton::Dfa& dfa() const { return dfa_; }
  const RewardTable& rewards() const { return rewards_; }
  int max_steps() const { return spec_.max_steps_per_episode; }

  virtual int num_actions() const = 0;
  virtual std::vector<std::string> action_names() const = 0;
  // Names of the discrete variables in EnvState::vars, in order.
  virtual std::vector<std::string> variable_names() const = 0;

  EnvState reset() const;
  StepOutcome step(const EnvState& s, Action a) const;

  std::uint64_t key(const EnvState& s) const;
  ProductState product(const EnvState& s) const { return {key(s), s.q}; }

  // Largest |reward| any single step can produce.
  double r_max() const;
  // Theoretical episodic return range used for normalization.
  double min_return() const;
  double max_return() const;

  virtual std::string dump_layout() const = 0;

 protected:
  Environment(EnvSpec spec, automaton::Dfa dfa);

  struct Physics {
    EnvState next;
    Symbol event = automaton::kNullSymbol;
    bool exhausted = false;  // resource depletion ends the episode
  };

  virtual EnvState initial_state() const = 0;
  virtual Physics physics(const EnvState& s, Action a) const = 0;
  // Number of values each variable may take.
  virtual std::vector<int> domains() const = 0;
  // Number of automaton progress transitions on the shortest accepting path.
  int progress_steps() const;

  EnvSpec spec_;
  automaton::Dfa dfa_;
  RewardTable rewards_;
};

std::unique_ptr<Environment> make_env(const EnvSpec& spec);

std::vector<std::string> labeling_alphabet(EnvName name);
automaton::Dfa bundled_dfa(EnvName name);
// Blind Craftsman automaton for an arbitrary tool quota.
automaton::Dfa blind_craftsman_dfa(int quota);

// Shortest action sequence from reset to an accepting state (breadth-first,
// ties broken by action order). Empty when acceptance is unreachable within
// the step budget.
std::vector<Action> golden_trajectory(const Environment& env);

// Replays actions from reset; returns the outcome of the last step taken
// (stops early at termination).
struct Rollout {
  int steps = 0;
  double total_reward = 0.0;
  bool accepted = false;
};
Rollout replay(const Environment& env, const std::vector<Action>& actions);

}  // namespace cadent::envs
