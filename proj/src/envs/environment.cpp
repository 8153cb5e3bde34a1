#include <algorithm>
#include <deque>
#include <unordered_map>

#include <cadent/bundled_dfas.hpp>

#include "cadent/digest.hpp"
#include "cadent/envs.hpp"
#include "envs/registry.hpp"

namespace cadent::envs {

namespace {

struct NameEntry {
  EnvName name;
  const char* text;
};

constexpr NameEntry kNames[] = {
    {EnvName::blind_craftsman, "blind_craftsman"},
    {EnvName::dungeon_quest, "dungeon_quest"},
    {EnvName::mountain_car_collection, "mountain_car_collection"},
    {EnvName::warehouse_robotics, "warehouse_robotics"},
};

std::string_view bundled_text(EnvName name) {
  switch (name) {
    case EnvName::blind_craftsman: return bundled::k_blind_craftsman;
    case EnvName::dungeon_quest: return bundled::k_dungeon_quest;
    case EnvName::mountain_car_collection: return bundled::k_mountain_car_collection;
    case EnvName::warehouse_robotics: return bundled::k_warehouse_robotics;
  }
  throw EnvError("unknown environment");
}

}  // namespace

std::string to_string(EnvName name) {
  for (const auto& e : kNames) {
    if (e.name == name) return e.text;
  }
  throw EnvError("unknown environment");
}

std::string to_string(Variant variant) { return variant == Variant::source ? "source" : "target"; }

EnvName parse_env_name(std::string_view text) {
  for (const auto& e : kNames) {
    if (text == e.text) return e.name;
  }
  throw EnvError("unknown environment '" + std::string(text) + "'");
}

Variant parse_variant(std::string_view text) {
  if (text == "source") return Variant::source;
  if (text == "target") return Variant::target;
  throw EnvError("unknown environment variant '" + std::string(text) + "' (expected source or target)");
}

nlohmann::json EnvSpec::to_json() const {
  return {{"name", envs::to_string(name)},
          {"variant", envs::to_string(variant)},
          {"layout_seed", layout_seed},
          {"max_steps_per_episode", max_steps_per_episode},
          {"parameters", parameters}};
}

EnvSpec EnvSpec::from_json(const nlohmann::json& j) {
  EnvSpec spec;
  spec.name = parse_env_name(j.at("name").get<std::string>());
  spec.variant = parse_variant(j.value("variant", std::string("target")));
  spec.layout_seed = j.value("layout_seed", std::uint64_t{0});
  spec.max_steps_per_episode = j.value("max_steps_per_episode", 0);
  spec.parameters = j.value("parameters", nlohmann::json::object());
  return spec;
}

std::string EnvSpec::hash() const { return fnv1a_hex(to_json().dump()); }

int default_max_steps(EnvName name) {
  switch (name) {
    case EnvName::blind_craftsman:
    case EnvName::dungeon_quest: return 500;
    case EnvName::mountain_car_collection:
    case EnvName::warehouse_robotics: return 1000;
  }
  throw EnvError("unknown environment");
}

EnvSpec default_spec(EnvName name, Variant variant, std::uint64_t layout_seed) {
  EnvSpec spec;
  spec.name = name;
  spec.variant = variant;
  spec.layout_seed = layout_seed;
  spec.max_steps_per_episode = default_max_steps(name);
  switch (name) {
    case EnvName::blind_craftsman: spec.parameters = detail::generate_blind_craftsman(variant, layout_seed); break;
    case EnvName::dungeon_quest: spec.parameters = detail::generate_dungeon_quest(variant, layout_seed); break;
    case EnvName::mountain_car_collection: spec.parameters = detail::generate_mountain_car(variant, layout_seed); break;
    case EnvName::warehouse_robotics: spec.parameters = detail::generate_warehouse(variant, layout_seed); break;
  }
  return spec;
}

std::unique_ptr<Environment> make_env(const EnvSpec& requested) {
  EnvSpec spec = requested;
  if (spec.max_steps_per_episode == 0) spec.max_steps_per_episode = default_max_steps(spec.name);
  if (spec.max_steps_per_episode < 0) throw EnvError("max_steps_per_episode must be positive");
  if (spec.parameters.is_null() || spec.parameters.empty()) {
    spec.parameters = default_spec(spec.name, spec.variant, spec.layout_seed).parameters;
  }
  switch (spec.name) {
    case EnvName::blind_craftsman: return detail::build_blind_craftsman(spec);
    case EnvName::dungeon_quest: return detail::build_dungeon_quest(spec);
    case EnvName::mountain_car_collection: return detail::build_mountain_car(spec);
    case EnvName::warehouse_robotics: return detail::build_warehouse(spec);
  }
  throw EnvError("unknown environment");
}

automaton::Dfa bundled_dfa(EnvName name) { return automaton::Dfa::from_json(nlohmann::json::parse(bundled_text(name))); }

automaton::Dfa blind_craftsman_dfa(int quota) {
  if (quota < 1) throw EnvError("blind_craftsman: quota must be at least 1");
  automaton::DfaDefinition def;
  def.alphabet = {"wood", "factory", "home"};
  for (int k = 0; k < quota; ++k) {
    const auto empty = "tools" + std::to_string(k);
    const auto carrying = empty + "_wood";
    const auto next = "tools" + std::to_string(k + 1);
    def.states.push_back(empty);
    def.states.push_back(carrying);
    def.transitions.push_back({empty, "wood", carrying});
    def.transitions.push_back({carrying, "factory", next});
  }
  const auto done = "tools" + std::to_string(quota);
  def.states.push_back(done);
  def.states.push_back("home");
  def.transitions.push_back({done, "home", "home"});
  def.start = "tools0";
  def.accepting = {"home"};
  return automaton::Dfa(def);
}

std::vector<std::string> labeling_alphabet(EnvName name) {
  switch (name) {
    case EnvName::blind_craftsman: return {"wood", "factory", "home"};
    case EnvName::dungeon_quest: return {"key", "chest", "sword", "shield", "dragon"};
    case EnvName::mountain_car_collection: return {"power_cell", "sensor_array", "data_crystal", "base_station"};
    case EnvName::warehouse_robotics: return {"scanner", "scan", "charging_station", "item", "deliver"};
  }
  throw EnvError("unknown environment");
}

Environment::Environment(EnvSpec spec, automaton::Dfa dfa) : spec_(std::move(spec)), dfa_(std::move(dfa)) {
  if (dfa_.alphabet() != labeling_alphabet(spec_.name)) {
    throw EnvError(envs::to_string(spec_.name) + ": automaton alphabet does not match the labeling function");
  }
}

EnvState Environment::reset() const {
  EnvState s = initial_state();
  s.q = dfa_.start();
  s.t = 0;
  return s;
}

StepOutcome Environment::step(const EnvState& s, Action a) const {
  if (a < 0 || a >= num_actions()) {
    throw EnvError(envs::to_string(spec_.name) + ": invalid action index " + std::to_string(a));
  }
  Physics ph = physics(s, a);
  StepOutcome out;
  out.next_state = ph.next;
  out.next_state.t = s.t + 1;
  out.event = ph.event;
  out.next_state.q = dfa_.step(s.q, ph.event);

  const bool accepted = dfa_.is_accepting(out.next_state.q);
  out.reward = rewards_.step_penalty;
  if (out.next_state.q != s.q) out.reward += accepted ? rewards_.completion : rewards_.progress;
  out.done = accepted;
  if (!accepted && (ph.exhausted || out.next_state.t >= spec_.max_steps_per_episode)) {
    out.done = true;
    out.timeout = true;
  }
  return out;
}

std::uint64_t Environment::key(const EnvState& s) const {
  const auto dom = domains();
  std::uint64_t k = 0;
  for (std::size_t i = 0; i < dom.size(); ++i) {
    const int v = s.vars[i];
    if (v < 0 || v >= dom[i]) throw EnvError(envs::to_string(spec_.name) + ": state variable out of its domain");
    k = k * static_cast<std::uint64_t>(dom[i]) + static_cast<std::uint64_t>(v);
  }
  return k;
}

double Environment::r_max() const {
  return std::max({std::abs(rewards_.step_penalty), std::abs(rewards_.step_penalty + rewards_.progress),
                   std::abs(rewards_.step_penalty + rewards_.completion)});
}

int Environment::progress_steps() const {
  std::vector<int> depth(static_cast<std::size_t>(dfa_.num_states()), -1);
  std::deque<StateId> frontier{dfa_.start()};
  depth[static_cast<std::size_t>(dfa_.start())] = 0;
  while (!frontier.empty()) {
    StateId q = frontier.front();
    frontier.pop_front();
    if (dfa_.is_accepting(q)) return depth[static_cast<std::size_t>(q)];
    for (Symbol l = 0; l < dfa_.num_symbols(); ++l) {
      StateId next = dfa_.step(q, l);
      if (depth[static_cast<std::size_t>(next)] < 0) {
        depth[static_cast<std::size_t>(next)] = depth[static_cast<std::size_t>(q)] + 1;
        frontier.push_back(next);
      }
    }
  }
  return 0;
}

double Environment::min_return() const { return spec_.max_steps_per_episode * rewards_.step_penalty; }

double Environment::max_return() const {
  const int n = progress_steps();
  return n > 0 ? (n - 1) * rewards_.progress + rewards_.completion : 0.0;
}

std::vector<Action> golden_trajectory(const Environment& env) {
  struct Parent {
    ProductState from;
    Action action;
    int depth;
  };
  const EnvState start = env.reset();
  std::unordered_map<ProductState, Parent> parent;
  std::unordered_map<ProductState, EnvState> states;
  std::deque<EnvState> frontier{start};
  const ProductState root = env.product(start);
  parent.emplace(root, Parent{root, -1, 0});
  states.emplace(root, start);

  while (!frontier.empty()) {
    EnvState s = frontier.front();
    frontier.pop_front();
    const ProductState ps = env.product(s);
    for (Action a = 0; a < env.num_actions(); ++a) {
      StepOutcome out = env.step(s, a);
      const ProductState next = env.product(out.next_state);
      if (parent.contains(next)) continue;
      parent.emplace(next, Parent{ps, a, parent.at(ps).depth + 1});
      if (out.done && !out.timeout) {
        std::vector<Action> path;
        for (ProductState cur = next; !(cur == root); cur = parent.at(cur).from) path.push_back(parent.at(cur).action);
        std::reverse(path.begin(), path.end());
        return path;
      }
      if (!out.done) frontier.push_back(out.next_state);
    }
  }
  return {};
}

Rollout replay(const Environment& env, const std::vector<Action>& actions) {
  Rollout r;
  EnvState s = env.reset();
  for (Action a : actions) {
    StepOutcome out = env.step(s, a);
    ++r.steps;
    r.total_reward += out.reward;
    s = out.next_state;
    if (out.done) {
      r.accepted = !out.timeout;
      break;
    }
  }
  return r;
}

}  // namespace cadent::envs
