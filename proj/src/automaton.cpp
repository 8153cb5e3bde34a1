#include "cadent/automaton.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <set>

namespace cadent::automaton {

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) {
    throw DfaError(std::string("DFA definition: missing array field '") + field + "'", {});
  }
  return j.at(field).get<std::vector<std::string>>();
}

int index_of(const std::vector<std::string>& names, std::string_view name) {
  auto it = std::find(names.begin(), names.end(), name);
  return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

}  // namespace

DfaDefinition DfaDefinition::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DfaError("DFA definition: expected a JSON object", {});
  DfaDefinition def;
  def.states = string_list(j, "states");
  def.alphabet = string_list(j, "alphabet");
  def.accepting = string_list(j, "accepting");
  if (!j.contains("start") || !j.at("start").is_string()) {
    throw DfaError("DFA definition: missing string field 'start'", {});
  }
  def.start = j.at("start").get<std::string>();
  if (!j.contains("transitions") || !j.at("transitions").is_array()) {
    throw DfaError("DFA definition: missing array field 'transitions'", {});
  }
  for (const auto& t : j.at("transitions")) {
    if (!t.is_object() || !t.contains("from") || !t.contains("symbol") || !t.contains("to")) {
      throw DfaError("DFA definition: transition needs 'from', 'symbol' and 'to'", {});
    }
    def.transitions.push_back(
        {t.at("from").get<std::string>(), t.at("symbol").get<std::string>(), t.at("to").get<std::string>()});
  }
  return def;
}

nlohmann::json DfaDefinition::to_json() const {
  nlohmann::json transitions_json = nlohmann::json::array();
  for (const auto& t : transitions) {
    transitions_json.push_back({{"from", t.from}, {"symbol", t.symbol}, {"to", t.to}});
  }
  return {{"states", states},
          {"alphabet", alphabet},
          {"start", start},
          {"accepting", accepting},
          {"transitions", transitions_json}};
}

std::vector<Violation> validate(const DfaDefinition& def) {
  using K = Violation::Kind;
  std::vector<Violation> out;
  if (def.states.empty()) {
    out.push_back({K::empty, "automaton has no states"});
    return out;
  }

  auto check_unique = [&](const std::vector<std::string>& names, const char* what) {
    std::set<std::string> seen;
    for (const auto& n : names) {
      if (!seen.insert(n).second) out.push_back({K::duplicate_name, std::string("duplicate ") + what + " '" + n + "'"});
    }
  };
  check_unique(def.states, "state");
  check_unique(def.alphabet, "symbol");

  auto known_state = [&](const std::string& s) { return index_of(def.states, s) >= 0; };
  if (!known_state(def.start)) out.push_back({K::unknown_state, "start state '" + def.start + "' is not a state"});
  for (const auto& f : def.accepting) {
    if (!known_state(f)) out.push_back({K::unknown_state, "accepting state '" + f + "' is not a state"});
  }

  std::map<std::pair<std::string, std::string>, std::string> seen_targets;
  std::map<std::string, std::vector<std::string>> successors;
  for (const auto& t : def.transitions) {
    bool ok = true;
    if (!known_state(t.from)) {
      out.push_back({K::unknown_state, "transition source '" + t.from + "' is not a state"});
      ok = false;
    }
    if (!known_state(t.to)) {
      out.push_back({K::unknown_state, "transition target '" + t.to + "' is not a state"});
      ok = false;
    }
    if (index_of(def.alphabet, t.symbol) < 0) {
      out.push_back({K::alphabet, "transition " + t.from + " --" + t.symbol + "--> " + t.to +
                                      " uses symbol '" + t.symbol + "' outside the alphabet"});
      ok = false;
    }
    if (!ok) continue;
    auto [it, inserted] = seen_targets.emplace(std::pair{t.from, t.symbol}, t.to);
    if (!inserted && it->second != t.to) {
      out.push_back({K::nondeterministic, "state '" + t.from + "' has two targets on symbol '" + t.symbol + "'"});
      continue;
    }
    successors[t.from].push_back(t.to);
  }

  if (known_state(def.start)) {
    std::set<std::string> reached{def.start};
    std::deque<std::string> frontier{def.start};
    while (!frontier.empty()) {
      auto cur = frontier.front();
      frontier.pop_front();
      for (const auto& nxt : successors[cur]) {
        if (reached.insert(nxt).second) frontier.push_back(nxt);
      }
    }
    for (const auto& f : def.accepting) {
      if (known_state(f) && !reached.contains(f)) {
        out.push_back({K::unreachable_accepting, "accepting state '" + f + "' is unreachable from start"});
      }
    }
  }
  return out;
}

Dfa::Dfa(const DfaDefinition& def) {
  auto violations = validate(def);
  if (!violations.empty()) {
    std::string msg = "invalid DFA definition:";
    for (const auto& v : violations) msg += "\n  " + v.message;
    throw DfaError(msg, std::move(violations));
  }
  state_names_ = def.states;
  symbol_names_ = def.alphabet;
  const auto n = state_names_.size();
  const auto m = symbol_names_.size();
  table_.resize(n * m);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t l = 0; l < m; ++l) table_[q * m + l] = static_cast<StateId>(q);
  }
  for (const auto& t : def.transitions) {
    table_[static_cast<std::size_t>(index_of(state_names_, t.from)) * m +
           static_cast<std::size_t>(index_of(symbol_names_, t.symbol))] = index_of(state_names_, t.to);
  }
  accepting_.assign(n, false);
  for (const auto& f : def.accepting) accepting_[static_cast<std::size_t>(index_of(state_names_, f))] = true;
  start_ = index_of(state_names_, def.start);
}

Dfa Dfa::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DfaError("cannot open DFA definition '" + path + "'", {});
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DfaError("malformed DFA definition '" + path + "': " + e.what(), {});
  }
  return from_json(j);
}

StateId Dfa::step(StateId q, Symbol l) const {
  if (q < 0 || q >= num_states()) throw std::out_of_range("automaton state id out of range");
  if (l == kNullSymbol) return q;
  if (l < 0 || l >= num_symbols()) throw std::out_of_range("event symbol id out of range");
  return table_[static_cast<std::size_t>(q) * symbol_names_.size() + static_cast<std::size_t>(l)];
}

bool Dfa::is_accepting(StateId q) const {
  if (q < 0 || q >= num_states()) throw std::out_of_range("automaton state id out of range");
  return accepting_[static_cast<std::size_t>(q)];
}

const std::string& Dfa::state_name(StateId q) const { return state_names_.at(static_cast<std::size_t>(q)); }

const std::string& Dfa::symbol_name(Symbol l) const { return symbol_names_.at(static_cast<std::size_t>(l)); }

StateId Dfa::state_id(std::string_view name) const {
  int id = index_of(state_names_, name);
  if (id < 0) throw std::out_of_range("unknown automaton state '" + std::string(name) + "'");
  return id;
}

Symbol Dfa::symbol_id(std::string_view name) const {
  int id = index_of(symbol_names_, name);
  if (id < 0) throw std::out_of_range("unknown event symbol '" + std::string(name) + "'");
  return id;
}

std::vector<std::pair<StateId, StateId>> Dfa::edges() const {
  std::set<std::pair<StateId, StateId>> out;
  for (StateId q = 0; q < num_states(); ++q) {
    for (Symbol l = 0; l < num_symbols(); ++l) {
      StateId next = step(q, l);
      if (next != q) out.emplace(q, next);
    }
  }
  return {out.begin(), out.end()};
}

std::vector<bool> Dfa::forward_reachable() const {
  std::vector<bool> seen(state_names_.size(), false);
  std::deque<StateId> frontier{start_};
  seen[static_cast<std::size_t>(start_)] = true;
  while (!frontier.empty()) {
    StateId q = frontier.front();
    frontier.pop_front();
    for (Symbol l = 0; l < num_symbols(); ++l) {
      StateId next = step(q, l);
      if (!seen[static_cast<std::size_t>(next)]) {
        seen[static_cast<std::size_t>(next)] = true;
        frontier.push_back(next);
      }
    }
  }
  return seen;
}

std::vector<bool> Dfa::backward_reachable() const {
  std::vector<bool> seen(accepting_);
  bool changed = true;
  while (changed) {
    changed = false;
    for (StateId q = 0; q < num_states(); ++q) {
      if (seen[static_cast<std::size_t>(q)]) continue;
      for (Symbol l = 0; l < num_symbols(); ++l) {
        if (seen[static_cast<std::size_t>(step(q, l))]) {
          seen[static_cast<std::size_t>(q)] = true;
          changed = true;
          break;
        }
      }
    }
  }
  return seen;
}

std::vector<std::pair<StateId, StateId>> Dfa::accepting_path_edges() const {
  const auto fwd = forward_reachable();
  const auto bwd = backward_reachable();
  std::vector<std::pair<StateId, StateId>> out;
  for (auto [from, to] : edges()) {
    if (fwd[static_cast<std::size_t>(from)] && bwd[static_cast<std::size_t>(to)] && !is_accepting(from)) {
      out.emplace_back(from, to);
    }
  }
  return out;
}

std::vector<StateId> Dfa::accepting_path_states() const {
  const auto fwd = forward_reachable();
  const auto bwd = backward_reachable();
  std::vector<StateId> out;
  for (StateId q = 0; q < num_states(); ++q) {
    if (fwd[static_cast<std::size_t>(q)] && bwd[static_cast<std::size_t>(q)] && !is_accepting(q)) out.push_back(q);
  }
  return out;
}

DfaDefinition Dfa::definition() const {
  DfaDefinition def;
  def.states = state_names_;
  def.alphabet = symbol_names_;
  def.start = state_names_[static_cast<std::size_t>(start_)];
  for (StateId q = 0; q < num_states(); ++q) {
    if (is_accepting(q)) def.accepting.push_back(state_names_[static_cast<std::size_t>(q)]);
    for (Symbol l = 0; l < num_symbols(); ++l) {
      def.transitions.push_back({state_names_[static_cast<std::size_t>(q)], symbol_names_[static_cast<std::size_t>(l)],
                                 state_names_[static_cast<std::size_t>(step(q, l))]});
    }
  }
  return def;
}

}  // namespace cadent::automaton
