#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace cadent::automaton {

using StateId = int;
using Symbol = int;

// Emitted by environments on steps where no labeled event fires.
inline constexpr Symbol kNullSymbol = -1;

// Raw, unvalidated automaton description as it appears in a definition file.
struct DfaDefinition {
  struct Transition {
    std::string from;
    std::string symbol;
    std::string to;
  };

  std::vector<std::string> states;
  std::vector<std::string> alphabet;
  std::string start;
  std::vector<std::string> accepting;
  std::vector<Transition> transitions;

  static DfaDefinition from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct Violation {
  enum class Kind { empty, duplicate_name, unknown_state, alphabet, nondeterministic, unreachable_accepting };
  Kind kind;
  std::string message;
};

// Lists every invariant violation in a definition; empty means loadable.
std::vector<Violation> validate(const DfaDefinition& def);

class DfaError : public std::runtime_error {
 public:
  DfaError(const std::string& what, std::vector<Violation> violations)
      : std::runtime_error(what), violations_(std::move(violations)) {}
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Immutable deterministic finite automaton with interned state and symbol ids.
///
/// The transition table is total: pairs missing from the definition are
/// completed with self-loops at load time.
class Dfa {
 public:
  // Throws DfaError listing every violation when the definition is invalid.
  explicit Dfa(const DfaDefinition& def);

  static Dfa from_json(const nlohmann::json& j) { return Dfa(DfaDefinition::from_json(j)); }
  static Dfa load(const std::string& path);

  int num_states() const { return static_cast<int>(state_names_.size()); }
  int num_symbols() const { return static_cast<int>(symbol_names_.size()); }
  StateId start() const { return start_; }

  StateId step(StateId q, Symbol l) const;
  bool is_accepting(StateId q) const;

  const std::string& state_name(StateId q) const;
  const std::string& symbol_name(Symbol l) const;
  StateId state_id(std::string_view name) const;
  Symbol symbol_id(std::string_view name) const;
  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::vector<std::string>& alphabet() const { return symbol_names_; }

  // Distinct (q, q') pairs with q != q' connected by some symbol.
  std::vector<std::pair<StateId, StateId>> edges() const;
  // Edges lying on at least one path from start to an accepting state.
  std::vector<std::pair<StateId, StateId>> accepting_path_edges() const;
  // Non-accepting states lying on at least one path from start to acceptance.
  std::vector<StateId> accepting_path_states() const;

  // Canonical definition including the completed self-loops.
  DfaDefinition definition() const;
  nlohmann::json to_json() const { return definition().to_json(); }

  friend bool operator==(const Dfa&, const Dfa&) = default;

 private:
  std::vector<bool> forward_reachable() const;
  std::vector<bool> backward_reachable() const;

  std::vector<std::string> state_names_;
  std::vector<std::string> symbol_names_;
  std::vector<StateId> table_;  // num_states x num_symbols
  std::vector<bool> accepting_;
  StateId start_ = 0;
};

// Free-function forms of the two core queries.
inline StateId step_automaton(const Dfa& dfa, StateId q, Symbol l) { return dfa.step(q, l); }
inline bool is_accepting(const Dfa& dfa, StateId q) { return dfa.is_accepting(q); }

/// Key of every Q-table: an environment-state key paired with an automaton state.
struct ProductState {
  std::uint64_t env = 0;
  StateId q = 0;

  friend bool operator==(const ProductState&, const ProductState&) = default;
  friend auto operator<=>(const ProductState&, const ProductState&) = default;
};

}  // namespace cadent::automaton

template <>
struct std::hash<cadent::automaton::ProductState> {
  std::size_t operator()(const cadent::automaton::ProductState& s) const noexcept {
    std::uint64_t h = s.env * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(s.q) + 0x632BE59BD9B4E019ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};
