#pragma once

// Independent reference solvers used to derive expected values in the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "cadent/envs.hpp"

namespace oracle {

// Finite deterministic MDP with dense tables.
struct Mdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<std::vector<int>> next;        // [s][a]
  std::vector<std::vector<double>> reward;   // [s][a]
  std::vector<std::vector<bool>> terminal;   // [s][a]: no bootstrap after this move
};

// Q* by synchronous value iteration until the largest change is below tol.
inline std::vector<std::vector<double>> value_iteration(const Mdp& m, double gamma, double tol = 1e-13,
                                                        int max_sweeps = 200000) {
  std::vector<std::vector<double>> q(m.num_states, std::vector<double>(m.num_actions, 0.0));
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    std::vector<double> v(m.num_states);
    for (int s = 0; s < m.num_states; ++s) v[s] = *std::max_element(q[s].begin(), q[s].end());
    double change = 0.0;
    for (int s = 0; s < m.num_states; ++s) {
      for (int a = 0; a < m.num_actions; ++a) {
        const double target = m.reward[s][a] + (m.terminal[s][a] ? 0.0 : gamma * v[m.next[s][a]]);
        change = std::max(change, std::abs(target - q[s][a]));
        q[s][a] = target;
      }
    }
    if (change < tol) break;
  }
  return q;
}

inline int greedy(const std::vector<double>& row) {
  int best = 0;
  for (int a = 1; a < static_cast<int>(row.size()); ++a) {
    if (row[a] > row[best]) best = a;
  }
  return best;
}

// Product MDP of an environment, enumerated breadth-first from reset. The step
// counter is held at zero, so only acceptance and resource exhaustion end an
// episode.
struct ProductMdp {
  Mdp mdp;
  std::vector<cadent::envs::EnvState> states;
  std::map<cadent::automaton::ProductState, int> index;
};

inline ProductMdp enumerate(const cadent::envs::Environment& env) {
  using cadent::envs::EnvState;
  ProductMdp out;
  auto intern = [&](EnvState s) {
    s.t = 0;
    const auto key = env.product(s);
    auto [it, fresh] = out.index.emplace(key, static_cast<int>(out.states.size()));
    if (fresh) out.states.push_back(s);
    return it->second;
  };
  std::deque<int> frontier{intern(env.reset())};
  const int na = env.num_actions();
  out.mdp.num_actions = na;
  while (!frontier.empty()) {
    const int i = frontier.front();
    frontier.pop_front();
    if (static_cast<int>(out.mdp.next.size()) <= i) {
      out.mdp.next.resize(i + 1);
      out.mdp.reward.resize(i + 1);
      out.mdp.terminal.resize(i + 1);
    }
    out.mdp.next[i].assign(na, 0);
    out.mdp.reward[i].assign(na, 0.0);
    out.mdp.terminal[i].assign(na, false);
    const EnvState s = out.states[i];
    for (int a = 0; a < na; ++a) {
      const auto o = env.step(s, a);
      const std::size_t before = out.states.size();
      const int j = intern(o.next_state);
      if (out.states.size() != before) frontier.push_back(j);
      out.mdp.next[i][a] = j;
      out.mdp.reward[i][a] = o.reward;
      out.mdp.terminal[i][a] = o.done;
    }
  }
  out.mdp.num_states = static_cast<int>(out.states.size());
  out.mdp.next.resize(out.mdp.num_states);
  out.mdp.reward.resize(out.mdp.num_states);
  out.mdp.terminal.resize(out.mdp.num_states);
  return out;
}

}  // namespace oracle
