#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "cadent/envs.hpp"
#include "cadent/harness.hpp"
#include "cadent/student.hpp"
#include "cadent/tabular.hpp"
#include "cadent/teacher.hpp"

using namespace cadent;
using namespace cadent::student;

namespace {

constexpr int kCases = 1000;

struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
  std::vector<double> row(int n, double lo, double hi) {
    std::vector<double> r(static_cast<std::size_t>(n));
    for (auto& x : r) x = real(lo, hi);
    return r;
  }
};

teacher::TeacherKnowledge random_knowledge(Gen& g) {
  const auto dfa = envs::bundled_dfa(envs::EnvName::dungeon_quest);
  teacher::TeacherKnowledge tk;
  tk.states = dfa.state_names();
  tk.alphabet = dfa.alphabet();
  tk.num_actions = 4;
  tk.tau = 0.1;
  for (const auto& e : dfa.accepting_path_edges()) tk.q_ad[e] = g.real(-10, 10);
  for (int q = 0; q < dfa.num_states(); ++q) {
    auto p = g.row(4, 0.01, 1.0);
    const double z = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= z;
    tk.pi_teacher[q] = p;
  }
  tk.provenance = {"dungeon_quest", "0000000000000000", 1, 0};
  return tk;
}

}  // namespace

TEST(Property, GateRangeMonotoneMidpoint) {
  Gen g(1);
  for (int i = 0; i < kCases; ++i) {
    const double k = g.real(0.01, 100.0);
    const double theta = g.real(0.0, 5.0);
    const double v1 = g.real(0.0, 1e3), v2 = g.real(0.0, 1e3);
    const double w1 = trust_gate(v1, k, theta), w2 = trust_gate(v2, k, theta);
    EXPECT_GE(w1, 0.0);
    EXPECT_LE(w1, 1.0);
    EXPECT_TRUE(std::isfinite(w1));
    if (v1 < v2) EXPECT_GE(w1, w2);
    if (v1 > v2) EXPECT_LE(w1, w2);
    EXPECT_DOUBLE_EQ(trust_gate(theta, k, theta), 0.5);
  }
}

TEST(Property, SoftmaxNormalized) {
  Gen g(2);
  for (int i = 0; i < kCases; ++i) {
    const int n = g.integer(1, 9);
    auto row = g.row(n, -50, 50);
    if (i % 3 == 0) row[g.integer(0, n - 1)] = 1e6;
    if (i % 5 == 0) row[g.integer(0, n - 1)] = -1e6;
    const double tau = g.real(0.01, 10.0);
    const auto p = tabular::softmax_policy(row, tau);
    double sum = 0.0;
    for (double x : p) {
      EXPECT_GE(x, 0.0);
      EXPECT_TRUE(std::isfinite(x));
      sum += x;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Property, SoftmaxShiftInvariant) {
  Gen g(3);
  for (int i = 0; i < kCases; ++i) {
    const int n = g.integer(1, 9);
    auto row = g.row(n, -20, 20);
    const double c = g.real(-100, 100);
    const double tau = g.real(0.1, 5.0);
    auto shifted = row;
    for (auto& x : shifted) x += c;
    const auto p = tabular::softmax_policy(row, tau), q = tabular::softmax_policy(shifted, tau);
    for (int a = 0; a < n; ++a) EXPECT_NEAR(p[a], q[a], 1e-9);
  }
}

TEST(Property, TacticalGradientBounded) {
  Gen g(4);
  for (int i = 0; i < kCases; ++i) {
    const auto tk = random_knowledge(g);
    Guidance guide(tk);
    const double lambda = g.real(0.0, 5.0);
    const auto row = g.row(4, -100, 100);
    const int q = g.integer(0, guide.num_states() - 1);
    const double v = tactical_gradient(guide, q, row, g.integer(0, 3), lambda);
    EXPECT_LE(std::abs(v), lambda + 1e-12);
  }
}

TEST(Property, StrategicRewardZeroOnSelfLoop) {
  Gen g(5);
  for (int i = 0; i < kCases; ++i) {
    const auto tk = random_knowledge(g);
    Guidance guide(tk);
    const int q = g.integer(0, guide.num_states() - 1);
    const double lambda = g.real(0.0, 5.0);
    EXPECT_EQ(strategic_reward(guide, q, q, lambda), 0.0);
    EXPECT_EQ(guide.novel_transitions(), 0u);
    const int q2 = g.integer(0, guide.num_states() - 1);
    EXPECT_LE(std::abs(strategic_reward(guide, q, q2, lambda)), lambda * guide.q_max_ad() + 1e-12);
  }
}

TEST(Property, VolatilityNonNegative) {
  Gen g(6);
  for (int i = 0; i < kCases; ++i) {
    VolatilityTracker v(g.real(0.0, 3.0));
    const double eta = g.real(0.001, 1.0);
    const ProductState s{static_cast<std::uint64_t>(g.integer(0, 5)), 0};
    double prev_max = v.v_init();
    for (int t = 0; t < 20; ++t) {
      const double d = g.real(-1e3, 1e3);
      const double out = update_volatility(v, s, 0, d, eta);
      EXPECT_GE(out, 0.0);
      // a convex combination never exceeds the larger input
      prev_max = std::max(prev_max, std::abs(d));
      EXPECT_LE(out, prev_max * (1 + 1e-12));
    }
  }
}

TEST(Property, AutomatonValueOrderInvariantAndScales) {
  Gen g(7);
  const auto dfa = envs::bundled_dfa(envs::EnvName::dungeon_quest);
  for (int i = 0; i < kCases; ++i) {
    tabular::QTable q(4), scaled(4);
    std::vector<std::pair<teacher::Edge, teacher::Trigger>> triggers;
    for (const auto& e : dfa.accepting_path_edges()) {
      const int n = g.integer(1, 4);
      for (int j = 0; j < n; ++j) {
        const ProductState s{static_cast<std::uint64_t>(g.integer(0, 1000)), e.first};
        const int a = g.integer(0, 3);
        triggers.push_back({e, {s, a}});
      }
    }
    const double c = g.real(0.1, 10.0);
    for (const auto& [e, t] : triggers) {
      const double v = g.real(-5, 5);
      if (!q.contains(t.first) || q.value(t.first, t.second) == 0.0) {
        q.set(t.first, t.second, v);
        scaled.set(t.first, t.second, c * v);
      }
    }
    teacher::TransitionLog forward, backward;
    for (const auto& [e, t] : triggers) forward[e].insert(t);
    for (auto it = triggers.rbegin(); it != triggers.rend(); ++it) backward[it->first].insert(it->second);
    const auto a = teacher::distill_automaton_values(q, dfa, forward);
    const auto b = teacher::distill_automaton_values(q, dfa, backward);
    const auto s = teacher::distill_automaton_values(scaled, dfa, forward);
    EXPECT_EQ(a, b);
    for (const auto& [e, v] : a) EXPECT_NEAR(s.at(e), c * v, 1e-9 * (1 + std::abs(c * v)));
  }
}

TEST(Property, TeacherPolicyShiftInvariant) {
  Gen g(8);
  const auto dfa = envs::bundled_dfa(envs::EnvName::dungeon_quest);
  for (int i = 0; i < kCases; ++i) {
    tabular::QTable q(4), shifted(4);
    teacher::VisitationLog visits;
    const double c = g.real(-50, 50);
    for (StateId qs : dfa.accepting_path_states()) {
      const int n = g.integer(1, 3);
      for (int j = 0; j < n; ++j) {
        const ProductState s{static_cast<std::uint64_t>(100 * qs + j), qs};
        const auto row = g.row(4, -5, 5);
        for (int a = 0; a < 4; ++a) {
          q.set(s, a, row[a]);
          shifted.set(s, a, row[a] + c);
        }
        visits[s] = {static_cast<std::uint64_t>(g.integer(1, 50)), 0, 0, 0};
      }
    }
    const double tau = g.real(0.05, 3.0);
    const auto p = teacher::distill_teacher_policy(q, visits, dfa, tau);
    const auto ps = teacher::distill_teacher_policy(shifted, visits, dfa, tau);
    for (const auto& [qs, row] : p) {
      for (int a = 0; a < 4; ++a) EXPECT_NEAR(row[a], ps.at(qs)[a], 1e-9);
    }
  }
}

TEST(Property, FusedUpdateIsConvex) {
  Gen g(9);
  for (int i = 0; i < kCases; ++i) {
    const double w = g.real(0.0, 1.0);
    const double d = g.real(-100, 100), r = g.real(-10, 10), p = g.real(-2, 2);
    const double u = cadent_delta(w, d, r, p);
    EXPECT_LE(u, std::max(d, r + p) + 1e-12);
    EXPECT_GE(u, std::min(d, r + p) - 1e-12);
  }
}

TEST(Property, LearnerUpdateWithinBound) {
  Gen g(10);
  for (int i = 0; i < kCases; ++i) {
    const auto tk = random_knowledge(g);
    StudentConfig c;
    c.guide = {g.real(0.0, 2.0), g.real(0.0, 2.0)};
    StudentLearner l(c, &tk, 4);
    const double r_max = 9.99;
    const double bound = update_bound(c.learn, c.guide, r_max, tk.q_max_ad());
    for (int t = 0; t < 30; ++t) {
      const ProductState s{static_cast<std::uint64_t>(g.integer(0, 3)), g.integer(0, 5)};
      const ProductState s2{static_cast<std::uint64_t>(g.integer(0, 3)), g.integer(0, 5)};
      const auto tr = l.update(s, g.integer(0, 3), g.real(-0.01, r_max), s2, g.integer(0, 9) == 0);
      EXPECT_LE(std::abs(tr.update), bound + 1e-9);
    }
  }
}

TEST(Property, QUpdateAlphaOneHitsTarget) {
  Gen g(11);
  for (int i = 0; i < kCases; ++i) {
    tabular::QTable q(3);
    const ProductState s{1, 0}, s2{2, 1};
    for (int a = 0; a < 3; ++a) {
      q.set(s, a, g.real(-10, 10));
      q.set(s2, a, g.real(-10, 10));
    }
    const int a = g.integer(0, 2);
    const double r = g.real(-1, 1), gamma = g.real(0.0, 0.999);
    const bool done = g.integer(0, 1) == 1;
    const double target = r + (done ? 0.0 : gamma * q.max_value(s2));
    tabular::q_update(q, s, a, tabular::td_error(q, s, a, r, s2, done, gamma), 1.0);
    EXPECT_NEAR(q.value(s, a), target, 1e-12);
  }
}

TEST(Property, GreedyConsumesNoRandomness) {
  Gen g(12);
  for (int i = 0; i < kCases; ++i) {
    tabular::QTable q(4);
    const ProductState s{static_cast<std::uint64_t>(i), 0};
    for (int a = 0; a < 4; ++a) q.set(s, a, g.real(-1, 1));
    Rng rng(static_cast<std::uint64_t>(i)), copy(static_cast<std::uint64_t>(i));
    EXPECT_EQ(tabular::epsilon_greedy(q, s, 0.0, rng), tabular::argmax(q.row(s)));
    EXPECT_EQ(rng.next(), copy.next());
  }
}

TEST(Property, ThresholdMonotone) {
  Gen g(13);
  for (int i = 0; i < kCases; ++i) {
    std::vector<EpisodeRecord> recs;
    std::int64_t cum = 0;
    const int n = g.integer(1, 60);
    for (int e = 0; e < n; ++e) {
      const int steps = g.integer(1, 50);
      cum += steps;
      recs.push_back({"x", "y", 0, e + 1, g.real(-1, 10), steps, cum, false});
    }
    const int window = g.integer(1, 10);
    const double lo = g.real(-1, 10), hi = lo + g.real(0, 5);
    const auto a = harness::steps_to_threshold(recs, lo, window);
    const auto b = harness::steps_to_threshold(recs, hi, window);
    if (b) {
      ASSERT_TRUE(a.has_value());
      EXPECT_LE(*a, *b);
    }
  }
}

TEST(Property, AutomatonTotalAndNullIdentity) {
  Gen g(14);
  std::vector<automaton::Dfa> dfas;
  for (auto e : envs::kAllEnvs) dfas.push_back(envs::bundled_dfa(e));
  for (int i = 0; i < kCases; ++i) {
    const auto& d = dfas[static_cast<std::size_t>(g.integer(0, 3))];
    const int q = g.integer(0, d.num_states() - 1);
    const int l = g.integer(0, d.num_symbols() - 1);
    const int next = d.step(q, l);
    EXPECT_GE(next, 0);
    EXPECT_LT(next, d.num_states());
    EXPECT_EQ(d.step(q, automaton::kNullSymbol), q);
    // accepting states absorb
    if (d.is_accepting(q)) EXPECT_TRUE(d.is_accepting(next));
  }
}

TEST(Property, EnvironmentStepsStayValid) {
  Gen g(15);
  for (int i = 0; i < kCases; ++i) {
    const auto name = envs::kAllEnvs[static_cast<std::size_t>(g.integer(0, 3))];
    const auto env = envs::make_env(envs::default_spec(name, envs::Variant::target));
    auto s = env->reset();
    for (int t = 0; t < 30; ++t) {
      const auto out = env->step(s, g.integer(0, env->num_actions() - 1));
      EXPECT_LE(out.reward, env->r_max());
      EXPECT_GE(env->product(out.next_state).q, 0);
      if (out.done) break;
      s = out.next_state;
    }
  }
}
