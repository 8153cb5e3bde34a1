#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "cadent/tabular.hpp"
#include "oracles.hpp"

using namespace cadent;
using namespace cadent::tabular;

namespace {

const ProductState S{1, 0};
const ProductState S2{2, 0};

}  // namespace

TEST(Tabular, TdErrorZeroTable) {
  QTable q(4);
  EXPECT_EQ(td_error(q, S, 0, 1.0, S2, false, 0.99), 1.0);
}

TEST(Tabular, TdErrorBootstrap) {
  QTable q(2);
  q.set(S, 0, 1.0);
  q.set(S2, 1, 1.0);
  EXPECT_DOUBLE_EQ(td_error(q, S, 0, 1.0, S2, false, 0.9), 0.9);
}

TEST(Tabular, TdErrorTerminal) {
  QTable q(2);
  q.set(S, 0, 4.0);
  q.set(S2, 0, 100.0);
  EXPECT_EQ(td_error(q, S, 0, 10.0, S2, true, 0.9), 6.0);
}

TEST(Tabular, QUpdate) {
  QTable q(4);
  q_update(q, S, 0, 1.0, 0.1);
  EXPECT_EQ(q.value(S, 0), 0.1);
  q_update(q, S, 0, 0.0, 0.1);
  EXPECT_EQ(q.value(S, 0), 0.1);
  EXPECT_THROW(q_update(q, S, 0, std::nan(""), 0.1), InvariantError);
  EXPECT_THROW(q_update(q, S, 0, INFINITY, 0.1), InvariantError);
}

TEST(Tabular, AbsentReadsDoNotInsert) {
  QTable q(3);
  EXPECT_EQ(q.value(S, 2), 0.0);
  EXPECT_EQ(q.max_value(S), 0.0);
  EXPECT_EQ(q.row(S).size(), 3u);
  EXPECT_EQ(q.size(), 0u);
  EXPECT_FALSE(q.contains(S));
  EXPECT_THROW(q.value(S, 3), std::out_of_range);
  EXPECT_THROW(q.set(S, 0, NAN), InvariantError);
}

TEST(Tabular, SoftmaxUniform) {
  const std::vector<double> row{3.0, 3.0, 3.0, 3.0};
  for (double p : softmax_policy(row, 0.7)) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Tabular, SoftmaxFlattening) {
  const std::vector<double> row{1.0, 0.0};
  for (double p : softmax_policy(row, 100.0)) EXPECT_NEAR(p, 0.5, 0.01);
}

TEST(Tabular, SoftmaxScalarOracle) {
  const double z = std::exp(2.0) + std::exp(1.0) + std::exp(0.0);
  const auto p = softmax_policy(std::vector<double>{2.0, 1.0, 0.0}, 1.0);
  EXPECT_NEAR(p[0], std::exp(2.0) / z, 1e-9);
  EXPECT_NEAR(p[1], std::exp(1.0) / z, 1e-9);
  EXPECT_NEAR(p[2], 1.0 / z, 1e-9);
  EXPECT_THROW(softmax_policy(std::vector<double>{1.0}, 0.0), InvariantError);
}

TEST(Tabular, EpsilonGreedyPure) {
  QTable q(4);
  q.set(S, 1, 5.0);
  Rng rng(1);
  EXPECT_EQ(epsilon_greedy(q, S, 0.0, rng), 1);
  EXPECT_EQ(epsilon_greedy(q, S2, 0.0, rng), 0);
}

TEST(Tabular, EpsilonOneIsUniform) {
  QTable q(4);
  q.set(S, 1, 5.0);
  Rng rng(7);
  const int n = 100000;
  std::vector<int> counts(4, 0);
  for (int i = 0; i < n; ++i) ++counts[epsilon_greedy(q, S, 1.0, rng)];
  const double p = 0.25;
  const double sigma = std::sqrt(n * p * (1 - p));
  for (int c : counts) EXPECT_LE(std::abs(c - n * p), 3 * sigma);
}

TEST(Tabular, EpsilonSchedule) {
  EpsilonSchedule e;
  EXPECT_EQ(e.at(0), 1.0);
  EXPECT_DOUBLE_EQ(e.at(10), std::pow(0.995, 10));
  EXPECT_EQ(e.at(100000), 0.05);
}

TEST(Tabular, LearningParamsValidate) {
  LearningParams p;
  EXPECT_NO_THROW(p.validate());
  p.gamma = 1.0;
  EXPECT_THROW(p.validate(), InvariantError);
  p = {};
  p.alpha = 0.0;
  EXPECT_THROW(p.validate(), InvariantError);
  p = {};
  p.epsilon.end = 0.5;
  p.epsilon.start = 0.2;
  EXPECT_THROW(p.validate(), InvariantError);
  p = {};
  p.tau = 0.0;
  EXPECT_THROW(p.validate(), InvariantError);
}

TEST(Tabular, GreedyPolicy) {
  QTable q(2);
  EXPECT_TRUE(greedy_policy(q).empty());
  q.set(S, 1, 2.0);
  const auto pi = greedy_policy(q);
  ASSERT_EQ(pi.size(), 1u);
  EXPECT_EQ(pi.at(S), 1);
}

TEST(Tabular, ArgmaxTieBreak) {
  EXPECT_EQ(argmax(std::vector<double>{0.0, 0.0, 0.0}), 0);
  EXPECT_EQ(argmax(std::vector<double>{1.0, 3.0, 3.0}), 1);
}

TEST(Tabular, TwoStateFixedPoint) {
  // s0 --a0--> s1 (r=0), s0 --a1--> s0 (r=0.5), s1 --a0--> terminal (r=1), s1 --a1--> s0 (r=0)
  oracle::Mdp m;
  m.num_states = 2;
  m.num_actions = 2;
  m.next = {{1, 0}, {0, 0}};
  m.reward = {{0.0, 0.5}, {1.0, 0.0}};
  m.terminal = {{false, false}, {true, false}};
  const double gamma = 0.9;
  const auto star = oracle::value_iteration(m, gamma);

  QTable q(2);
  const ProductState ids[2] = {{10, 0}, {11, 0}};
  for (int sweep = 0; sweep < 2000; ++sweep) {
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        const double d = td_error(q, ids[s], a, m.reward[s][a], ids[m.next[s][a]], m.terminal[s][a], gamma);
        q_update(q, ids[s], a, d, 1.0);
      }
    }
  }
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      EXPECT_NEAR(q.value(ids[s], a), star[s][a], 1e-9);
      // at the fixed point every delta is zero and updates leave Q unchanged
      EXPECT_NEAR(td_error(q, ids[s], a, m.reward[s][a], ids[m.next[s][a]], m.terminal[s][a], gamma), 0.0, 1e-9);
    }
  }
}

TEST(Tabular, ThreeStateGreedyMatchesValueIteration) {
  // chain 0 -> 1 -> 2 -> goal with a tempting loop at state 1
  oracle::Mdp m;
  m.num_states = 3;
  m.num_actions = 3;
  m.next = {{1, 0, 2}, {2, 1, 0}, {2, 0, 1}};
  m.reward = {{0.0, 0.1, -1.0}, {0.0, 0.2, 0.0}, {5.0, 0.0, 0.0}};
  m.terminal = {{false, false, false}, {false, false, false}, {true, false, false}};
  const double gamma = 0.95;
  const auto star = oracle::value_iteration(m, gamma);

  QTable q(3);
  Rng rng(3);
  std::vector<ProductState> ids{{0, 0}, {1, 0}, {2, 0}};
  for (int ep = 0; ep < 3000; ++ep) {
    int s = static_cast<int>(rng.below(3));
    for (int t = 0; t < 50; ++t) {
      const Action a = epsilon_greedy(q, ids[s], 0.3, rng);
      const double d = td_error(q, ids[s], a, m.reward[s][a], ids[m.next[s][a]], m.terminal[s][a], gamma);
      q_update(q, ids[s], a, d, 0.2);
      if (m.terminal[s][a]) break;
      s = m.next[s][a];
    }
  }
  const auto pi = greedy_policy(q);
  for (int s = 0; s < 3; ++s) EXPECT_EQ(pi.at(ids[s]), oracle::greedy(star[s])) << "state " << s;
}

TEST(Tabular, SaveLoadRoundTrip) {
  QTable q(4);
  q.set(S, 0, 0.1);
  q.set(S, 3, -1e-300);
  q.set(S2, 2, 123456.789);
  q.set({~0ULL, 7}, 1, 1.0 / 3.0);
  std::stringstream ss;
  q.save(ss);
  const QTable back = QTable::load(ss);
  EXPECT_EQ(back, q);
  EXPECT_EQ(back.states(), q.states());
}

TEST(Tabular, LoadRejectsBadInput) {
  std::stringstream bad("not-a-qtable 1\n");
  EXPECT_THROW(QTable::load(bad), FormatError);

  QTable q(2);
  q.set(S, 0, 1.0);
  std::stringstream ss;
  q.save(ss);
  std::string text = ss.str();
  text.pop_back();
  std::stringstream cut(text.substr(0, text.rfind('\n') + 1));
  EXPECT_THROW(QTable::load(cut), FormatError);
  EXPECT_THROW(QTable::load(std::string("/nonexistent/q.txt")), FormatError);
}

TEST(Tabular, StatesSorted) {
  QTable q(1);
  q.set({5, 1}, 0, 1);
  q.set({2, 3}, 0, 1);
  q.set({5, 0}, 0, 1);
  EXPECT_EQ(q.states(), (std::vector<ProductState>{{2, 3}, {5, 0}, {5, 1}}));
}

TEST(Rng, DeterministicAndDerived) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next(), b.next());
  Rng c = Rng::derive(42, 0), d = Rng::derive(42, 1);
  EXPECT_NE(c.next(), d.next());
  Rng e(5);
  for (int i = 0; i < 1000; ++i) {
    const double u = e.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(e.below(7), 7u);
  }
}
