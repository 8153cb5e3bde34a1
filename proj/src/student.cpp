#include "cadent/student.hpp"

#include <cmath>

namespace cadent::student {

namespace {

constexpr std::array<std::pair<GateMode, const char*>, 4> kGateNames{{
    {GateMode::adaptive, "adaptive"},
    {GateMode::fixed, "fixed"},
    {GateMode::bypass, "bypass"},
    {GateMode::ungated, "ungated"},
}};

void require(bool ok, const char* what) {
  if (!ok) throw StudentError(what);
}

}  // namespace

void TrustParams::validate() const {
  require(eta > 0.0 && eta <= 1.0, "trust: eta must lie in (0, 1]");
  require(k > 0.0 && std::isfinite(k), "trust: k must be positive");
  require(theta >= 0.0 && std::isfinite(theta), "trust: theta must be non-negative");
  require(v_init >= 0.0 && std::isfinite(v_init), "trust: v_init must be non-negative");
}

void GuidanceParams::validate() const {
  require(lambda_ad >= 0.0 && std::isfinite(lambda_ad), "guidance: lambda_ad must be non-negative");
  require(lambda_pd >= 0.0 && std::isfinite(lambda_pd), "guidance: lambda_pd must be non-negative");
}

std::string to_string(GateMode mode) {
  for (const auto& [m, name] : kGateNames) {
    if (m == mode) return name;
  }
  throw StudentError("unknown gate mode");
}

GateMode parse_gate_mode(const std::string& text) {
  for (const auto& [m, name] : kGateNames) {
    if (text == name) return m;
  }
  throw StudentError("unknown gate mode '" + text + "'");
}

void StudentConfig::validate() const {
  learn.validate();
  trust.validate();
  guide.validate();
  require(omega0 >= 0.0 && omega0 <= 1.0, "student: omega0 must lie in [0, 1]");
  if (gate == GateMode::bypass) {
    require(guide.lambda_ad == 0.0 && guide.lambda_pd == 0.0, "student: bypassed gate requires zero guidance");
  }
}

double VolatilityTracker::value(const ProductState& s, Action a) const {
  auto it = rows_.find(s);
  return it == rows_.end() ? v_init_ : it->second[static_cast<std::size_t>(a)];
}

void VolatilityTracker::set(const ProductState& s, Action a, double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw tabular::InvariantError("volatility must be finite and non-negative");
  auto [it, inserted] = rows_.try_emplace(s);
  if (inserted) it->second.fill(v_init_);
  it->second[static_cast<std::size_t>(a)] = v;
}

double update_volatility(VolatilityTracker& v, const ProductState& s, Action a, double delta, double eta) {
  if (!std::isfinite(delta)) throw tabular::InvariantError("update_volatility: non-finite delta");
  const double next = (1.0 - eta) * v.value(s, a) + eta * std::abs(delta);
  v.set(s, a, next);
  return next;
}

double trust_gate(double v_value, double k, double theta) {
  const double x = k * (v_value - theta);
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

Guidance::Guidance(const TeacherKnowledge& tk)
    : nq_(static_cast<int>(tk.states.size())),
      na_(tk.num_actions),
      q_ad_(static_cast<std::size_t>(nq_ * nq_), 0.0),
      edge_(static_cast<std::size_t>(nq_ * nq_), 0),
      pi_(static_cast<std::size_t>(nq_ * na_), 0.0),
      has_pi_(static_cast<std::size_t>(nq_), 0),
      q_max_ad_(tk.q_max_ad()) {
  for (const auto& [e, v] : tk.q_ad) {
    const auto i = static_cast<std::size_t>(e.first * nq_ + e.second);
    q_ad_[i] = v;
    edge_[i] = 1;
  }
  for (const auto& [q, row] : tk.pi_teacher) {
    has_pi_[static_cast<std::size_t>(q)] = 1;
    std::copy(row.begin(), row.end(), pi_.begin() + q * na_);
  }
}

bool Guidance::has_edge(StateId q, StateId q_next) const {
  if (q < 0 || q >= nq_ || q_next < 0 || q_next >= nq_) return false;
  return edge_[static_cast<std::size_t>(q * nq_ + q_next)] != 0;
}

double Guidance::q_ad(StateId q, StateId q_next) const {
  return has_edge(q, q_next) ? q_ad_[static_cast<std::size_t>(q * nq_ + q_next)] : 0.0;
}

std::span<const double> Guidance::policy(StateId q) const {
  if (q < 0 || q >= nq_ || !has_pi_[static_cast<std::size_t>(q)]) return {};
  return {pi_.data() + q * na_, static_cast<std::size_t>(na_)};
}

double Guidance::strategic_reward(StateId q, StateId q_next, double lambda_ad) {
  if (q == q_next) return 0.0;
  if (!has_edge(q, q_next)) {
    ++novel_;
    return 0.0;
  }
  return lambda_ad * q_ad(q, q_next);
}

double strategic_reward(Guidance& g, StateId q, StateId q_next, double lambda_ad) {
  return g.strategic_reward(q, q_next, lambda_ad);
}

double tactical_gradient(const Guidance& g, StateId q, std::span<const double> q_student_row, Action a,
                         double lambda_pd) {
  const auto pi = g.policy(q);
  if (pi.empty()) return 0.0;
  const auto student = tabular::softmax_policy(q_student_row, 1.0);
  const auto i = static_cast<std::size_t>(a);
  return lambda_pd * (pi[i] - student[i]);
}

double cadent_delta(double omega, double delta_student, double r_ad, double g_pd) {
  return omega * delta_student + (1.0 - omega) * (r_ad + g_pd);
}

double update_bound(const tabular::LearningParams& learn, const GuidanceParams& guide, double r_max,
                    double q_max_ad) {
  if (!(learn.gamma < 1.0)) throw tabular::InvariantError("update_bound: gamma must be below 1");
  return r_max / (1.0 - learn.gamma) + guide.lambda_ad * q_max_ad + 2.0 * guide.lambda_pd;
}

StudentLearner::StudentLearner(StudentConfig cfg, const TeacherKnowledge* knowledge, int num_actions)
    : cfg_(std::move(cfg)), q_(num_actions), v_(cfg_.trust.v_init) {
  cfg_.validate();
  if (cfg_.gate == GateMode::bypass) return;  // never consults the teacher
  if (knowledge == nullptr) throw StudentError("student: teacher knowledge is required unless the gate is bypassed");
  if (knowledge->num_actions != num_actions) throw StudentError("student: knowledge was distilled for another action set");
  guidance_.emplace(*knowledge);
  states_ = knowledge->states;
  alphabet_ = knowledge->alphabet;
}

StepTrace StudentLearner::update(const ProductState& s, Action a, double r, const ProductState& s_next, bool done) {
  StepTrace t;
  t.delta = tabular::td_error(q_, s, a, r, s_next, done, cfg_.learn.gamma);
  if (cfg_.gate == GateMode::bypass) {
    t.update = t.delta;
    tabular::q_update(q_, s, a, t.update, cfg_.learn.alpha);
    return t;
  }

  t.volatility = update_volatility(v_, s, a, t.delta, cfg_.trust.eta);
  switch (cfg_.gate) {
    case GateMode::adaptive: t.omega = trust_gate(t.volatility, cfg_.trust.k, cfg_.trust.theta); break;
    case GateMode::fixed: t.omega = cfg_.omega0; break;
    default: t.omega = 1.0; break;
  }
  t.r_ad = guidance_->strategic_reward(s.q, s_next.q, cfg_.guide.lambda_ad);
  t.g_pd = tactical_gradient(*guidance_, s.q, q_.row(s), a, cfg_.guide.lambda_pd);
  t.update = cfg_.gate == GateMode::ungated ? t.delta + t.r_ad + t.g_pd : cadent_delta(t.omega, t.delta, t.r_ad, t.g_pd);
  tabular::q_update(q_, s, a, t.update, cfg_.learn.alpha);
  return t;
}

void MetricsSink::push(EpisodeRecord r) {
  std::lock_guard lock(mu_);
  records_.push_back(std::move(r));
}

std::vector<EpisodeRecord> MetricsSink::snapshot() const {
  std::lock_guard lock(mu_);
  return records_;
}

TrainReport train_student(const envs::Environment& env, StudentLearner& learner, const TrainOptions& opts,
                          MetricsSink* sink) {
  if (opts.episodes <= 0) throw StudentError("train_student: episode budget must be positive");
  if (learner.q().num_actions() != env.num_actions()) {
    throw StudentError("train_student: learner and environment disagree on the action set");
  }
  const auto& cfg = learner.config();
  double q_max_ad = 0.0;
  if (const Guidance* g = learner.guidance()) {
    if (learner.knowledge_alphabet() != env.dfa().alphabet() || learner.knowledge_states() != env.dfa().state_names()) {
      throw StudentError("train_student: knowledge automaton does not match the " +
                         envs::to_string(env.spec().name) + " automaton");
    }
    q_max_ad = g->q_max_ad();
  }

  TrainReport report;
  const GuidanceParams effective = cfg.gate == GateMode::bypass ? GuidanceParams{0.0, 0.0} : cfg.guide;
  report.bound = update_bound(cfg.learn, effective, env.r_max(), q_max_ad);
  const std::string env_name = envs::to_string(env.spec().name);
  Rng rng(opts.seed);
  std::int64_t cumulative = 0;

  for (int ep = 0; ep < opts.episodes; ++ep) {
    const double eps = cfg.learn.epsilon.at(ep);
    envs::EnvState s = env.reset();
    ProductState ps = env.product(s);
    EpisodeRecord rec{opts.variant, env_name, opts.seed, ep + 1, 0.0, 0, 0, false};
    for (;;) {
      const Action a = tabular::epsilon_greedy(learner.q(), ps, eps, rng);
      const auto out = env.step(s, a);
      const ProductState next = env.product(out.next_state);
      const StepTrace t = learner.update(ps, a, out.reward, next, out.done);

      const double mag = std::abs(t.update);
      if (mag > report.max_abs_update) report.max_abs_update = mag;
      if (opts.assert_bound && mag > report.bound) report.violations.push_back({cumulative, ep + 1, mag});

      ++cumulative;
      ++rec.steps;
      rec.reward += out.reward;
      s = out.next_state;
      ps = next;
      if (out.done) {
        rec.reached_accept = !out.timeout;
        break;
      }
    }
    rec.cumulative_steps = cumulative;
    if (sink != nullptr) sink->push(rec);
    report.records.push_back(std::move(rec));
  }
  report.total_steps = cumulative;
  if (const Guidance* g = learner.guidance()) report.novel_transitions = g->novel_transitions();
  return report;
}

}  // namespace cadent::student
