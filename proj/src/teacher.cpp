#include "cadent/teacher.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace cadent::teacher {

namespace {

constexpr double kRowTolerance = 1e-9;

std::string edge_name(const automaton::Dfa& dfa, const Edge& e) {
  return dfa.state_name(e.first) + "->" + dfa.state_name(e.second);
}

StateId index_of(const std::vector<std::string>& names, const std::string& name, const char* what) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<StateId>(i);
  }
  throw TeacherError(std::string("knowledge: unknown ") + what + " '" + name + "'");
}

}  // namespace

TeacherRun train_teacher(const envs::Environment& env, const tabular::LearningParams& params, int episodes,
                         std::uint64_t seed) {
  params.validate();
  const std::string name = envs::to_string(env.spec().name);
  if (env.spec().variant != envs::Variant::source) {
    throw TeacherError("train_teacher: " + name + " teacher must be trained on the source variant");
  }
  if (episodes < 0) throw TeacherError("train_teacher: negative episode budget");

  const int na = env.num_actions();
  TeacherRun run;
  run.q = QTable(na);
  run.episodes = episodes;
  std::unordered_map<ProductState, std::vector<std::uint64_t>> visits;
  Rng rng(seed);

  for (int ep = 0; ep < episodes; ++ep) {
    const double eps = params.epsilon.at(ep);
    envs::EnvState s = env.reset();
    ProductState ps = env.product(s);
    for (;;) {
      const Action a = tabular::epsilon_greedy(run.q, ps, eps, rng);
      const envs::StepOutcome out = env.step(s, a);
      const ProductState next = env.product(out.next_state);
      auto& counts = visits[ps];
      if (counts.empty()) counts.assign(static_cast<std::size_t>(na), 0);
      ++counts[static_cast<std::size_t>(a)];
      if (next.q != ps.q) run.transitions[{ps.q, next.q}].insert({ps, a});

      const double delta = tabular::td_error(run.q, ps, a, out.reward, next, out.done, params.gamma);
      tabular::q_update(run.q, ps, a, delta, params.alpha);

      s = out.next_state;
      ps = next;
      if (out.done) {
        if (!out.timeout) ++run.successes;
        break;
      }
    }
  }
  if (run.successes == 0) {
    throw TeacherError("train_teacher: no episode reached acceptance on " + name + " (" + std::to_string(episodes) +
                       " episodes)");
  }
  run.visits.insert(visits.begin(), visits.end());
  return run;
}

std::map<Edge, double> distill_automaton_values(const QTable& q_teacher, const automaton::Dfa& dfa,
                                                const TransitionLog& transitions) {
  std::map<Edge, double> out;
  for (const auto& [edge, triggers] : transitions) {
    if (triggers.empty()) continue;
    double sum = 0.0;
    for (const auto& [s, a] : triggers) sum += q_teacher.value(s, a);
    out[edge] = sum / static_cast<double>(triggers.size());
  }
  std::string missing;
  for (const Edge& e : dfa.accepting_path_edges()) {
    if (!out.contains(e)) missing += (missing.empty() ? "" : ", ") + edge_name(dfa, e);
  }
  if (!missing.empty()) throw TeacherError("distill_automaton_values: teacher never triggered " + missing);
  return out;
}

std::string to_string(PolicyAggregation mode) {
  return mode == PolicyAggregation::visitation_weighted ? "visitation_weighted" : "unweighted";
}

PolicyAggregation parse_aggregation(const std::string& text) {
  if (text == "visitation_weighted") return PolicyAggregation::visitation_weighted;
  if (text == "unweighted") return PolicyAggregation::unweighted;
  throw TeacherError("unknown policy aggregation '" + text + "'");
}

std::map<StateId, std::vector<double>> distill_teacher_policy(const QTable& q_teacher, const VisitationLog& visits,
                                                              const automaton::Dfa& dfa, double tau,
                                                              PolicyAggregation mode) {
  const auto na = static_cast<std::size_t>(q_teacher.num_actions());
  std::map<StateId, std::vector<double>> sums;
  std::map<StateId, double> weights;
  for (const auto& [s, counts] : visits) {
    std::uint64_t n = 0;
    for (auto c : counts) n += c;
    if (n == 0) continue;
    const double w = mode == PolicyAggregation::visitation_weighted ? static_cast<double>(n) : 1.0;
    auto& acc = sums[s.q];
    if (acc.empty()) acc.assign(na, 0.0);
    const auto row = q_teacher.row(s);
    for (std::size_t a = 0; a < na; ++a) acc[a] += w * row[a];
    weights[s.q] += w;
  }

  std::string missing;
  for (StateId q : dfa.accepting_path_states()) {
    if (!sums.contains(q)) missing += (missing.empty() ? "" : ", ") + dfa.state_name(q);
  }
  if (!missing.empty()) throw TeacherError("distill_teacher_policy: no visits recorded in " + missing);

  std::map<StateId, std::vector<double>> out;
  for (auto& [q, acc] : sums) {
    for (auto& x : acc) x /= weights[q];
    out[q] = tabular::softmax_policy(acc, tau);
  }
  return out;
}

double TeacherKnowledge::q_max_ad() const {
  double m = 0.0;
  for (const auto& [_, v] : q_ad) m = std::max(m, std::abs(v));
  return m;
}

void TeacherKnowledge::validate() const {
  if (provenance.env.empty() || provenance.spec_hash.empty()) throw TeacherError("knowledge: missing provenance");
  if (!(tau > 0.0)) throw TeacherError("knowledge: tau must be positive");
  if (num_actions < 1 || num_actions > tabular::kMaxActions) throw TeacherError("knowledge: bad action count");
  const auto nq = static_cast<StateId>(states.size());
  for (const auto& [e, v] : q_ad) {
    if (e.first < 0 || e.first >= nq || e.second < 0 || e.second >= nq || e.first == e.second) {
      throw TeacherError("knowledge: q_ad key is not an automaton edge");
    }
    if (!std::isfinite(v)) throw TeacherError("knowledge: non-finite q_ad value");
  }
  for (const auto& [q, row] : pi_teacher) {
    if (q < 0 || q >= nq) throw TeacherError("knowledge: policy row for unknown automaton state");
    if (row.size() != static_cast<std::size_t>(num_actions)) {
      throw TeacherError("knowledge: policy row for '" + states[static_cast<std::size_t>(q)] + "' has wrong length");
    }
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw TeacherError("knowledge: negative or non-finite probability in '" +
                           states[static_cast<std::size_t>(q)] + "'");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowTolerance) {
      std::ostringstream msg;
      msg << "knowledge: policy row for '" << states[static_cast<std::size_t>(q)] << "' sums to " << sum;
      throw TeacherError(msg.str());
    }
  }
}

nlohmann::json TeacherKnowledge::to_json() const {
  nlohmann::json j;
  j["version"] = kVersion;
  j["provenance"] = {{"env", provenance.env},
                     {"spec_hash", provenance.spec_hash},
                     {"episodes", provenance.episodes},
                     {"seed", provenance.seed}};
  j["states"] = states;
  j["alphabet"] = alphabet;
  j["num_actions"] = num_actions;
  j["tau"] = tau;
  auto& edges = j["q_ad"] = nlohmann::json::array();
  for (const auto& [e, v] : q_ad) {
    edges.push_back({{"from", states.at(static_cast<std::size_t>(e.first))},
                     {"to", states.at(static_cast<std::size_t>(e.second))},
                     {"value", v}});
  }
  auto& pi = j["pi_teacher"] = nlohmann::json::object();
  for (const auto& [q, row] : pi_teacher) pi[states.at(static_cast<std::size_t>(q))] = row;
  return j;
}

TeacherKnowledge TeacherKnowledge::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("version")) throw TeacherError("knowledge: missing version header");
  TeacherKnowledge tk;
  try {
    const int version = j.at("version").get<int>();
    if (version != kVersion) {
      throw TeacherError("knowledge: unsupported version " + std::to_string(version) + " (expected " +
                         std::to_string(kVersion) + ")");
    }
    const auto& p = j.at("provenance");
    tk.provenance = {p.at("env").get<std::string>(), p.at("spec_hash").get<std::string>(),
                     p.at("episodes").get<int>(), p.at("seed").get<std::uint64_t>()};
    tk.states = j.at("states").get<std::vector<std::string>>();
    tk.alphabet = j.at("alphabet").get<std::vector<std::string>>();
    tk.num_actions = j.at("num_actions").get<int>();
    tk.tau = j.at("tau").get<double>();
    for (const auto& e : j.at("q_ad")) {
      const Edge edge{index_of(tk.states, e.at("from").get<std::string>(), "automaton state"),
                      index_of(tk.states, e.at("to").get<std::string>(), "automaton state")};
      tk.q_ad[edge] = e.at("value").get<double>();
    }
    for (const auto& [name, row] : j.at("pi_teacher").items()) {
      tk.pi_teacher[index_of(tk.states, name, "automaton state")] = row.get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw TeacherError(std::string("knowledge: corrupted document: ") + e.what());
  }
  tk.validate();
  return tk;
}

TeacherKnowledge distill(const envs::Environment& source, const TeacherRun& run, double tau, std::uint64_t seed,
                         PolicyAggregation mode) {
  const auto& dfa = source.dfa();
  TeacherKnowledge tk;
  tk.states = dfa.state_names();
  tk.alphabet = dfa.alphabet();
  tk.num_actions = source.num_actions();
  tk.tau = tau;
  tk.q_ad = distill_automaton_values(run.q, dfa, run.transitions);
  tk.pi_teacher = distill_teacher_policy(run.q, run.visits, dfa, tau, mode);
  tk.provenance = {envs::to_string(source.spec().name), source.spec().hash(), run.episodes, seed};
  tk.validate();
  return tk;
}

void save_knowledge(const TeacherKnowledge& tk, const std::string& path) {
  tk.validate();
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path);
  if (!out) throw TeacherError("save_knowledge: cannot open '" + path + "' for writing");
  out << tk.to_json().dump(2) << '\n';
  if (!out) throw TeacherError("save_knowledge: write to '" + path + "' failed");
}

TeacherKnowledge load_knowledge(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw TeacherError("load_knowledge: cannot open '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw TeacherError("load_knowledge: corrupted file '" + path + "': " + e.what());
  }
  return TeacherKnowledge::from_json(j);
}

envs::Rollout greedy_rollout(const envs::Environment& env, const QTable& q) {
  envs::Rollout r;
  envs::EnvState s = env.reset();
  for (;;) {
    const Action a = tabular::argmax(q.row(env.product(s)));
    const auto out = env.step(s, a);
    ++r.steps;
    r.total_reward += out.reward;
    s = out.next_state;
    if (out.done) {
      r.accepted = !out.timeout;
      return r;
    }
  }
}

}  // namespace cadent::teacher
