#include "cadent/config.hpp"

#include <fstream>
#include <set>

#include "cadent/baselines.hpp"
#include "cadent/digest.hpp"

namespace cadent::config {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
std::map<envs::EnvName, T> env_map_from(const json& j, const std::string& where) {
  std::map<envs::EnvName, T> out;
  if (!j.is_object()) throw ConfigError(where + ": expected an object keyed by environment");
  for (const auto& [name, v] : j.items()) out[envs::parse_env_name(name)] = v.template get<T>();
  return out;
}

template <typename T>
json env_map_to(const std::map<envs::EnvName, T>& m) {
  json j = json::object();
  for (const auto& [env, v] : m) j[envs::to_string(env)] = v;
  return j;
}

}  // namespace

json to_json(const student::StudentConfig& c) {
  return {{"alpha", c.learn.alpha},
          {"gamma", c.learn.gamma},
          {"epsilon", {{"start", c.learn.epsilon.start}, {"end", c.learn.epsilon.end}, {"decay", c.learn.epsilon.decay}}},
          {"tau", c.learn.tau},
          {"eta", c.trust.eta},
          {"k", c.trust.k},
          {"theta", c.trust.theta},
          {"v_init", c.trust.v_init},
          {"lambda_ad", c.guide.lambda_ad},
          {"lambda_pd", c.guide.lambda_pd},
          {"gate", student::to_string(c.gate)},
          {"omega0", c.omega0}};
}

student::StudentConfig student_from_json(const json& j, student::StudentConfig base) {
  reject_unknown(j,
                 {"alpha", "gamma", "epsilon", "tau", "eta", "k", "theta", "v_init", "lambda_ad", "lambda_pd", "gate",
                  "omega0"},
                 "hyperparameters");
  try {
    read(j, "alpha", base.learn.alpha);
    read(j, "gamma", base.learn.gamma);
    if (j.contains("epsilon")) {
      const auto& e = j.at("epsilon");
      reject_unknown(e, {"start", "end", "decay"}, "hyperparameters.epsilon");
      read(e, "start", base.learn.epsilon.start);
      read(e, "end", base.learn.epsilon.end);
      read(e, "decay", base.learn.epsilon.decay);
    }
    read(j, "tau", base.learn.tau);
    read(j, "eta", base.trust.eta);
    read(j, "k", base.trust.k);
    read(j, "theta", base.trust.theta);
    read(j, "v_init", base.trust.v_init);
    read(j, "lambda_ad", base.guide.lambda_ad);
    read(j, "lambda_pd", base.guide.lambda_pd);
    if (j.contains("gate")) base.gate = student::parse_gate_mode(j.at("gate").get<std::string>());
    read(j, "omega0", base.omega0);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("hyperparameters: ") + e.what());
  }
  return base;
}

void ExperimentConfig::validate() const {
  if (environments.empty()) throw ConfigError("config: no environments listed");
  if (variants.empty()) throw ConfigError("config: no variants listed");
  if (seeds.empty()) throw ConfigError("config: seeds must be non-empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("config: seeds must be distinct");
  }
  try {
    for (const auto& v : variants) baselines::parse_preset(v);
    for (const auto& [v, _] : gate) baselines::parse_preset(v);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (auto env : environments) {
    if (episodes_for(env) <= 0) throw ConfigError("config: episodes for " + envs::to_string(env) + " must be positive");
    const std::string src = teacher_source(env);
    if (src != kTrainInline && !std::ifstream(src)) {
      throw ConfigError("config: knowledge file '" + src + "' for " + envs::to_string(env) + " does not exist");
    }
  }
  if (teacher.episodes <= 0) throw ConfigError("config: teacher episodes must be positive");
  if (!(threshold_fraction > 0.0 && threshold_fraction <= 1.0)) {
    throw ConfigError("config: threshold_fraction must lie in (0, 1]");
  }
  if (threshold_window < 1 || final_window < 1) throw ConfigError("config: windows must be at least 1");
  try {
    hyperparameters.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

int ExperimentConfig::episodes_for(envs::EnvName env) const {
  auto it = episodes.find(env);
  if (it != episodes.end()) return it->second;
  return env == envs::EnvName::mountain_car_collection || env == envs::EnvName::warehouse_robotics ? 3000 : 1500;
}

std::string ExperimentConfig::teacher_source(envs::EnvName env) const {
  auto it = teacher.source.find(env);
  return it == teacher.source.end() ? kTrainInline : it->second;
}

json ExperimentConfig::to_json() const {
  json j;
  json envs_j = json::array();
  for (auto e : environments) envs_j.push_back(envs::to_string(e));
  j["environments"] = envs_j;
  j["variants"] = variants;
  j["seeds"] = seeds;
  j["episodes"] = env_map_to(episodes);
  j["layout_seed"] = layout_seed;
  j["teacher"] = {{"episodes", teacher.episodes},
                  {"seed", teacher.seed},
                  {"aggregation", teacher::to_string(teacher.aggregation)},
                  {"source", env_map_to(teacher.source)}};
  j["hyperparameters"] = config::to_json(hyperparameters);
  json gates = json::object();
  for (const auto& [v, on] : gate) gates[v] = on ? "on" : "off";
  j["gate"] = gates;
  j["output_dir"] = output_dir;
  j["reward_threshold"] = env_map_to(reward_threshold);
  j["threshold_fraction"] = threshold_fraction;
  j["threshold_window"] = threshold_window;
  j["final_window"] = final_window;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"environments", "variants", "seeds", "episodes", "layout_seed", "teacher", "hyperparameters", "gate",
                  "output_dir", "reward_threshold", "threshold_fraction", "threshold_window", "final_window"},
                 "config");
  ExperimentConfig c = default_config();
  try {
    if (j.contains("environments")) {
      c.environments.clear();
      for (const auto& e : j.at("environments")) c.environments.push_back(envs::parse_env_name(e.get<std::string>()));
    }
    read(j, "variants", c.variants);
    read(j, "seeds", c.seeds);
    if (j.contains("episodes")) c.episodes = env_map_from<int>(j.at("episodes"), "episodes");
    read(j, "layout_seed", c.layout_seed);
    if (j.contains("teacher")) {
      const auto& t = j.at("teacher");
      reject_unknown(t, {"episodes", "seed", "aggregation", "source"}, "teacher");
      read(t, "episodes", c.teacher.episodes);
      read(t, "seed", c.teacher.seed);
      if (t.contains("aggregation")) c.teacher.aggregation = teacher::parse_aggregation(t.at("aggregation"));
      if (t.contains("source")) c.teacher.source = env_map_from<std::string>(t.at("source"), "teacher.source");
    }
    if (j.contains("hyperparameters")) c.hyperparameters = student_from_json(j.at("hyperparameters"), c.hyperparameters);
    if (j.contains("gate")) {
      c.gate.clear();
      for (const auto& [v, flag] : j.at("gate").items()) {
        const auto text = flag.get<std::string>();
        if (text != "on" && text != "off") throw ConfigError("gate." + v + ": expected 'on' or 'off'");
        c.gate[v] = text == "on";
      }
    }
    read(j, "output_dir", c.output_dir);
    if (j.contains("reward_threshold")) {
      c.reward_threshold = env_map_from<double>(j.at("reward_threshold"), "reward_threshold");
    }
    read(j, "threshold_fraction", c.threshold_fraction);
    read(j, "threshold_window", c.threshold_window);
    read(j, "final_window", c.final_window);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const envs::EnvError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const teacher::TeacherError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const student::StudentError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

std::string ExperimentConfig::hash() const {
  json j = to_json();
  j.erase("output_dir");
  return fnv1a_hex(j.dump());
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.environments.assign(envs::kAllEnvs.begin(), envs::kAllEnvs.end());
  c.variants = {"cadent", "ad", "pd", "no_transfer", "no_trust_gate"};
  c.seeds = {0, 1, 2, 3, 4};
  for (auto env : envs::kAllEnvs) c.episodes[env] = c.episodes_for(env);
  return c;
}

}  // namespace cadent::config
