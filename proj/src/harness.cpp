#include "cadent/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "cadent/baselines.hpp"
#include "cadent/teacher.hpp"

namespace cadent::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double metric_value(const EpisodeRecord& r, Metric m) {
  return m == Metric::steps ? static_cast<double>(r.steps) : r.reward;
}

AggregatePoint summarize_point(double x, const std::vector<double>& values) {
  AggregatePoint p;
  p.x = x;
  p.n = static_cast<int>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  p.mean = sum / p.n;
  if (p.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - p.mean) * (v - p.mean);
    p.stderr_ = std::sqrt(ss / (p.n - 1)) / std::sqrt(static_cast<double>(p.n));
  }
  return p;
}

json mean_stderr(const std::vector<double>& values) {
  if (values.empty()) return json{{"mean", nullptr}, {"stderr", nullptr}, {"n", 0}};
  const auto p = summarize_point(0.0, values);
  return json{{"mean", p.mean}, {"stderr", p.stderr_}, {"n", p.n}};
}

std::string run_name(const Cell& c) {
  return envs::to_string(c.env) + "__" + c.variant + "__seed" + std::to_string(c.seed);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw HarnessError("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw HarnessError("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw HarnessError("write to '" + path.string() + "' failed");
}

// Cells grouped by (env, variant), in the config's environment order.
std::map<std::pair<envs::EnvName, std::string>, std::vector<const CellResult*>> group(
    const std::vector<CellResult>& cells) {
  std::map<std::pair<envs::EnvName, std::string>, std::vector<const CellResult*>> out;
  for (const auto& c : cells) {
    if (!c.error) out[{c.cell.env, c.cell.variant}].push_back(&c);
  }
  return out;
}

struct TeacherEntry {
  std::optional<teacher::TeacherKnowledge> knowledge;
  std::optional<std::string> error;
  json info;
};

TeacherEntry prepare_teacher(const config::ExperimentConfig& cfg, envs::EnvName env) {
  TeacherEntry t;
  const std::string src = cfg.teacher_source(env);
  try {
    if (src != config::kTrainInline) {
      t.knowledge = teacher::load_knowledge(src);
      t.info = {{"source", src}, {"provenance", t.knowledge->to_json().at("provenance")}};
      return t;
    }
    auto source = envs::make_env(envs::default_spec(env, envs::Variant::source, cfg.layout_seed));
    auto run = teacher::train_teacher(*source, cfg.hyperparameters.learn, cfg.teacher.episodes, cfg.teacher.seed);
    t.knowledge = teacher::distill(*source, run, cfg.hyperparameters.learn.tau, cfg.teacher.seed, cfg.teacher.aggregation);
    const auto greedy = teacher::greedy_rollout(*source, run.q);
    t.info = {{"source", config::kTrainInline},
              {"successful_episodes", run.successes},
              {"greedy_steps", greedy.steps},
              {"greedy_accepts", greedy.accepted},
              {"golden_steps", envs::golden_trajectory(*source).size()},
              {"provenance", t.knowledge->to_json().at("provenance")}};
  } catch (const std::exception& e) {
    t.error = e.what();
  }
  return t;
}

}  // namespace

bool CellFilter::accepts(envs::EnvName env, const std::string& variant) const {
  return (envs.empty() || envs.contains(env)) && (variants.empty() || variants.contains(variant));
}

CellFilter CellFilter::parse(const std::string& text) {
  CellFilter f;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw HarnessError("--only: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "env") {
      f.envs.insert(envs::parse_env_name(value));
    } else if (key == "variant") {
      f.variants.insert(baselines::to_string(baselines::parse_preset(value)));
    } else {
      throw HarnessError("--only: unknown key '" + key + "' (expected env or variant)");
    }
  }
  return f;
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::reward: return "reward";
    case Metric::steps: return "steps";
    case Metric::reward_vs_steps: return "reward_vs_steps";
  }
  throw HarnessError("unknown metric");
}

std::vector<AggregatePoint> aggregate(const std::vector<std::vector<EpisodeRecord>>& streams, Metric metric) {
  if (metric == Metric::reward_vs_steps) return aggregate_by_steps(streams);
  if (streams.empty()) throw HarnessError("aggregate: no streams");
  const std::size_t len = streams.front().size();
  for (const auto& s : streams) {
    if (s.size() != len) throw HarnessError("aggregate: episode streams differ in length");
  }
  std::vector<AggregatePoint> out;
  out.reserve(len);
  std::vector<double> values(streams.size());
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t k = 0; k < streams.size(); ++k) values[k] = metric_value(streams[k][i], metric);
    out.push_back(summarize_point(static_cast<double>(streams.front()[i].episode), values));
  }
  return out;
}

std::vector<AggregatePoint> aggregate_by_steps(const std::vector<std::vector<EpisodeRecord>>& streams, int points) {
  if (streams.empty()) throw HarnessError("aggregate: no streams");
  if (points < 2) throw HarnessError("aggregate: need at least two grid points");
  std::int64_t horizon = -1;
  for (const auto& s : streams) {
    if (s.empty()) throw HarnessError("aggregate: empty stream");
    horizon = horizon < 0 ? s.back().cumulative_steps : std::min(horizon, s.back().cumulative_steps);
  }
  std::vector<AggregatePoint> out;
  out.reserve(static_cast<std::size_t>(points));
  std::vector<std::size_t> cursor(streams.size(), 0);
  std::vector<double> values(streams.size());
  for (int i = 0; i < points; ++i) {
    const double x = static_cast<double>(horizon) * i / (points - 1);
    for (std::size_t k = 0; k < streams.size(); ++k) {
      const auto& s = streams[k];
      auto& c = cursor[k];
      while (c + 1 < s.size() && static_cast<double>(s[c + 1].cumulative_steps) <= x) ++c;
      // Before the first episode ends there is no observation yet; use it anyway.
      values[k] = s[c].reward;
    }
    out.push_back(summarize_point(x, values));
  }
  return out;
}

std::optional<std::int64_t> steps_to_threshold(const std::vector<EpisodeRecord>& records, double threshold,
                                               int window) {
  if (window < 1) throw HarnessError("steps_to_threshold: window must be at least 1");
  const auto w = static_cast<std::size_t>(window);
  double sum = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    sum += records[i].reward;
    if (i >= w) sum -= records[i - w].reward;
    if (i + 1 < w) continue;
    // Recompute the window exactly so rounding drift never flips a comparison.
    double exact = 0.0;
    for (std::size_t j = i + 1 - w; j <= i; ++j) exact += records[j].reward;
    sum = exact;
    if (exact / window >= threshold) return records[i].cumulative_steps;
  }
  return std::nullopt;
}

double final_mean(const std::vector<EpisodeRecord>& records, int window) {
  if (records.empty()) return 0.0;
  const std::size_t n = std::min(records.size(), static_cast<std::size_t>(window));
  double sum = 0.0;
  for (std::size_t i = records.size() - n; i < records.size(); ++i) sum += records[i].reward;
  return sum / static_cast<double>(n);
}

bool ExperimentResult::ok() const {
  return std::none_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.error.has_value(); });
}

fs::path resolve_output_dir(const config::ExperimentConfig& cfg) {
  if (const char* env = std::getenv("CADENT_OUT"); env != nullptr && *env != '\0') return env;
  return cfg.output_dir;
}

ExperimentResult run_experiment(const config::ExperimentConfig& cfg, int parallel, const CellFilter& filter,
                                std::ostream* log) {
  cfg.validate();
  std::mutex log_mu;
  auto say = [&](const std::string& line) {
    if (log == nullptr) return;
    std::lock_guard lock(log_mu);
    *log << line << '\n' << std::flush;
  };

  std::vector<Cell> cells;
  std::map<envs::EnvName, TeacherEntry> teachers;
  for (auto env : cfg.environments) {
    for (const auto& v : cfg.variants) {
      const std::string variant = baselines::to_string(baselines::parse_preset(v));
      if (!filter.accepts(env, variant)) continue;
      for (auto seed : cfg.seeds) cells.push_back({env, variant, seed});
      if (baselines::needs_knowledge(baselines::parse_preset(variant)) && !teachers.contains(env)) {
        say("teacher " + envs::to_string(env) + ": preparing");
        teachers[env] = prepare_teacher(cfg, env);
        if (teachers[env].error) say("teacher " + envs::to_string(env) + ": FAILED " + *teachers[env].error);
      }
    }
  }

  std::vector<CellResult> results(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const Cell& c = cells[i];
      CellResult& out = results[i];
      out.cell = c;
      try {
        const auto preset = baselines::parse_preset(c.variant);
        const teacher::TeacherKnowledge* tk = nullptr;
        if (baselines::needs_knowledge(preset)) {
          const auto& t = teachers.at(c.env);
          if (t.error) throw HarnessError("teacher unavailable: " + *t.error);
          tk = &*t.knowledge;
        }
        auto it = cfg.gate.find(c.variant);
        const bool gated = it == cfg.gate.end() || it->second;
        auto scfg = baselines::resolve_preset(c.variant, cfg.hyperparameters, gated);
        auto env = envs::make_env(envs::default_spec(c.env, envs::Variant::target, cfg.layout_seed));
        student::StudentLearner learner(scfg, tk, env->num_actions());
        student::TrainOptions opts{c.variant, c.seed, cfg.episodes_for(c.env), false};
        out.records = student::train_student(*env, learner, opts).records;
        say("cell " + run_name(c) + ": done");
      } catch (const std::exception& e) {
        out.error = e.what();
        say("cell " + run_name(c) + ": FAILED " + e.what());
      }
    }
  };
  const int threads = std::max(1, std::min<int>(parallel, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::sort(results.begin(), results.end(), [&](const CellResult& a, const CellResult& b) {
    return std::tie(a.cell.env, a.cell.variant, a.cell.seed) < std::tie(b.cell.env, b.cell.variant, b.cell.seed);
  });

  ExperimentResult er;
  er.cells = std::move(results);
  er.summary = summarize(cfg, er.cells);
  json tjson = json::object();
  for (const auto& [env, t] : teachers) {
    tjson[envs::to_string(env)] = t.error ? json{{"error", *t.error}} : t.info;
  }
  er.summary["teachers"] = tjson;
  er.output_dir = resolve_output_dir(cfg);
  write_outputs(er.output_dir, er.cells, er.summary);
  for (const auto& [env, t] : teachers) {
    if (!t.knowledge) continue;
    ensure_dir(er.output_dir / "teachers");
    teacher::save_knowledge(*t.knowledge, (er.output_dir / "teachers" / (envs::to_string(env) + ".json")).string());
  }
  return er;
}

json summarize(const config::ExperimentConfig& cfg, const std::vector<CellResult>& cells) {
  json summary;
  json cfg_echo = cfg.to_json();
  cfg_echo.erase("output_dir");
  summary["config_hash"] = cfg.hash();
  summary["config"] = cfg_echo;

  const auto groups = group(cells);
  json envs_j = json::object();
  int cadent_first = 0;
  for (auto env : cfg.environments) {
    const std::string name = envs::to_string(env);
    std::map<std::string, std::vector<std::vector<EpisodeRecord>>> streams;
    for (const auto& [key, list] : groups) {
      if (key.first != env) continue;
      for (const auto* c : list) streams[key.second].push_back(c->records);
    }
    if (streams.empty()) continue;

    auto probe = envs::make_env(envs::default_spec(env, envs::Variant::target, cfg.layout_seed));
    const double lo = probe->min_return();
    const double hi = probe->max_return();
    json e;
    e["normalization"] = {{"min", lo}, {"max", hi}};

    std::optional<double> threshold;
    std::string threshold_source = "unavailable";
    if (auto it = cfg.reward_threshold.find(env); it != cfg.reward_threshold.end()) {
      threshold = it->second;
      threshold_source = "configured";
    } else if (auto nt = streams.find("no_transfer"); nt != streams.end()) {
      double sum = 0.0;
      for (const auto& s : nt->second) sum += final_mean(s, cfg.final_window);
      threshold = cfg.threshold_fraction * sum / static_cast<double>(nt->second.size());
      threshold_source = "no_transfer_final";
    }
    e["threshold"] = {{"value", threshold ? json(*threshold) : json(nullptr)},
                      {"source", threshold_source},
                      {"window", cfg.threshold_window}};

    json variants = json::object();
    std::vector<std::pair<double, std::string>> ranking;
    for (const auto& [variant, list] : streams) {
      json v;
      std::vector<double> finals;
      for (const auto& s : list) finals.push_back(final_mean(s, cfg.final_window));
      json fin = mean_stderr(finals);
      fin["normalized_mean"] = hi > lo ? (fin["mean"].get<double>() - lo) / (hi - lo) : 0.0;
      fin["window"] = cfg.final_window;
      v["final"] = fin;
      v["seeds"] = list.size();
      if (threshold) {
        json per_seed = json::array();
        std::vector<double> values;
        int reached = 0;
        for (const auto& s : list) {
          const auto hit = steps_to_threshold(s, *threshold, cfg.threshold_window);
          per_seed.push_back(hit ? json(*hit) : json(nullptr));
          // A seed that never reaches the threshold counts with its full budget.
          values.push_back(static_cast<double>(hit ? *hit : s.back().cumulative_steps));
          reached += hit ? 1 : 0;
        }
        json stt = mean_stderr(values);
        stt["per_seed"] = per_seed;
        stt["reached"] = reached;
        v["steps_to_threshold"] = stt;
        ranking.emplace_back(stt["mean"].get<double>(), variant);
      } else {
        v["steps_to_threshold"] = nullptr;
      }
      variants[variant] = v;
    }
    e["variants"] = variants;
    std::sort(ranking.begin(), ranking.end());
    json rank = json::array();
    for (const auto& [_, variant] : ranking) rank.push_back(variant);
    e["ranking"] = rank;
    if (!ranking.empty() && ranking.front().second == "cadent") ++cadent_first;
    envs_j[name] = e;
  }
  summary["environments"] = envs_j;
  summary["cadent_first_on_steps_to_threshold"] = cadent_first;

  json failures = json::array();
  for (const auto& c : cells) {
    if (c.error) {
      failures.push_back(
          {{"env", envs::to_string(c.cell.env)}, {"variant", c.cell.variant}, {"seed", c.cell.seed}, {"error", *c.error}});
    }
  }
  summary["failures"] = failures;
  return summary;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw HarnessError("format_double: conversion failed");
  return std::string(buf, end);
}

void write_run_csv(const fs::path& path, const std::vector<EpisodeRecord>& records) {
  auto out = open_out(path);
  out << kRunHeader << '\n';
  for (const auto& r : records) {
    out << r.variant << ',' << r.env << ',' << r.seed << ',' << r.episode << ',' << format_double(r.reward) << ','
        << r.steps << ',' << r.cumulative_steps << ',' << (r.reached_accept ? 1 : 0) << '\n';
  }
  finish(out, path);
}

std::vector<EpisodeRecord> read_run_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kRunHeader) throw HarnessError("'" + path.string() + "': bad header");
  std::vector<EpisodeRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 8) throw HarnessError("'" + path.string() + "' line " + std::to_string(lineno) + ": expected 8 fields");
    EpisodeRecord r;
    r.variant = f[0];
    r.env = f[1];
    try {
      r.seed = std::stoull(f[2]);
      r.episode = std::stoi(f[3]);
      r.reward = std::strtod(f[4].c_str(), nullptr);
      r.steps = std::stoi(f[5]);
      r.cumulative_steps = std::stoll(f[6]);
    } catch (const std::exception&) {
      throw HarnessError("'" + path.string() + "' line " + std::to_string(lineno) + ": malformed number");
    }
    r.reached_accept = f[7] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

void write_aggregate_csv(const fs::path& path, const std::vector<AggregatePoint>& curve) {
  auto out = open_out(path);
  out << kAggregateHeader << '\n';
  for (const auto& p : curve) {
    out << format_double(p.x) << ',' << format_double(p.mean) << ',' << format_double(p.stderr_) << ',' << p.n << '\n';
  }
  finish(out, path);
}

void write_outputs(const fs::path& dir, const std::vector<CellResult>& cells, const json& summary) {
  ensure_dir(dir / "runs");
  ensure_dir(dir / "aggregates");
  for (const auto& c : cells) {
    if (!c.error) write_run_csv(dir / "runs" / (run_name(c.cell) + ".csv"), c.records);
  }
  for (const auto& [key, list] : group(cells)) {
    std::vector<std::vector<EpisodeRecord>> streams;
    for (const auto* c : list) streams.push_back(c->records);
    const std::string stem = envs::to_string(key.first) + "__" + key.second + "__";
    for (Metric m : {Metric::reward, Metric::steps, Metric::reward_vs_steps}) {
      write_aggregate_csv(dir / "aggregates" / (stem + to_string(m) + ".csv"), aggregate(streams, m));
    }
  }
  const fs::path path = dir / "summary.json";
  auto out = open_out(path);
  out << summary.dump(2) << '\n';
  finish(out, path);
}

}  // namespace cadent::harness
