// cadent: command-line front end for teacher training, student training and
// full experiment grids.

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "cadent/baselines.hpp"
#include "cadent/config.hpp"
#include "cadent/harness.hpp"
#include "cadent/student.hpp"
#include "cadent/teacher.hpp"

namespace fs = std::filesystem;
using namespace cadent;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const auto v = std::stoull(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad seed '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("--seeds: at least one seed is required");
  return out;
}

struct TeacherArgs {
  std::string env;
  int episodes = 5000;
  std::uint64_t seed = 0;
  std::uint64_t layout_seed = 0;
  std::string out;
  std::string qtable;
  std::string aggregation = "visitation_weighted";
  std::string config;
  bool dump_layout = false;
};

int run_train_teacher(const TeacherArgs& a) {
  const auto name = envs::parse_env_name(a.env);
  auto hyper = config::default_config().hyperparameters;
  if (!a.config.empty()) hyper = config::ExperimentConfig::load(a.config).hyperparameters;
  auto env = envs::make_env(envs::default_spec(name, envs::Variant::source, a.layout_seed));
  if (a.dump_layout) std::cout << env->dump_layout();

  auto run = teacher::train_teacher(*env, hyper.learn, a.episodes, a.seed);
  auto tk = teacher::distill(*env, run, hyper.learn.tau, a.seed, teacher::parse_aggregation(a.aggregation));
  teacher::save_knowledge(tk, a.out);
  if (!a.qtable.empty()) run.q.save(a.qtable);

  const auto greedy = teacher::greedy_rollout(*env, run.q);
  const auto golden = envs::golden_trajectory(*env);
  std::cout << "teacher " << a.env << ": " << run.successes << "/" << run.episodes << " successful episodes\n"
            << "greedy rollout: " << greedy.steps << " steps, " << (greedy.accepted ? "accepted" : "not accepted")
            << " (golden trajectory " << golden.size() << " steps)\n"
            << "knowledge written to " << a.out << '\n';
  return greedy.accepted ? 0 : 2;
}

struct StudentArgs {
  std::string env;
  std::string variant = "cadent";
  std::string knowledge;
  int episodes = 0;
  std::string seeds = "0";
  std::string config;
  std::string out = "student_out";
  std::uint64_t layout_seed = 0;
  bool assert_bound = false;
  bool dump_layout = false;
};

int run_train_student(const StudentArgs& a) {
  const auto name = envs::parse_env_name(a.env);
  auto cfg = config::default_config();
  if (!a.config.empty()) cfg = config::ExperimentConfig::load(a.config);
  const auto preset = baselines::parse_preset(a.variant);
  const std::string variant = baselines::to_string(preset);
  auto gate_it = cfg.gate.find(variant);
  const auto scfg =
      baselines::resolve_preset(variant, cfg.hyperparameters, gate_it == cfg.gate.end() || gate_it->second);

  std::optional<teacher::TeacherKnowledge> tk;
  if (baselines::needs_knowledge(preset)) {
    if (a.knowledge.empty()) throw std::invalid_argument("--knowledge is required for variant " + variant);
    tk = teacher::load_knowledge(a.knowledge);
  }
  auto env = envs::make_env(envs::default_spec(name, envs::Variant::target, a.layout_seed));
  if (a.dump_layout) std::cout << env->dump_layout();
  const int episodes = a.episodes > 0 ? a.episodes : cfg.episodes_for(name);

  fs::create_directories(a.out);
  std::size_t total_violations = 0;
  for (auto seed : parse_seeds(a.seeds)) {
    student::StudentLearner learner(scfg, tk ? &*tk : nullptr, env->num_actions());
    student::TrainOptions opts{variant, seed, episodes, a.assert_bound};
    const auto report = student::train_student(*env, learner, opts);
    const fs::path csv = fs::path(a.out) / (a.env + "__" + variant + "__seed" + std::to_string(seed) + ".csv");
    harness::write_run_csv(csv, report.records);
    std::cout << "seed " << seed << ": " << episodes << " episodes, " << report.total_steps << " steps, final mean "
              << harness::final_mean(report.records, cfg.final_window) << ", novel transitions "
              << report.novel_transitions << " -> " << csv.string() << '\n';
    if (a.assert_bound) {
      std::cout << "  update bound " << report.bound << ", max |dQ| " << report.max_abs_update << ", violations "
                << report.violations.size() << '\n';
      for (const auto& v : report.violations) {
        std::cout << "  violation at step " << v.step << " (episode " << v.episode << "): |dQ| = " << v.magnitude
                  << '\n';
      }
      total_violations += report.violations.size();
    }
  }
  return total_violations == 0 ? 0 : 3;
}

struct ExperimentArgs {
  std::string config;
  int parallel = 1;
  std::string only;
  bool dump_default = false;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  if (a.dump_default) {
    std::cout << config::default_config().to_json().dump(2) << '\n';
    return 0;
  }
  const auto cfg = a.config.empty() ? config::default_config() : config::ExperimentConfig::load(a.config);
  const auto filter = harness::CellFilter::parse(a.only);
  const auto result = harness::run_experiment(cfg, a.parallel, filter, &std::cerr);
  std::cout << "outputs written to " << result.output_dir.string() << '\n';
  const auto& failures = result.summary.at("failures");
  if (!failures.empty()) {
    std::cout << failures.size() << " cell(s) failed\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trust-gated teacher-student transfer for tabular reinforcement learning"};
  app.require_subcommand(1);

  TeacherArgs ta;
  auto* teach = app.add_subcommand("train-teacher", "Train a teacher on a source variant and distill its knowledge");
  teach->add_option("--env", ta.env, "Environment name")->required();
  teach->add_option("--episodes", ta.episodes, "Training episodes")->capture_default_str();
  teach->add_option("--seed", ta.seed, "Training seed")->capture_default_str();
  teach->add_option("--layout-seed", ta.layout_seed, "Layout seed of the source variant")->capture_default_str();
  teach->add_option("--out", ta.out, "Knowledge file to write")->required();
  teach->add_option("--qtable", ta.qtable, "Also write the teacher Q-table snapshot here");
  teach->add_option("--aggregation", ta.aggregation, "Policy aggregation: visitation_weighted or unweighted")
      ->capture_default_str();
  teach->add_option("--config", ta.config, "Experiment config supplying hyperparameters");
  teach->add_flag("--dump-layout", ta.dump_layout, "Print the source layout");

  StudentArgs sa;
  auto* stud = app.add_subcommand("train-student", "Train students on a target variant");
  stud->add_option("--env", sa.env, "Environment name")->required();
  stud->add_option("--variant", sa.variant, "cadent, ad, pd, no_transfer (none) or no_trust_gate (fixed-trust)")
      ->capture_default_str();
  stud->add_option("--knowledge", sa.knowledge, "Teacher knowledge file");
  stud->add_option("--episodes", sa.episodes, "Episodes per seed (default from config)");
  stud->add_option("--seeds", sa.seeds, "Comma-separated seeds")->capture_default_str();
  stud->add_option("--config", sa.config, "Experiment config supplying hyperparameters");
  stud->add_option("--out", sa.out, "Output directory for per-seed CSVs")->capture_default_str();
  stud->add_option("--layout-seed", sa.layout_seed, "Layout seed of the target variant")->capture_default_str();
  stud->add_flag("--assert-bound", sa.assert_bound, "Check every update against the bounded-update ceiling");
  stud->add_flag("--dump-layout", sa.dump_layout, "Print the target layout");

  ExperimentArgs ea;
  auto* exp = app.add_subcommand("experiment", "Run a multi-environment, multi-variant, multi-seed grid");
  exp->add_option("--config", ea.config, "Experiment config (default config when omitted)");
  exp->add_option("--parallel", ea.parallel, "Cells run concurrently")->capture_default_str()->check(CLI::PositiveNumber);
  exp->add_option("--only", ea.only, "Filter such as env=dungeon_quest,variant=cadent");
  exp->add_flag("--dump-default-config", ea.dump_default, "Print the default config and exit");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*teach) return run_train_teacher(ta);
    if (*stud) return run_train_student(sa);
    return run_experiment_cmd(ea);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
