#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cadent/harness.hpp"
#include "cadent/teacher.hpp"

using namespace cadent;
using namespace cadent::harness;
namespace fs = std::filesystem;

namespace {

std::vector<EpisodeRecord> stream(const std::vector<double>& rewards, int steps = 10) {
  std::vector<EpisodeRecord> out;
  std::int64_t cum = 0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    cum += steps;
    out.push_back({"cadent", "dungeon_quest", 0, static_cast<int>(i + 1), rewards[i], steps, cum, rewards[i] > 0});
  }
  return out;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cadent_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::size_t count_files(const fs::path& dir) {
  std::size_t n = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir)) n += e.is_regular_file() ? 1 : 0;
  return n;
}

config::ExperimentConfig tiny(const fs::path& out) {
  auto c = config::default_config();
  c.environments = {envs::EnvName::dungeon_quest};
  c.variants = {"cadent", "no_transfer"};
  c.seeds = {0, 1};
  c.episodes = {{envs::EnvName::dungeon_quest, 15}};
  c.teacher.episodes = 400;
  c.output_dir = out.string();
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Aggregate, IdenticalStreamsHaveZeroStderr) {
  const auto s = stream({1.0, 2.0, 3.0});
  const auto agg = aggregate({s, s, s}, Metric::reward);
  ASSERT_EQ(agg.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(agg[i].mean, s[i].reward);
    EXPECT_EQ(agg[i].stderr_, 0.0);
    EXPECT_EQ(agg[i].n, 3);
    EXPECT_EQ(agg[i].x, static_cast<double>(i + 1));
  }
}

TEST(Aggregate, TwoStreams) {
  const auto agg = aggregate({stream({1.0}), stream({3.0})}, Metric::reward);
  EXPECT_DOUBLE_EQ(agg[0].mean, 2.0);
  // sample sd sqrt(2) over sqrt(2)
  EXPECT_DOUBLE_EQ(agg[0].stderr_, 1.0);
}

TEST(Aggregate, SingleStreamIsItself) {
  const auto s = stream({0.5, -1.0}, 7);
  const auto agg = aggregate({s}, Metric::steps);
  EXPECT_EQ(agg[0].mean, 7.0);
  EXPECT_EQ(agg[1].stderr_, 0.0);
}

TEST(Aggregate, Errors) {
  EXPECT_THROW(aggregate({}, Metric::reward), HarnessError);
  EXPECT_THROW(aggregate({stream({1.0}), stream({1.0, 2.0})}, Metric::reward), HarnessError);
  EXPECT_THROW(aggregate_by_steps({stream({})}), HarnessError);
  EXPECT_THROW(aggregate_by_steps({stream({1.0})}, 1), HarnessError);
}

TEST(Aggregate, ByStepsGrid) {
  const auto a = stream({1.0, 2.0, 3.0, 4.0}, 10);
  const auto b = stream({0.0, 0.0, 0.0}, 10);
  const auto agg = aggregate_by_steps({a, b});
  ASSERT_EQ(agg.size(), 200u);
  EXPECT_EQ(agg.front().x, 0.0);
  EXPECT_EQ(agg.back().x, 30.0);
  // at x=30 stream a has finished three episodes
  EXPECT_EQ(agg.back().mean, 1.5);
  EXPECT_EQ(agg.front().mean, 0.5);
  EXPECT_EQ(aggregate({a, a}, Metric::reward_vs_steps).size(), 200u);
}

TEST(Threshold, NeverReached) {
  EXPECT_FALSE(steps_to_threshold(stream({0.0, 0.0, 0.0}), 1.0, 2).has_value());
  EXPECT_FALSE(steps_to_threshold(stream({5.0}), 1.0, 2).has_value());
  EXPECT_THROW(steps_to_threshold(stream({1.0}), 1.0, 0), HarnessError);
}

TEST(Threshold, ImmediateHit) {
  const auto s = stream({2.0, 0.0, 0.0}, 13);
  EXPECT_EQ(steps_to_threshold(s, 1.0, 1), 13);
}

TEST(Threshold, TrailingWindow) {
  const auto s = stream({0.0, 0.0, 2.0, 2.0, 2.0}, 5);
  EXPECT_EQ(steps_to_threshold(s, 1.0, 2), 15);
  EXPECT_EQ(steps_to_threshold(s, 2.0, 2), 20);
  EXPECT_EQ(steps_to_threshold(s, 2.0, 3), 25);
}

TEST(FinalMean, Window) {
  const auto s = stream({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(final_mean(s, 2), 3.5);
  EXPECT_EQ(final_mean(s, 100), 2.5);
  EXPECT_EQ(final_mean({}, 3), 0.0);
}

TEST(Csv, RunRoundTrip) {
  const auto dir = scratch("csv");
  auto s = stream({0.1, -0.30000000000000004, 1e-17, 9.99});
  s[2].seed = 18446744073709551615ULL;
  write_run_csv(dir / "r.csv", s);
  EXPECT_EQ(read_run_csv(dir / "r.csv"), s);
  std::ifstream in(dir / "r.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "variant,env,seed,episode,reward,steps,cumulative_steps,reached_accept");
}

TEST(Csv, Headers) {
  const auto dir = scratch("headers");
  write_run_csv(dir / "r.csv", {});
  write_aggregate_csv(dir / "a.csv", {});
  EXPECT_EQ(slurp(dir / "r.csv"), std::string(kRunHeader) + "\n");
  EXPECT_EQ(slurp(dir / "a.csv"), "x,mean,stderr,n\n");
  EXPECT_TRUE(read_run_csv(dir / "r.csv").empty());
}

TEST(Csv, RejectsMalformed) {
  const auto dir = scratch("bad");
  {
    std::ofstream(dir / "h.csv") << "nope\n";
    std::ofstream(dir / "f.csv") << kRunHeader << "\ncadent,dq,0,1\n";
    std::ofstream(dir / "n.csv") << kRunHeader << "\ncadent,dq,x,1,0,1,1,0\n";
  }
  EXPECT_THROW(read_run_csv(dir / "h.csv"), HarnessError);
  EXPECT_THROW(read_run_csv(dir / "f.csv"), HarnessError);
  EXPECT_THROW(read_run_csv(dir / "n.csv"), HarnessError);
  EXPECT_THROW(read_run_csv(dir / "missing.csv"), HarnessError);
}

TEST(Csv, FormatDouble) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 9.99, 0.0}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(Outputs, FileCount) {
  const auto dir = scratch("outputs");
  std::vector<CellResult> cells;
  for (std::string v : {"cadent", "ad"}) {
    for (std::uint64_t seed : {0, 1}) {
      auto recs = stream({1.0, 2.0});
      for (auto& r : recs) r.variant = v, r.seed = seed;
      cells.push_back({{envs::EnvName::dungeon_quest, v, seed}, recs, std::nullopt});
    }
  }
  write_outputs(dir, cells, nlohmann::json::object());
  EXPECT_EQ(count_files(dir / "runs"), 4u);
  EXPECT_EQ(count_files(dir / "aggregates"), 6u);
  EXPECT_TRUE(fs::exists(dir / "summary.json"));
  EXPECT_TRUE(fs::exists(dir / "runs" / "dungeon_quest__ad__seed1.csv"));
  EXPECT_TRUE(fs::exists(dir / "aggregates" / "dungeon_quest__cadent__reward_vs_steps.csv"));
}

TEST(Filter, Parse) {
  const auto f = CellFilter::parse("env=dungeon_quest,variant=none");
  EXPECT_TRUE(f.accepts(envs::EnvName::dungeon_quest, "no_transfer"));
  EXPECT_FALSE(f.accepts(envs::EnvName::dungeon_quest, "cadent"));
  EXPECT_FALSE(f.accepts(envs::EnvName::blind_craftsman, "no_transfer"));
  EXPECT_TRUE(CellFilter::parse("").accepts(envs::EnvName::warehouse_robotics, "pd"));
  EXPECT_THROW(CellFilter::parse("env"), HarnessError);
  EXPECT_THROW(CellFilter::parse("seed=1"), HarnessError);
}

TEST(Experiment, DeterministicOutputs) {
  const auto a = scratch("exp_a");
  const auto b = scratch("exp_b");
  const auto ra = run_experiment(tiny(a));
  const auto rb = run_experiment(tiny(b), 2);
  for (const auto& c : ra.cells) EXPECT_FALSE(c.error.has_value()) << *c.error;
  ASSERT_TRUE(ra.ok());
  ASSERT_TRUE(rb.ok());
  EXPECT_EQ(ra.summary, rb.summary);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    EXPECT_EQ(slurp(e.path()), slurp(b / rel)) << rel;
  }
  EXPECT_EQ(count_files(a / "runs"), 4u);
  const auto& dq = ra.summary["environments"]["dungeon_quest"];
  EXPECT_EQ(dq["threshold"]["source"], "no_transfer_final");
  EXPECT_EQ(dq["ranking"].size(), 2u);
}

TEST(Experiment, FaultIsolation) {
  const auto dir = scratch("fault");
  std::ofstream(dir / "broken.json") << "{ not knowledge";
  auto cfg = tiny(dir / "out");
  cfg.teacher.source[envs::EnvName::dungeon_quest] = (dir / "broken.json").string();
  std::stringstream log;
  const auto r = run_experiment(cfg, 1, {}, &log);
  EXPECT_FALSE(r.ok());
  int failed = 0;
  for (const auto& c : r.cells) {
    if (c.cell.variant == "no_transfer") {
      EXPECT_FALSE(c.error.has_value());
      EXPECT_EQ(c.records.size(), 15u);
    } else {
      EXPECT_TRUE(c.error.has_value());
      ++failed;
    }
  }
  EXPECT_EQ(failed, 2);
  EXPECT_EQ(r.summary["failures"].size(), 2u);
  EXPECT_NE(log.str().find("FAILED"), std::string::npos);
  EXPECT_EQ(count_files(dir / "out" / "runs"), 2u);
}

TEST(Experiment, FilterRestrictsCells) {
  const auto dir = scratch("filter");
  const auto r = run_experiment(tiny(dir), 1, CellFilter::parse("variant=no_transfer"));
  EXPECT_EQ(r.cells.size(), 2u);
  EXPECT_TRUE(r.summary["teachers"].empty());
}

TEST(Summary, EmptyCells) {
  const auto cfg = tiny(scratch("empty"));
  const auto sum = summarize(cfg, {});
  EXPECT_TRUE(sum["environments"].empty());
  EXPECT_TRUE(sum["failures"].empty());
  EXPECT_EQ(sum["config_hash"], cfg.hash());
  EXPECT_FALSE(sum["config"].contains("output_dir"));
}

TEST(Experiment, DungeonQuestCadentImproves) {
  auto src = envs::make_env(envs::default_spec(envs::EnvName::dungeon_quest, envs::Variant::source));
  const tabular::LearningParams lp;
  const auto tk = teacher::distill(*src, teacher::train_teacher(*src, lp, 5000, 0), lp.tau, 0);
  auto env = envs::make_env(envs::default_spec(envs::EnvName::dungeon_quest, envs::Variant::target));
  std::vector<std::vector<EpisodeRecord>> streams;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    student::StudentLearner l(student::StudentConfig{}, &tk, env->num_actions());
    streams.push_back(student::train_student(*env, l, {"cadent", seed, 1500, false}).records);
  }
  const auto curve = aggregate(streams, Metric::reward);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 100; ++i) {
    first += curve[i].mean;
    last += curve[curve.size() - 1 - i].mean;
  }
  EXPECT_GT(last / 100, first / 100);
}
