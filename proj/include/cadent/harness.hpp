#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadent/config.hpp"
#include "cadent/student.hpp"

namespace cadent::harness {

using student::EpisodeRecord;

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Restricts which cells run, e.g. parsed from "env=dungeon_quest,variant=cadent".
struct CellFilter {
  std::set<envs::EnvName> envs;
  std::set<std::string> variants;

  bool accepts(envs::EnvName env, const std::string& variant) const;
  static CellFilter parse(const std::string& text);
};

struct Cell {
  envs::EnvName env;
  std::string variant;
  std::uint64_t seed;
};

struct CellResult {
  Cell cell;
  std::vector<EpisodeRecord> records;
  std::optional<std::string> error;
};

struct AggregatePoint {
  double x = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;

  friend bool operator==(const AggregatePoint&, const AggregatePoint&) = default;
};

enum class Metric { reward, steps, reward_vs_steps };
std::string to_string(Metric m);

// Episode-aligned mean and standard error (sample sd / sqrt(n)) of one metric.
// Throws HarnessError on empty input or streams of different length.
std::vector<AggregatePoint> aggregate(const std::vector<std::vector<EpisodeRecord>>& streams, Metric metric);

// Reward against cumulative steps, resampled (last value carried forward) onto
// `points` evenly spaced steps from 0 to the smallest final cumulative step.
std::vector<AggregatePoint> aggregate_by_steps(const std::vector<std::vector<EpisodeRecord>>& streams,
                                               int points = 200);

// Smallest cumulative step count at which the trailing `window`-episode mean
// reward reaches threshold.
std::optional<std::int64_t> steps_to_threshold(const std::vector<EpisodeRecord>& records, double threshold,
                                               int window);

// Mean reward over the last `window` episodes (all episodes when fewer).
double final_mean(const std::vector<EpisodeRecord>& records, int window);

struct ExperimentResult {
  std::vector<CellResult> cells;  // sorted by (env, variant, seed)
  nlohmann::json summary;
  std::filesystem::path output_dir;

  bool ok() const;
};

// The output directory for a config: CADENT_OUT when set, else output_dir.
std::filesystem::path resolve_output_dir(const config::ExperimentConfig& cfg);

// Runs every (env, variant, seed) cell allowed by the filter, up to `parallel`
// at a time, then writes all outputs. A failing cell is recorded and the rest
// continue. Progress lines go to `log` when given.
ExperimentResult run_experiment(const config::ExperimentConfig& cfg, int parallel = 1, const CellFilter& filter = {},
                                std::ostream* log = nullptr);

// Summary document: thresholds, steps-to-threshold, final performance,
// normalization bounds, failures and the config echo.
nlohmann::json summarize(const config::ExperimentConfig& cfg, const std::vector<CellResult>& cells);

inline constexpr const char* kRunHeader = "variant,env,seed,episode,reward,steps,cumulative_steps,reached_accept";
inline constexpr const char* kAggregateHeader = "x,mean,stderr,n";

void write_run_csv(const std::filesystem::path& path, const std::vector<EpisodeRecord>& records);
std::vector<EpisodeRecord> read_run_csv(const std::filesystem::path& path);
void write_aggregate_csv(const std::filesystem::path& path, const std::vector<AggregatePoint>& curve);

// runs/<env>__<variant>__seed<k>.csv, aggregates/<env>__<variant>__<metric>.csv
// and summary.json under dir.
void write_outputs(const std::filesystem::path& dir, const std::vector<CellResult>& cells,
                   const nlohmann::json& summary);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace cadent::harness
