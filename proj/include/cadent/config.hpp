#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cadent/envs.hpp"
#include "cadent/student.hpp"
#include "cadent/teacher.hpp"

namespace cadent::config {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kTrainInline = "train-inline";

nlohmann::json to_json(const student::StudentConfig& c);
// Missing keys keep the values already in `base`.
student::StudentConfig student_from_json(const nlohmann::json& j, student::StudentConfig base = {});

struct TeacherSettings {
  int episodes = 5000;
  std::uint64_t seed = 0;
  teacher::PolicyAggregation aggregation = teacher::PolicyAggregation::visitation_weighted;
  // Per environment: a knowledge file path or kTrainInline.
  std::map<envs::EnvName, std::string> source;

  friend bool operator==(const TeacherSettings&, const TeacherSettings&) = default;
};

struct ExperimentConfig {
  std::vector<envs::EnvName> environments;
  std::vector<std::string> variants;
  std::vector<std::uint64_t> seeds;
  std::map<envs::EnvName, int> episodes;
  std::uint64_t layout_seed = 0;
  TeacherSettings teacher;
  student::StudentConfig hyperparameters;
  // Per-variant trust gate switch; variants not listed are gated.
  std::map<std::string, bool> gate;
  std::string output_dir = "results";
  // Explicit thresholds; environments not listed use threshold_fraction of the
  // no_transfer final mean.
  std::map<envs::EnvName, double> reward_threshold;
  double threshold_fraction = 0.8;
  int threshold_window = 20;
  int final_window = 100;

  // Throws ConfigError describing the first broken invariant.
  void validate() const;
  int episodes_for(envs::EnvName env) const;
  std::string teacher_source(envs::EnvName env) const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);

  // Digest of the serialized config. output_dir is excluded so that identical
  // experiments written to different places hash alike.
  std::string hash() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

ExperimentConfig default_config();

}  // namespace cadent::config
