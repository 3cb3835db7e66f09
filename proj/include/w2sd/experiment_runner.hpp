#pragma once

#include "w2sd/evaluation.hpp"
#include "w2sd/experiment_config.hpp"
#include "w2sd/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace w2sd {

/// Builds score models from specs. Trained networks are fitted once per role
/// and re-wrapped for other schedules of the same sigma.
class ModelBuilder {
 public:
  explicit ModelBuilder(const ExperimentConfig& config) : config_(config) {}

  ModelPtr build(const std::string& role, const NoiseSchedule& schedule);
  ModelPtr build(const std::string& role) { return build(role, config_.schedule); }
  /// Same role with a replacement spec (sweeps).
  ModelPtr build_spec(const ModelSpec& spec, const NoiseSchedule& schedule);

 private:
  const ExperimentConfig& config_;
  std::map<std::string, std::shared_ptr<const TrainedScoreModel>> trained_;
};

struct SweepPoint {
  double value = 0.0;
  double difference = 0.0;  // strong knob minus weak knob
  double distance = 0.0;
  double gain = 0.0;        // baseline distance - W2SD distance
  std::vector<double> per_seed_gain;
  bool within_noise_band = false;
};

struct SweepResult {
  std::string axis;
  double strong_value = 0.0;
  double baseline_distance = 0.0;
  std::vector<double> baseline_per_seed;
  /// Twice the across-seed standard deviation of the baseline distance.
  double noise_band = 0.0;
  std::vector<SweepPoint> points;

  nlohmann::json to_json() const;
};

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  int threads = 1;
};

struct ExperimentResult {
  std::string config_hash;
  std::vector<ArmRun> arms;
  std::optional<SweepResult> sweep;
  std::optional<DifferenceProfile> profile;
  std::optional<EqualComputeResult> equal_compute;
  nlohmann::json report;  // contents of report.json
  double wall_clock_seconds = 0.0;

  const ExperimentReport& arm(const std::string& name) const;
};

/// Runs the experiment and, when out_dir is set, writes report.json,
/// timing.json, trajectories/, histograms/, diagnostics/ and
/// acceptance_log.csv. On a runtime failure a FAILED marker file is written
/// next to the partial artifacts and the exception is rethrown.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// Strong-alone baseline and one W2SD run per sweep value, under shared seeds.
SweepResult magnitude_sweep(const ExperimentConfig& config, const RunOptions& options);

/// True when the report's embedded config hashes to its config_hash field.
bool report_hash_consistent(const nlohmann::json& report);

struct PresetInfo {
  std::string name;
  std::string kind;
  std::string description;
  std::filesystem::path path;
};

std::filesystem::path default_preset_dir();
std::vector<PresetInfo> list_presets(const std::filesystem::path& dir);
/// Resolves a preset name or a file path to its JSON document.
nlohmann::json load_config_document(const std::string& name_or_path, const std::filesystem::path& preset_dir);

}  // namespace w2sd
