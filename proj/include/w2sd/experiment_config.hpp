#pragma once

#include "w2sd/baselines.hpp"
#include "w2sd/gaussian_mixture.hpp"
#include "w2sd/sampler.hpp"
#include "w2sd/schedule.hpp"
#include "w2sd/score_model.hpp"
#include "w2sd/score_network.hpp"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace w2sd {

struct ConfigDiagnostic {
  std::string path;  // dotted path into the document, e.g. "models.weak.scale"
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigDiagnostic> diagnostics);
  const std::vector<ConfigDiagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<ConfigDiagnostic> diagnostics_;
};

enum class ModelType { kMixture, kGuided, kTrained };

struct ModelSpec {
  ModelType type = ModelType::kMixture;
  std::string label;
  std::optional<GaussianMixture> mixture;  // mixture models; training data for trained models
  std::optional<GuidanceConfig> guidance;
  std::vector<std::size_t> counts;
  TrainConfig train;
  std::uint64_t train_seed = 0;

  nlohmann::json to_json() const;
};

struct SweepSpec {
  std::string axis;  // weak-guidance-scale | weak-mixture-weight
  std::vector<double> values;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::string description;
  std::string kind;
  NoiseSchedule schedule;
  int lambda = 49;
  ReflectionPlacement placement = ReflectionPlacement::kFirst;
  std::size_t n_chains = 10000;
  std::vector<std::uint64_t> seeds{0};
  std::map<std::string, ModelSpec> models;
  std::vector<std::string> arms;
  std::vector<double> k_err;
  int max_draws = 64;
  double guidance_weight = 1.0;
  AutoGuidanceMode guidance_mode = AutoGuidanceMode::kLatent;
  std::optional<SweepSpec> sweep;
  int t_std = 50;
  std::string cosine_probes = "chain-states";
  double grid_lo = -3.0;
  double grid_hi = 3.0;
  int grid_per_axis = 41;
  std::size_t reference_samples = 100000;
  std::uint64_t reference_seed = 20240;
  int projections = 64;
  std::optional<GaussianMixture> mode_reference;
  int histogram_bins = 80;
  double histogram_lo = -10.0;
  double histogram_hi = 10.0;
  std::size_t export_chains = 20;
  std::string hash;

  /// Canonical document with every default filled in; config_hash() of it is `hash`.
  nlohmann::json to_json() const;

  bool has_model(const std::string& role) const { return models.count(role) > 0; }
  const ModelSpec& model(const std::string& role) const;
  /// Mixture used as ground truth: the ground_truth role, else a mixture-backed ideal.
  const GaussianMixture& ground_truth() const;
};

const std::vector<std::string>& experiment_kinds();
const std::vector<std::string>& arm_names();

/// Schema check, defaults, hash. Throws ConfigError listing every violation.
ExperimentConfig validate_config(const nlohmann::json& raw);

/// Parses JSON text first; syntax errors are reported as a ConfigError at path "".
ExperimentConfig validate_config_text(const std::string& text);

/// Replaces the seeds by {seed, seed+1, ...} (same count) and/or n_chains.
nlohmann::json apply_overrides(nlohmann::json raw, std::optional<std::uint64_t> seed,
                               std::optional<std::size_t> chains);

}  // namespace w2sd
