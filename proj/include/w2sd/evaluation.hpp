#pragma once

#include "w2sd/ensemble.hpp"
#include "w2sd/gaussian_mixture.hpp"
#include "w2sd/score_model.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace w2sd {

/// FNV-1a 64 of the compact JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& canonical);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<double> mode_fractions;
  double mode_balance_error = 0.0;
  double distance = 0.0;
  std::uint64_t score_evaluations = 0;
};

/// Metrics of one sampling method ("arm") over all seeds.
struct ExperimentReport {
  std::string config_hash;
  std::string arm;
  std::string method;
  std::vector<std::string> model_labels;
  nlohmann::json provenance = nlohmann::json::object();
  std::size_t n_chains = 0;
  int steps = 0;
  int lambda = 0;
  std::string distance_kind;
  std::vector<SeedResult> seeds;
  std::vector<double> mode_fractions;  // mean over seeds
  double mode_balance_error = 0.0;     // sum_i |f_i - target_i|, mean over seeds
  double distance = 0.0;               // mean over seeds
  double distance_std = 0.0;           // sample standard deviation over seeds
  double evaluations_per_chain = 0.0;
  std::uint64_t expected_evaluations_per_chain = 0;
  nlohmann::json cosine_summary;  // null unless computed
  nlohmann::json extras = nlohmann::json::object();
  double wall_clock_seconds = 0.0;  // kept out of to_json()

  nlohmann::json to_json() const;
  /// Throws std::logic_error if fractions do not sum to 1 within 1e-9 or the
  /// measured evaluation count differs from the expected one.
  void check_invariants() const;
};

/// Shared evaluation settings for every arm of an experiment.
struct Evaluation {
  GaussianMixture mode_reference;
  std::vector<double> mode_target;
  std::vector<Vector> reference_samples;
  std::size_t chains = 10000;
  int threads = 1;
  std::string config_hash;
  int projections = 64;
  std::size_t export_chains = 0;
  bool keep_all = false;
};

struct ArmSpec {
  std::string name;
  std::string method;
  std::vector<std::string> labels;
  nlohmann::json provenance = nlohmann::json::object();
  int steps = 0;
  int lambda = 0;
  std::uint64_t expected_evaluations = 0;
  nlohmann::json extras = nlohmann::json::object();  // copied into the report
  ChainRunner runner;
};

struct ArmRun {
  ExperimentReport report;
  /// Kept trajectories of the first seed.
  std::vector<Trajectory> trajectories;
  /// Terminal samples of the first seed.
  std::vector<Vector> terminals;
};

ArmRun evaluate_arm(const ArmSpec& spec, const std::vector<std::uint64_t>& seeds, const Evaluation& evaluation);

using ModelFactory = std::function<ModelPtr(const NoiseSchedule&)>;

struct EqualComputeResult {
  ArmRun standard;
  ArmRun w2sd;
  int t_std = 0;
  int t_w2s = 0;
  int lambda = 0;
};

/// Standard sampling at t_std against W2SD at t_w2s = floor(t_std / 2) with
/// lambda = floor(t_w2s / 2). Throws std::logic_error if the W2SD arm would
/// use more score evaluations than the standard arm.
EqualComputeResult equal_compute_compare(const ModelFactory& strong, const ModelFactory& weak,
                                         const NoiseSchedule& base, int t_std, const std::vector<std::uint64_t>& seeds,
                                         const Evaluation& evaluation);

}  // namespace w2sd
