#pragma once

#include "w2sd/schedule.hpp"
#include "w2sd/score_model.hpp"
#include "w2sd/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace w2sd {

/// Where the lambda reflection (or resampling) steps sit on the grid.
/// kFirst: indices k > T - lambda (from t = T downward). kLast: k <= lambda.
enum class ReflectionPlacement { kFirst, kLast };

std::string to_string(ReflectionPlacement placement);
ReflectionPlacement placement_from_string(const std::string& name);

struct SamplerConfig {
  NoiseSchedule schedule;
  int lambda = 0;
  std::uint64_t seed = 0;
  ReflectionPlacement placement = ReflectionPlacement::kFirst;
  /// Record per-step diagnostics. Costs one extra weak-model evaluation per
  /// reflected step, which is excluded from Trajectory::score_evaluations.
  bool diagnostics = true;

  void validate() const;
  /// True when grid index k is one of the lambda modified steps.
  bool modifies(int k) const;
};

struct TrajectoryState {
  int k = 0;
  Vector x;
};

/// Per reflected step record.
struct ReflectionRecord {
  int k = 0;
  Vector displacement;  // x_tilde - x
  Vector predicted;     // first-order displacement from the score difference
  double discrepancy = 0.0;
  double k_err = 0.0;
};

/// Per resampled step record (advanced re-sampling).
struct ResampleRecord {
  int k = 0;
  int draws_used = 0;
  double accepted_cosine = 0.0;
  bool fallback = false;
  bool skipped = false;  // zero reflection direction; no selection applied
};

/// One sampling chain from x_T down to x_0. Grid indices in `states` strictly
/// decrease from T to 0.
struct Trajectory {
  std::vector<TrajectoryState> states;
  std::vector<ReflectionRecord> reflections;
  std::vector<ResampleRecord> resamples;
  std::uint64_t seed = 0;
  std::vector<std::string> model_labels;
  /// Score evaluations spent on sampling itself (diagnostics excluded).
  std::uint64_t score_evaluations = 0;

  const Vector& terminal() const { return states.back().x; }
  int dim() const { return static_cast<int>(states.front().x.size()); }
};

/// x_T ~ N(0, V(1) I).
Vector sample_prior(const NoiseSchedule& schedule, int dim, std::uint64_t seed);

/// x + c_k * score(x, k), the latent at index k - 1.
Vector denoise_step(const ScoreModel& model, const Vector& x, int k);

/// x_prev - c_k * score(x_prev, k): the score is taken at the less-noisy point
/// but at time index k.
Vector invert_step(const ScoreModel& model, const Vector& x_prev, int k);

/// Prior draw followed by T denoise steps.
Trajectory run_standard(const ScoreModel& model, const SamplerConfig& config);

/// Long-format CSV: chain,k,t,x0..x{d-1}. Lines starting with '#' are header
/// comments (config hash etc.).
void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& chains, const NoiseSchedule& schedule,
                            const std::string& config_hash);

/// Reflection diagnostics CSV:
/// chain,k,t,disp0..,pred0..,discrepancy,k_err.
void write_diagnostics_csv(std::ostream& out, const std::vector<Trajectory>& chains, const NoiseSchedule& schedule,
                           const std::string& config_hash);

/// Advanced re-sampling acceptance log: chain,k,draws_used,accepted_cosine,fallback,skipped.
void write_acceptance_csv(std::ostream& out, const std::vector<Trajectory>& chains, const std::string& config_hash);

namespace detail {
void check_finite(const Vector& v, const ScoreModel& model, const Vector& x, int k);
Trajectory start_chain(const ScoreModel& model, const SamplerConfig& config, std::vector<std::string> labels);
void push_state(Trajectory& traj, int k, const Vector& x);
}  // namespace detail

}  // namespace w2sd
