#pragma once

#include "w2sd/sampler.hpp"
#include "w2sd/schedule.hpp"
#include "w2sd/score_model.hpp"
#include "w2sd/types.hpp"

#include <cstdint>
#include <string>

namespace w2sd {

enum class NoiseSelection { kNone, kAcceptPositive, kAcceptNegative };

std::string to_string(NoiseSelection selection);
NoiseSelection selection_from_string(const std::string& name);

struct ResampleConfig {
  NoiseSchedule schedule;
  int lambda = 0;
  std::uint64_t seed = 0;
  NoiseSelection selection = NoiseSelection::kNone;
  int max_draws = 64;
  ReflectionPlacement placement = ReflectionPlacement::kFirst;

  void validate() const;
  SamplerConfig sampler() const;
};

enum class AutoGuidanceMode {
  kLatent,  // combine the two denoised latents
  kScore,   // combine the scores, then take one step
};

std::string to_string(AutoGuidanceMode mode);
AutoGuidanceMode auto_guidance_mode_from_string(const std::string& name);

struct AutoGuidanceConfig {
  ModelPtr strong;
  ModelPtr weak;
  double weight = 1.0;
  NoiseSchedule schedule;
  std::uint64_t seed = 0;
  AutoGuidanceMode mode = AutoGuidanceMode::kLatent;
};

/// Re-noise a level-(k-1) latent to level k: x_prev + sqrt(V_k - V_{k-1}) eps.
Vector add_noise(const Vector& x_prev, const Vector& eps, int k, const NoiseSchedule& schedule);

/// On each selected step: denoise to k-1, re-noise to k with fresh noise,
/// denoise again. Other steps are plain strong denoising.
Trajectory run_resample_vanilla(const ScoreModel& strong, const ResampleConfig& config);

/// Vanilla re-sampling whose noise is filtered by its cosine with the
/// reflection displacement eps_w2s = invert(weak, x_{k-1}) - x_k.
///
/// accept-positive keeps draws with cosine >= 0, accept-negative keeps draws
/// with cosine < 0. After max_draws rejections the best-scoring draw is used
/// and the step is marked as a fallback. A zero eps_w2s skips selection.
Trajectory run_resample_advanced(const ScoreModel& strong, const ScoreModel& weak, const ResampleConfig& config);

/// x_{k-1} = g + w (g - b) with g, b the strong and weak denoised latents.
Trajectory run_auto_guidance(const AutoGuidanceConfig& config);

/// Cosine similarity; returns 0 when either vector is zero.
double cosine_similarity(const Vector& a, const Vector& b);

}  // namespace w2sd
