#pragma once

#include "w2sd/sampler.hpp"
#include "w2sd/score_model.hpp"
#include "w2sd/types.hpp"

namespace w2sd {

/// Weak-model inversion of a strong-model denoise step:
/// invert_step(weak, denoise_step(strong, x, k), k).
Vector reflect(const ScoreModel& strong, const ScoreModel& weak, const Vector& x, int k);

/// The reversed operator invert_step(strong, denoise_step(weak, x, k), k).
Vector reverse_reflect(const ScoreModel& strong, const ScoreModel& weak, const Vector& x, int k);

/// First-order closed form of reflect():
/// x + c_k (strong.score(x, k) - weak.score(x, k)),
/// with c_k the schedule's step coefficient (sigma^{2 t_k} dt times the drift factor).
Vector first_order_reflection(const ScoreModel& strong, const ScoreModel& weak, const Vector& x, int k);

/// Reflect on the lambda selected steps, then denoise with the strong model.
/// Steps outside the selection pass x through unchanged before denoising.
Trajectory run_w2sd(const ScoreModel& strong, const ScoreModel& weak, const SamplerConfig& config);

/// As run_w2sd with reverse_reflect() in place of reflect().
Trajectory run_s2wd(const ScoreModel& strong, const ScoreModel& weak, const SamplerConfig& config);

/// As run_w2sd, but each reflection is replaced by
/// first_order_reflection(x) - c_k * k_err * eps with eps ~ N(0, I) drawn fresh per
/// reflected step from the chain's noise stream.
Trajectory run_w2sd_with_error(const ScoreModel& strong, const ScoreModel& weak, const SamplerConfig& config,
                               double k_err);

}  // namespace w2sd
