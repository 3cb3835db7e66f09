#pragma once

#include "w2sd/gaussian_mixture.hpp"
#include "w2sd/sampler.hpp"
#include "w2sd/score_model.hpp"
#include "w2sd/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace w2sd {

/// Fraction of samples whose maximum-responsibility component (noise level 0)
/// is component i.
std::vector<double> mode_fractions(std::span<const Vector> samples, const GaussianMixture& gmm);

/// Exact 1-D Wasserstein-1 distance between two empirical distributions:
/// integral over u of |F_a^{-1}(u) - F_b^{-1}(u)|.
double wasserstein1_1d(std::span<const double> a, std::span<const double> b);

/// Mean 1-D W1 over n_projections random unit directions.
double sliced_wasserstein_2d(std::span<const Vector> a, std::span<const Vector> b, int n_projections,
                             std::uint64_t seed);

/// W1 for 1-D samples, sliced W1 (n_projections directions) for higher dimension.
double distance_to_reference(std::span<const Vector> samples, std::span<const Vector> reference, std::uint64_t seed,
                             int n_projections = 64);

std::string distance_kind(int dim);

/// First coordinate of every sample.
std::vector<double> first_coordinate(std::span<const Vector> samples);

struct ProfileEntry {
  int k = 0;
  double mean_cosine = 0.0;  // NaN when no probe had two non-zero differences
  std::size_t used = 0;
  std::size_t skipped = 0;

  bool defined() const { return used > 0; }
};

/// Per grid index cosine between the weak-to-strong difference
/// (strong - weak scores) and the strong-to-ideal difference (ideal - strong).
struct DifferenceProfile {
  std::string probe_policy;
  std::vector<ProfileEntry> entries;  // ordered by decreasing k

  bool all_defined_positive() const;
  double min_defined() const;
  nlohmann::json to_json() const;
  nlohmann::json summary() const;
};

/// Points to probe at each grid index.
struct ProbeSet {
  std::string label;
  std::vector<std::pair<int, std::vector<Vector>>> levels;
};

/// Uniform grid over [lo, hi]^d scaled by sqrt(1 + V(t_k)) at every grid index.
ProbeSet grid_probes(const NoiseSchedule& schedule, int dim, double lo, double hi, int per_axis);

/// Probes taken from chain states (state at index k probed at k).
ProbeSet chain_probes(const std::vector<Trajectory>& chains);

/// `scale_by_step` multiplies the weak-to-strong difference by the step
/// coefficient (the reflection displacement); the cosine is unchanged by it.
DifferenceProfile cosine_profile(const ScoreModel& strong, const ScoreModel& weak, const ScoreModel& ideal,
                                 const ProbeSet& probes, bool scale_by_step = false);
DifferenceProfile cosine_profile(const ScoreModel& strong, const ScoreModel& weak, const ScoreModel& ideal,
                                 const std::vector<Trajectory>& chains);

/// CSV with bin_left,bin_right,count for `values` on [lo, hi) with `bins` bins;
/// values outside are clamped into the end bins.
void write_histogram_csv(std::ostream& out, std::span<const double> values, int bins, double lo, double hi,
                         const std::string& config_hash);

std::vector<std::size_t> histogram(std::span<const double> values, int bins, double lo, double hi);

}  // namespace w2sd
