#pragma once

#include "w2sd/schedule.hpp"
#include "w2sd/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace w2sd {

struct MixtureComponent {
  double weight = 0.0;
  Vector mean;
  Matrix covariance;
};

/// Finite Gaussian mixture. Immutable after construction; the constructor
/// enforces the weight, symmetry, and positive-definiteness invariants.
class GaussianMixture {
 public:
  explicit GaussianMixture(std::vector<MixtureComponent> components);

  /// Two unit-variance peaks at -separation and +separation (1-D).
  static GaussianMixture two_peak(double left_weight, double separation = 4.0, double variance = 1.0);
  /// Single isotropic Gaussian.
  static GaussianMixture single(const Vector& mean, double variance);

  /// {"components":[{"weight":w,"mean":[...],"cov":[[...]]}]}
  static GaussianMixture from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  int dim() const { return dim_; }
  std::size_t size() const { return components_.size(); }
  const std::vector<MixtureComponent>& components() const { return components_; }
  const MixtureComponent& component(std::size_t i) const { return components_.at(i); }
  std::vector<double> weights() const;

  friend bool operator==(const GaussianMixture& a, const GaussianMixture& b);

 private:
  std::vector<MixtureComponent> components_;
  int dim_ = 0;
};

/// Smallest density value reported; anything lower is clamped and flagged.
inline constexpr double kDensityFloor = 1e-300;

struct DensityValue {
  double value = 0.0;
  bool floored = false;
};

/// log p_{t_k}(x) with p_{t_k} = sum_i w_i N(x; mu_i, Sigma_i + V(t_k) I).
double log_noised_density(const GaussianMixture& gmm, const NoiseSchedule& schedule, const Vector& x, int k);

/// p_{t_k}(x), clamped to kDensityFloor on underflow.
DensityValue noised_density(const GaussianMixture& gmm, const NoiseSchedule& schedule, const Vector& x, int k);

/// Posterior component probabilities at noise variance `variance`, computed
/// with log-sum-exp.
std::vector<double> responsibilities(const GaussianMixture& gmm, const Vector& x, double variance);

/// grad_x log p_{t_k}(x) = sum_i r_i(x) (Sigma_i + V I)^{-1} (mu_i - x).
Vector analytic_score(const GaussianMixture& gmm, const NoiseSchedule& schedule, const Vector& x, int k);

/// i.i.d. draws: component by weight, then a Gaussian draw.
std::vector<Vector> sample_mixture(const GaussianMixture& gmm, std::size_t n, std::uint64_t seed);

/// Exactly counts[i] draws from component i, in component order.
std::vector<Vector> sample_components(const GaussianMixture& gmm, const std::vector<std::size_t>& counts,
                                      std::uint64_t seed);

}  // namespace w2sd
