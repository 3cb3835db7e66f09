#pragma once

#include <json.hpp>

#include <string>
#include <vector>

namespace w2sd {

/// Scale applied to the per-step drift sigma^{2t} * dt.
///
/// kProbabilityFlow uses the probability-flow ODE factor 1/2, which transports
/// the noised marginals exactly in the continuous limit. kLiteral drops the
/// factor; that map is the noise-free reverse-SDE drift and contracts every
/// mode towards a point.
enum class OdeDrift { kProbabilityFlow, kLiteral };

std::string to_string(OdeDrift drift);
OdeDrift ode_drift_from_string(const std::string& name);

/// Variance-exploding forward process on the uniform grid t_k = k / T.
///
/// The forward recursion is x_{t_k} = x_{t_{k-1}} + sigma^{t_k} sqrt(dt) z, so
/// the accumulated variance is the right Riemann sum
/// V(t_k) = sum_{j=1..k} sigma^{2 t_j} dt, kept exactly rather than replaced
/// by its integral.
class NoiseSchedule {
 public:
  NoiseSchedule(double sigma = 25.0, int steps = 50, OdeDrift drift = OdeDrift::kProbabilityFlow);

  double sigma() const { return sigma_; }
  int steps() const { return steps_; }
  double dt() const { return 1.0 / steps_; }
  OdeDrift drift() const { return drift_; }

  /// t_k = k / T.
  double time(int k) const;
  /// V(t_k); zero at k = 0.
  double accumulated_variance(int k) const;
  /// V(t_k) - V(t_{k-1}) = sigma^{2 t_k} dt.
  double increment_variance(int k) const;
  /// sigma^{2 t_k} * dt.
  double growth(int k) const;
  /// Drift factor times growth(k): the multiplier of the score in a step.
  double step_coefficient(int k) const;

  void check_index(int k) const;
  void check_step_index(int k) const;

  nlohmann::json to_json() const;
  static NoiseSchedule from_json(const nlohmann::json& j);

  friend bool operator==(const NoiseSchedule& a, const NoiseSchedule& b) {
    return a.sigma_ == b.sigma_ && a.steps_ == b.steps_ && a.drift_ == b.drift_;
  }

 private:
  double sigma_;
  int steps_;
  OdeDrift drift_;
  std::vector<double> variance_;
};

}  // namespace w2sd
