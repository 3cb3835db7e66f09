#include "w2sd/schedule.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace w2sd {

std::string to_string(OdeDrift drift) {
  return drift == OdeDrift::kProbabilityFlow ? "probability-flow" : "literal";
}

OdeDrift ode_drift_from_string(const std::string& name) {
  if (name == "probability-flow") return OdeDrift::kProbabilityFlow;
  if (name == "literal") return OdeDrift::kLiteral;
  throw std::invalid_argument("unknown drift '" + name + "' (expected probability-flow or literal)");
}

NoiseSchedule::NoiseSchedule(double sigma, int steps, OdeDrift drift) : sigma_(sigma), steps_(steps), drift_(drift) {
  if (!(sigma > 1.0) || !std::isfinite(sigma)) throw std::invalid_argument("schedule sigma must be finite and > 1");
  if (steps < 1) throw std::invalid_argument("schedule steps must be >= 1");
  variance_.resize(steps + 1);
  variance_[0] = 0.0;
  const double dt = 1.0 / steps;
  for (int k = 1; k <= steps; ++k) variance_[k] = variance_[k - 1] + std::pow(sigma, 2.0 * k / steps) * dt;
}

void NoiseSchedule::check_index(int k) const {
  if (k < 0 || k > steps_) {
    throw std::out_of_range("grid index " + std::to_string(k) + " outside [0, " + std::to_string(steps_) + "]");
  }
}

void NoiseSchedule::check_step_index(int k) const {
  if (k < 1 || k > steps_) {
    throw std::out_of_range("step index " + std::to_string(k) + " outside [1, " + std::to_string(steps_) + "]");
  }
}

double NoiseSchedule::time(int k) const {
  check_index(k);
  return static_cast<double>(k) / steps_;
}

double NoiseSchedule::accumulated_variance(int k) const {
  check_index(k);
  return variance_[k];
}

double NoiseSchedule::increment_variance(int k) const {
  check_step_index(k);
  return growth(k);
}

double NoiseSchedule::growth(int k) const {
  check_index(k);
  return std::pow(sigma_, 2.0 * k / steps_) * dt();
}

double NoiseSchedule::step_coefficient(int k) const {
  const double factor = drift_ == OdeDrift::kProbabilityFlow ? 0.5 : 1.0;
  return factor * growth(k);
}

nlohmann::json NoiseSchedule::to_json() const {
  return {{"sigma", sigma_}, {"steps", steps_}, {"drift", to_string(drift_)}};
}

NoiseSchedule NoiseSchedule::from_json(const nlohmann::json& j) {
  return NoiseSchedule(j.value("sigma", 25.0), j.value("steps", 50),
                       ode_drift_from_string(j.value("drift", std::string("probability-flow"))));
}

}  // namespace w2sd
