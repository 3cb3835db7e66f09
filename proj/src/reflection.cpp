#include "w2sd/reflection.hpp"

#include "w2sd/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace w2sd {

Vector reflect(const ScoreModel& strong, const ScoreModel& weak, const Vector& x, int k) {
  check_compatible(strong, weak);
  return invert_step(weak, denoise_step(strong, x, k), k);
}

Vector reverse_reflect(const ScoreModel& strong, const ScoreModel& weak, const Vector& x, int k) {
  check_compatible(strong, weak);
  return invert_step(strong, denoise_step(weak, x, k), k);
}

Vector first_order_reflection(const ScoreModel& strong, const ScoreModel& weak, const Vector& x, int k) {
  check_compatible(strong, weak);
  strong.schedule().check_step_index(k);
  return x + strong.schedule().step_coefficient(k) * (strong.score(x, k) - weak.score(x, k));
}

namespace {

enum class Operator { kWeakToStrong, kStrongToWeak };

Trajectory run_reflection_chain(const ScoreModel& strong, const ScoreModel& weak, const SamplerConfig& config,
                                Operator op) {
  check_compatible(strong, weak);
  Trajectory traj = detail::start_chain(strong, config, {strong.label(), weak.label()});
  // First operand denoises, second inverts.
  const ScoreModel& first = op == Operator::kWeakToStrong ? strong : weak;
  const ScoreModel& second = op == Operator::kWeakToStrong ? weak : strong;
  Vector x = traj.states.back().x;
  for (int k = config.schedule.steps(); k >= 1; --k) {
    if (config.modifies(k)) {
      const double c = config.schedule.step_coefficient(k);
      const Vector s_first = first.score(x, k);
      detail::check_finite(s_first, first, x, k);
      const Vector y = x + c * s_first;
      const Vector s_second = second.score(y, k);
      detail::check_finite(s_second, second, y, k);
      const Vector reflected = y - c * s_second;
      traj.score_evaluations += 2;
      if (config.diagnostics) {
        ReflectionRecord rec;
        rec.k = k;
        rec.displacement = reflected - x;
        rec.predicted = c * (s_first - second.score(x, k));
        rec.discrepancy = (rec.displacement - rec.predicted).norm();
        traj.reflections.push_back(std::move(rec));
      }
      x = reflected;
    }
    x = denoise_step(strong, x, k);
    ++traj.score_evaluations;
    detail::push_state(traj, k - 1, x);
  }
  return traj;
}

}  // namespace

Trajectory run_w2sd(const ScoreModel& strong, const ScoreModel& weak, const SamplerConfig& config) {
  return run_reflection_chain(strong, weak, config, Operator::kWeakToStrong);
}

Trajectory run_s2wd(const ScoreModel& strong, const ScoreModel& weak, const SamplerConfig& config) {
  return run_reflection_chain(strong, weak, config, Operator::kStrongToWeak);
}

Trajectory run_w2sd_with_error(const ScoreModel& strong, const ScoreModel& weak, const SamplerConfig& config,
                               double k_err) {
  if (!(k_err >= 0.0) || !std::isfinite(k_err)) throw std::invalid_argument("k_err must be finite and >= 0");
  check_compatible(strong, weak);
  Trajectory traj = detail::start_chain(strong, config, {strong.label(), weak.label()});
  Rng noise(derive_seed(config.seed, 1));
  Vector x = traj.states.back().x;
  for (int k = config.schedule.steps(); k >= 1; --k) {
    if (config.modifies(k)) {
      const double c = config.schedule.step_coefficient(k);
      const Vector predicted = c * (strong.score(x, k) - weak.score(x, k));
      detail::check_finite(predicted, strong, x, k);
      traj.score_evaluations += 2;
      Vector displacement = predicted;
      if (k_err > 0.0) displacement -= c * k_err * noise.gaussian_vector(static_cast<int>(x.size()));
      if (config.diagnostics) {
        traj.reflections.push_back({k, displacement, predicted, (displacement - predicted).norm(), k_err});
      }
      x += displacement;
    }
    x = denoise_step(strong, x, k);
    ++traj.score_evaluations;
    detail::push_state(traj, k - 1, x);
  }
  return traj;
}

}  // namespace w2sd
