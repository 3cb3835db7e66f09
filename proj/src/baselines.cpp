#include "w2sd/baselines.hpp"

#include "w2sd/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace w2sd {

std::string to_string(NoiseSelection selection) {
  switch (selection) {
    case NoiseSelection::kNone: return "none";
    case NoiseSelection::kAcceptPositive: return "accept-positive";
    case NoiseSelection::kAcceptNegative: return "accept-negative";
  }
  return "none";
}

NoiseSelection selection_from_string(const std::string& name) {
  if (name == "none") return NoiseSelection::kNone;
  if (name == "accept-positive") return NoiseSelection::kAcceptPositive;
  if (name == "accept-negative") return NoiseSelection::kAcceptNegative;
  throw std::invalid_argument("unknown selection '" + name + "'");
}

std::string to_string(AutoGuidanceMode mode) { return mode == AutoGuidanceMode::kLatent ? "latent" : "score"; }

AutoGuidanceMode auto_guidance_mode_from_string(const std::string& name) {
  if (name == "latent") return AutoGuidanceMode::kLatent;
  if (name == "score") return AutoGuidanceMode::kScore;
  throw std::invalid_argument("unknown auto-guidance mode '" + name + "'");
}

void ResampleConfig::validate() const {
  sampler().validate();
  if (max_draws < 1) throw std::invalid_argument("max_draws must be >= 1");
}

SamplerConfig ResampleConfig::sampler() const {
  SamplerConfig c{schedule, lambda, seed, placement};
  c.diagnostics = false;
  return c;
}

double cosine_similarity(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

Vector add_noise(const Vector& x_prev, const Vector& eps, int k, const NoiseSchedule& schedule) {
  if (x_prev.size() != eps.size()) throw std::invalid_argument("add_noise: dimension mismatch");
  return x_prev + std::sqrt(schedule.increment_variance(k)) * eps;
}

namespace {

Trajectory run_resample(const ScoreModel& strong, const ScoreModel* weak, const ResampleConfig& config) {
  config.validate();
  std::vector<std::string> labels{strong.label()};
  if (weak) {
    check_compatible(strong, *weak);
    labels.push_back(weak->label());
  }
  const SamplerConfig sc = config.sampler();
  Trajectory traj = detail::start_chain(strong, sc, labels);
  Rng noise(derive_seed(config.seed, 1));
  const int d = strong.dim();
  Vector x = traj.states.back().x;
  for (int k = config.schedule.steps(); k >= 1; --k) {
    Vector x_in = x;
    if (sc.modifies(k)) {
      const Vector x_prev = denoise_step(strong, x, k);
      ++traj.score_evaluations;
      Vector eps = noise.gaussian_vector(d);
      if (weak) {
        const Vector direction = invert_step(*weak, x_prev, k) - x;
        ++traj.score_evaluations;
        ResampleRecord rec;
        rec.k = k;
        rec.draws_used = 1;
        if (direction.norm() == 0.0) {
          rec.skipped = true;
        } else {
          const bool positive = config.selection == NoiseSelection::kAcceptPositive;
          auto accepted = [positive](double cos) { return positive ? cos >= 0.0 : cos < 0.0; };
          auto better = [positive](double a, double b) { return positive ? a > b : a < b; };
          double cos = cosine_similarity(direction, eps);
          Vector best = eps;
          double best_cos = cos;
          while (!accepted(cos) && rec.draws_used < config.max_draws) {
            eps = noise.gaussian_vector(d);
            cos = cosine_similarity(direction, eps);
            ++rec.draws_used;
            if (better(cos, best_cos)) {
              best = eps;
              best_cos = cos;
            }
          }
          if (!accepted(cos)) {
            rec.fallback = true;
            eps = best;
            cos = best_cos;
          }
          rec.accepted_cosine = cos;
        }
        traj.resamples.push_back(rec);
      }
      x_in = add_noise(x_prev, eps, k, config.schedule);
    }
    x = denoise_step(strong, x_in, k);
    ++traj.score_evaluations;
    detail::push_state(traj, k - 1, x);
  }
  return traj;
}

}  // namespace

Trajectory run_resample_vanilla(const ScoreModel& strong, const ResampleConfig& config) {
  return run_resample(strong, nullptr, config);
}

Trajectory run_resample_advanced(const ScoreModel& strong, const ScoreModel& weak, const ResampleConfig& config) {
  if (config.selection == NoiseSelection::kNone) {
    throw std::invalid_argument("advanced re-sampling needs selection accept-positive or accept-negative");
  }
  return run_resample(strong, &weak, config);
}

Trajectory run_auto_guidance(const AutoGuidanceConfig& config) {
  if (!config.strong || !config.weak) throw std::invalid_argument("auto-guidance needs a strong and a weak model");
  if (!std::isfinite(config.weight)) throw std::invalid_argument("auto-guidance weight must be finite");
  const ScoreModel& strong = *config.strong;
  const ScoreModel& weak = *config.weak;
  check_compatible(strong, weak);
  SamplerConfig sc{config.schedule, 0, config.seed};
  Trajectory traj = detail::start_chain(strong, sc, {strong.label(), weak.label()});
  Vector x = traj.states.back().x;
  for (int k = config.schedule.steps(); k >= 1; --k) {
    if (config.mode == AutoGuidanceMode::kLatent) {
      const Vector good = denoise_step(strong, x, k);
      const Vector bad = denoise_step(weak, x, k);
      x = good + config.weight * (good - bad);
    } else {
      const Vector ss = strong.score(x, k);
      const Vector sw = weak.score(x, k);
      detail::check_finite(ss, strong, x, k);
      detail::check_finite(sw, weak, x, k);
      x = x + config.schedule.step_coefficient(k) * (ss + config.weight * (ss - sw));
    }
    traj.score_evaluations += 2;
    detail::push_state(traj, k - 1, x);
  }
  return traj;
}

}  // namespace w2sd
