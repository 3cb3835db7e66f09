#include "w2sd/sampler.hpp"

#include "w2sd/rng.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace w2sd {

std::string to_string(ReflectionPlacement placement) {
  return placement == ReflectionPlacement::kFirst ? "first" : "last";
}

ReflectionPlacement placement_from_string(const std::string& name) {
  if (name == "first") return ReflectionPlacement::kFirst;
  if (name == "last") return ReflectionPlacement::kLast;
  throw std::invalid_argument("unknown placement '" + name + "' (expected first or last)");
}

void SamplerConfig::validate() const {
  if (lambda < 0 || lambda > schedule.steps()) {
    throw std::invalid_argument("lambda = " + std::to_string(lambda) + " violates 0 <= lambda <= T = " +
                                std::to_string(schedule.steps()));
  }
}

bool SamplerConfig::modifies(int k) const {
  if (placement == ReflectionPlacement::kFirst) return k > schedule.steps() - lambda;
  return k <= lambda;
}

Vector sample_prior(const NoiseSchedule& schedule, int dim, std::uint64_t seed) {
  if (dim < 1) throw std::invalid_argument("prior dimension must be >= 1");
  Rng rng(seed);
  return std::sqrt(schedule.accumulated_variance(schedule.steps())) * rng.gaussian_vector(dim);
}

namespace detail {

void check_finite(const Vector& v, const ScoreModel& model, const Vector& x, int k) {
  if (v.allFinite()) return;
  std::ostringstream msg;
  msg << "non-finite score from model '" << model.label() << "' at k=" << k << ", x=[";
  for (int i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << std::setprecision(17) << x[i];
  msg << "]";
  throw NumericalError(msg.str());
}

Trajectory start_chain(const ScoreModel& model, const SamplerConfig& config, std::vector<std::string> labels) {
  config.validate();
  if (!(model.schedule() == config.schedule)) {
    throw std::invalid_argument("model '" + model.label() + "' was built for a different noise schedule");
  }
  Trajectory traj;
  traj.seed = config.seed;
  traj.model_labels = std::move(labels);
  traj.states.reserve(config.schedule.steps() + 1);
  push_state(traj, config.schedule.steps(), sample_prior(config.schedule, model.dim(), config.seed));
  return traj;
}

void push_state(Trajectory& traj, int k, const Vector& x) { traj.states.push_back({k, x}); }

}  // namespace detail

Vector denoise_step(const ScoreModel& model, const Vector& x, int k) {
  model.schedule().check_step_index(k);
  const Vector s = model.score(x, k);
  detail::check_finite(s, model, x, k);
  return x + model.schedule().step_coefficient(k) * s;
}

Vector invert_step(const ScoreModel& model, const Vector& x_prev, int k) {
  model.schedule().check_step_index(k);
  const Vector s = model.score(x_prev, k);
  detail::check_finite(s, model, x_prev, k);
  return x_prev - model.schedule().step_coefficient(k) * s;
}

Trajectory run_standard(const ScoreModel& model, const SamplerConfig& config) {
  Trajectory traj = detail::start_chain(model, config, {model.label()});
  Vector x = traj.states.back().x;
  for (int k = config.schedule.steps(); k >= 1; --k) {
    x = denoise_step(model, x, k);
    ++traj.score_evaluations;
    detail::push_state(traj, k - 1, x);
  }
  return traj;
}

namespace {

void write_header(std::ostream& out, const std::string& config_hash) {
  out << "# config_hash=" << config_hash << "\n";
  out << std::setprecision(17);
}

}  // namespace

void write_trajectories_csv(std::ostream& out, const std::vector<Trajectory>& chains, const NoiseSchedule& schedule,
                            const std::string& config_hash) {
  write_header(out, config_hash);
  const int d = chains.empty() ? 1 : chains.front().dim();
  out << "chain,k,t";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  out << "\n";
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (const auto& s : chains[c].states) {
      out << c << ',' << s.k << ',' << schedule.time(s.k);
      for (int i = 0; i < d; ++i) out << ',' << s.x[i];
      out << "\n";
    }
  }
}

void write_diagnostics_csv(std::ostream& out, const std::vector<Trajectory>& chains, const NoiseSchedule& schedule,
                           const std::string& config_hash) {
  write_header(out, config_hash);
  const int d = chains.empty() ? 1 : chains.front().dim();
  out << "chain,k,t";
  for (int i = 0; i < d; ++i) out << ",disp" << i;
  for (int i = 0; i < d; ++i) out << ",pred" << i;
  out << ",discrepancy,k_err\n";
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (const auto& r : chains[c].reflections) {
      out << c << ',' << r.k << ',' << schedule.time(r.k);
      for (int i = 0; i < d; ++i) out << ',' << r.displacement[i];
      for (int i = 0; i < d; ++i) out << ',' << r.predicted[i];
      out << ',' << r.discrepancy << ',' << r.k_err << "\n";
    }
  }
}

void write_acceptance_csv(std::ostream& out, const std::vector<Trajectory>& chains, const std::string& config_hash) {
  write_header(out, config_hash);
  out << "chain,k,draws_used,accepted_cosine,fallback,skipped\n";
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (const auto& r : chains[c].resamples) {
      out << c << ',' << r.k << ',' << r.draws_used << ',' << r.accepted_cosine << ',' << (r.fallback ? 1 : 0) << ','
          << (r.skipped ? 1 : 0) << "\n";
    }
  }
}

}  // namespace w2sd
