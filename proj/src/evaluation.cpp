#include "w2sd/evaluation.hpp"

#include "w2sd/metrics.hpp"
#include "w2sd/reflection.hpp"
#include "w2sd/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace w2sd {

std::string config_hash(const nlohmann::json& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json per_seed = nlohmann::json::array();
  for (const auto& s : seeds) {
    per_seed.push_back({{"seed", s.seed},
                        {"mode_fractions", s.mode_fractions},
                        {"mode_balance_error", s.mode_balance_error},
                        {"distance", s.distance},
                        {"score_evaluations", s.score_evaluations}});
  }
  return {{"config_hash", config_hash},
          {"arm", arm},
          {"method", method},
          {"model_labels", model_labels},
          {"provenance", provenance},
          {"n_chains", n_chains},
          {"steps", steps},
          {"lambda", lambda},
          {"mode_fractions", mode_fractions},
          {"mode_balance_error", mode_balance_error},
          {"distance", {{"kind", distance_kind}, {"mean", distance}, {"std", distance_std}}},
          {"score_evaluations_per_chain",
           {{"measured", evaluations_per_chain}, {"expected", expected_evaluations_per_chain}}},
          {"cosine_profile", cosine_summary},
          {"per_seed", per_seed},
          {"extras", extras}};
}

void ExperimentReport::check_invariants() const {
  double total = 0.0;
  for (double f : mode_fractions) total += f;
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::logic_error("arm '" + arm + "': mode fractions sum to " + std::to_string(total));
  }
  if (evaluations_per_chain != static_cast<double>(expected_evaluations_per_chain)) {
    throw std::logic_error("arm '" + arm + "': measured " + std::to_string(evaluations_per_chain) +
                           " score evaluations per chain, expected " +
                           std::to_string(expected_evaluations_per_chain));
  }
}

ArmRun evaluate_arm(const ArmSpec& spec, const std::vector<std::uint64_t>& seeds, const Evaluation& evaluation) {
  if (seeds.empty()) throw std::invalid_argument("evaluate_arm: no seeds");
  if (evaluation.mode_target.size() != evaluation.mode_reference.size()) {
    throw std::invalid_argument("evaluate_arm: mode target does not match the mode reference");
  }
  const auto start = std::chrono::steady_clock::now();
  ArmRun run;
  auto& rep = run.report;
  rep.config_hash = evaluation.config_hash;
  rep.arm = spec.name;
  rep.method = spec.method;
  rep.model_labels = spec.labels;
  rep.provenance = spec.provenance;
  rep.n_chains = evaluation.chains;
  rep.steps = spec.steps;
  rep.lambda = spec.lambda;
  rep.expected_evaluations_per_chain = spec.expected_evaluations;
  rep.extras = spec.extras;
  rep.mode_fractions.assign(evaluation.mode_reference.size(), 0.0);

  std::uint64_t evaluations = 0, draws = 0, fallbacks = 0, skipped = 0;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    EnsembleOptions opts;
    opts.chains = evaluation.chains;
    opts.seed = seeds[s];
    opts.threads = evaluation.threads;
    opts.export_chains = s == 0 ? evaluation.export_chains : 0;
    opts.keep_all = s == 0 && evaluation.keep_all;
    EnsembleResult res = run_ensemble(spec.runner, opts);

    SeedResult sr;
    sr.seed = seeds[s];
    sr.mode_fractions = mode_fractions(res.terminals, evaluation.mode_reference);
    for (std::size_t i = 0; i < sr.mode_fractions.size(); ++i) {
      sr.mode_balance_error += std::abs(sr.mode_fractions[i] - evaluation.mode_target[i]);
    }
    sr.distance = distance_to_reference(res.terminals, evaluation.reference_samples, derive_seed(seeds[s], 0xd157),
                                        evaluation.projections);
    sr.score_evaluations = res.score_evaluations;
    rep.distance_kind = distance_kind(static_cast<int>(res.terminals.front().size()));
    evaluations += res.score_evaluations;
    draws += res.resample_draws;
    fallbacks += res.resample_fallbacks;
    skipped += res.resample_skipped;
    rep.seeds.push_back(sr);
    if (s == 0) {
      run.trajectories = std::move(res.trajectories);
      run.terminals = std::move(res.terminals);
    }
  }

  const double n = static_cast<double>(seeds.size());
  for (const auto& sr : rep.seeds) {
    for (std::size_t i = 0; i < sr.mode_fractions.size(); ++i) rep.mode_fractions[i] += sr.mode_fractions[i] / n;
    rep.mode_balance_error += sr.mode_balance_error / n;
    rep.distance += sr.distance / n;
  }
  if (seeds.size() > 1) {
    double ss = 0.0;
    for (const auto& sr : rep.seeds) ss += (sr.distance - rep.distance) * (sr.distance - rep.distance);
    rep.distance_std = std::sqrt(ss / (n - 1.0));
  }
  rep.evaluations_per_chain = static_cast<double>(evaluations) / (n * static_cast<double>(evaluation.chains));
  if (draws > 0 || fallbacks > 0 || skipped > 0) {
    rep.extras["resample"] = {{"draws", draws}, {"fallbacks", fallbacks}, {"skipped", skipped}};
  }
  rep.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  rep.check_invariants();
  return run;
}

EqualComputeResult equal_compute_compare(const ModelFactory& strong, const ModelFactory& weak,
                                         const NoiseSchedule& base, int t_std, const std::vector<std::uint64_t>& seeds,
                                         const Evaluation& evaluation) {
  if (t_std < 4) throw std::invalid_argument("equal_compute_compare: T_std must be >= 4");
  EqualComputeResult out;
  out.t_std = t_std;
  out.t_w2s = t_std / 2;
  out.lambda = out.t_w2s / 2;
  if (out.t_w2s + 2 * out.lambda > t_std) {
    throw std::logic_error("equal compute violated: T_w2s + 2 lambda > T_std");
  }

  const NoiseSchedule std_schedule(base.sigma(), t_std, base.drift());
  const NoiseSchedule w2s_schedule(base.sigma(), out.t_w2s, base.drift());
  const ModelPtr strong_std = strong(std_schedule);
  const ModelPtr strong_w2s = strong(w2s_schedule);
  const ModelPtr weak_w2s = weak(w2s_schedule);

  ArmSpec std_arm;
  std_arm.name = "standard-T" + std::to_string(t_std);
  std_arm.method = "standard";
  std_arm.labels = {strong_std->label()};
  std_arm.provenance = {{"strong", strong_std->provenance()}};
  std_arm.steps = t_std;
  std_arm.expected_evaluations = static_cast<std::uint64_t>(t_std);
  std_arm.runner = [strong_std, std_schedule](std::uint64_t seed, bool diagnostics) {
    return run_standard(*strong_std, SamplerConfig{std_schedule, 0, seed, ReflectionPlacement::kFirst, diagnostics});
  };

  ArmSpec w2s_arm;
  w2s_arm.name = "w2sd-T" + std::to_string(out.t_w2s);
  w2s_arm.method = "w2sd";
  w2s_arm.labels = {strong_w2s->label(), weak_w2s->label()};
  w2s_arm.provenance = {{"strong", strong_w2s->provenance()}, {"weak", weak_w2s->provenance()}};
  w2s_arm.steps = out.t_w2s;
  w2s_arm.lambda = out.lambda;
  w2s_arm.expected_evaluations = static_cast<std::uint64_t>(out.t_w2s + 2 * out.lambda);
  const int lambda = out.lambda;
  w2s_arm.runner = [strong_w2s, weak_w2s, w2s_schedule, lambda](std::uint64_t seed, bool diagnostics) {
    return run_w2sd(*strong_w2s, *weak_w2s,
                    SamplerConfig{w2s_schedule, lambda, seed, ReflectionPlacement::kFirst, diagnostics});
  };

  out.standard = evaluate_arm(std_arm, seeds, evaluation);
  out.w2sd = evaluate_arm(w2s_arm, seeds, evaluation);
  const auto measured = static_cast<std::uint64_t>(out.w2sd.report.evaluations_per_chain);
  if (measured > static_cast<std::uint64_t>(out.standard.report.evaluations_per_chain)) {
    throw std::logic_error("equal compute violated by measured evaluation counts");
  }
  return out;
}

}  // namespace w2sd
