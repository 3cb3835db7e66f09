#pragma once

#include "w2sd/sampler.hpp"
#include "w2sd/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace w2sd {

/// Runs one chain given its seed; `diagnostics` asks for per-step records.
using ChainRunner = std::function<Trajectory(std::uint64_t chain_seed, bool diagnostics)>;

struct EnsembleOptions {
  std::size_t chains = 10000;
  std::uint64_t seed = 0;
  /// Leading chains whose full trajectories (with diagnostics) are returned.
  std::size_t export_chains = 0;
  /// Keep every trajectory (without diagnostics beyond export_chains).
  bool keep_all = false;
  int threads = 1;
};

struct EnsembleResult {
  std::vector<Vector> terminals;
  std::vector<Trajectory> trajectories;  // export_chains or all chains when keep_all
  std::uint64_t score_evaluations = 0;
  std::uint64_t resample_draws = 0;
  std::uint64_t resample_fallbacks = 0;
  std::uint64_t resample_skipped = 0;
};

/// Seed of chain i under ensemble seed s. Independent of thread count.
std::uint64_t chain_seed(std::uint64_t ensemble_seed, std::size_t chain);

/// Runs `options.chains` chains, splitting them across threads; results are
/// stored by chain index so the output does not depend on scheduling.
EnsembleResult run_ensemble(const ChainRunner& runner, const EnsembleOptions& options);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Rethrows the first exception.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace w2sd
