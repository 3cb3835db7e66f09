#include "w2sd/ensemble.hpp"

#include "w2sd/rng.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace w2sd {

std::uint64_t chain_seed(std::uint64_t ensemble_seed, std::size_t chain) {
  return derive_seed(derive_seed(ensemble_seed, 0x5eed), chain);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(n);
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(workers, n); ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

EnsembleResult run_ensemble(const ChainRunner& runner, const EnsembleOptions& options) {
  if (options.chains < 1) throw std::invalid_argument("ensemble needs at least one chain");
  const std::size_t n = options.chains;
  const std::size_t kept = options.keep_all ? n : std::min(options.export_chains, n);
  EnsembleResult result;
  result.terminals.resize(n);
  result.trajectories.resize(kept);
  std::vector<std::uint64_t> evals(n), draws(n), fallbacks(n), skipped(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    Trajectory traj = runner(chain_seed(options.seed, i), i < options.export_chains);
    result.terminals[i] = traj.terminal();
    evals[i] = traj.score_evaluations;
    for (const auto& r : traj.resamples) {
      draws[i] += static_cast<std::uint64_t>(r.draws_used);
      fallbacks[i] += r.fallback ? 1 : 0;
      skipped[i] += r.skipped ? 1 : 0;
    }
    if (i < kept) result.trajectories[i] = std::move(traj);
  });
  for (std::size_t i = 0; i < n; ++i) {
    result.score_evaluations += evals[i];
    result.resample_draws += draws[i];
    result.resample_fallbacks += fallbacks[i];
    result.resample_skipped += skipped[i];
  }
  return result;
}

}  // namespace w2sd
