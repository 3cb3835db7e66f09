#pragma once

#include "w2sd/types.hpp"

#include <cstdint>
#include <random>

namespace w2sd {

/// splitmix64 finaliser; maps (base seed, stream index) to an independent seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// Seeded generator for one chain or one data draw. Not thread-safe; each
/// worker owns its own instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return uniform_(engine_); }
  double gaussian() { return normal_(engine_); }
  Vector gaussian_vector(int dim);
  std::uint64_t next_u64() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace w2sd
