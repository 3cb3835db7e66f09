#pragma once

#include "w2sd/gaussian_mixture.hpp"
#include "w2sd/schedule.hpp"
#include "w2sd/types.hpp"

#include <json.hpp>

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace w2sd {

/// A model "M": maps (point, grid index) to an estimate of grad log p_{t_k}.
///
/// Implementations are immutable after construction and must be safe to call
/// concurrently from many chains.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual Vector score(const Vector& x, int k) const = 0;
  virtual int dim() const = 0;
  virtual const NoiseSchedule& schedule() const = 0;
  virtual const std::string& label() const = 0;
  /// What backs this model (mixture, guidance config, or training config).
  virtual nlohmann::json provenance() const = 0;
};

using ModelPtr = std::shared_ptr<const ScoreModel>;

/// Exact score of a Gaussian mixture under the forward process.
///
/// Per-grid-index precisions and normalisers are computed once at
/// construction; score() matches analytic_score() to rounding.
class MixtureScoreModel final : public ScoreModel {
 public:
  MixtureScoreModel(GaussianMixture mixture, NoiseSchedule schedule, std::string label);

  Vector score(const Vector& x, int k) const override;
  int dim() const override { return mixture_.dim(); }
  const NoiseSchedule& schedule() const override { return schedule_; }
  const std::string& label() const override { return label_; }
  nlohmann::json provenance() const override;

  const GaussianMixture& mixture() const { return mixture_; }

 private:
  struct Level {
    std::vector<Matrix> precision;
    std::vector<double> log_constant;
  };

  GaussianMixture mixture_;
  NoiseSchedule schedule_;
  std::string label_;
  std::vector<std::size_t> active_;
  std::vector<Level> levels_;
};

struct GuidanceConfig {
  GaussianMixture conditional;
  GaussianMixture unconditional;
  double scale = 1.0;

  nlohmann::json to_json() const;
};

/// Classifier-free-guidance analog: s_u + w (s_c - s_u).
class GuidedScoreModel final : public ScoreModel {
 public:
  GuidedScoreModel(GuidanceConfig config, NoiseSchedule schedule, std::string label);

  Vector score(const Vector& x, int k) const override;
  int dim() const override { return conditional_.dim(); }
  const NoiseSchedule& schedule() const override { return conditional_.schedule(); }
  const std::string& label() const override { return label_; }
  nlohmann::json provenance() const override;

  double scale() const { return config_.scale; }
  /// s_c - s_u at (x, k).
  Vector condition_difference(const Vector& x, int k) const;

 private:
  GuidanceConfig config_;
  MixtureScoreModel conditional_;
  MixtureScoreModel unconditional_;
  std::string label_;
};

std::shared_ptr<const MixtureScoreModel> make_analytic_model(const GaussianMixture& gmm, const NoiseSchedule& schedule,
                                                             std::string label = "analytic");

std::shared_ptr<const GuidedScoreModel> make_guided_model(const GuidanceConfig& config, const NoiseSchedule& schedule,
                                                          std::string label = "guided");

/// Forwards to another model and counts score() calls.
class CountingModel final : public ScoreModel {
 public:
  explicit CountingModel(ModelPtr inner) : inner_(std::move(inner)) {}

  Vector score(const Vector& x, int k) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_->score(x, k);
  }
  int dim() const override { return inner_->dim(); }
  const NoiseSchedule& schedule() const override { return inner_->schedule(); }
  const std::string& label() const override { return inner_->label(); }
  nlohmann::json provenance() const override { return inner_->provenance(); }

  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }
  void reset() { calls_.store(0, std::memory_order_relaxed); }

 private:
  ModelPtr inner_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

/// Throws std::invalid_argument unless both models share dimension and schedule.
void check_compatible(const ScoreModel& a, const ScoreModel& b);

}  // namespace w2sd
