#include "w2sd/score_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace w2sd {
namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

MixtureScoreModel::MixtureScoreModel(GaussianMixture mixture, NoiseSchedule schedule, std::string label)
    : mixture_(std::move(mixture)), schedule_(std::move(schedule)), label_(std::move(label)) {
  const int d = mixture_.dim();
  for (std::size_t i = 0; i < mixture_.size(); ++i) {
    if (mixture_.component(i).weight > 0.0) active_.push_back(i);
  }
  levels_.resize(schedule_.steps() + 1);
  for (int k = 0; k <= schedule_.steps(); ++k) {
    const double variance = schedule_.accumulated_variance(k);
    auto& level = levels_[k];
    for (std::size_t i : active_) {
      const auto& c = mixture_.component(i);
      Matrix cov = c.covariance;
      cov.diagonal().array() += variance;
      Eigen::LLT<Matrix> llt(cov);
      const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      level.precision.push_back(llt.solve(Matrix::Identity(d, d)));
      level.log_constant.push_back(std::log(c.weight) - 0.5 * (d * kLog2Pi + log_det));
    }
  }
}

Vector MixtureScoreModel::score(const Vector& x, int k) const {
  schedule_.check_index(k);
  if (x.size() != mixture_.dim()) throw std::invalid_argument("score: point dimension mismatch");
  const auto& level = levels_[k];
  const std::size_t m = active_.size();
  const int d = mixture_.dim();
  if (m == 1) return level.precision[0] * (mixture_.component(active_[0]).mean - x);

  Matrix pulls(d, static_cast<Eigen::Index>(m));
  double logs[16];
  std::vector<double> heap_logs;
  double* log_w = logs;
  if (m > 16) {
    heap_logs.resize(m);
    log_w = heap_logs.data();
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const Vector diff = mixture_.component(active_[j]).mean - x;
    pulls.col(static_cast<Eigen::Index>(j)).noalias() = level.precision[j] * diff;
    log_w[j] = level.log_constant[j] - 0.5 * diff.dot(pulls.col(static_cast<Eigen::Index>(j)));
    top = std::max(top, log_w[j]);
  }
  Vector out = Vector::Zero(d);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double r = std::exp(log_w[j] - top);
    total += r;
    out += r * pulls.col(static_cast<Eigen::Index>(j));
  }
  out /= total;
  if (!out.allFinite()) throw NumericalError("mixture score is not finite");
  return out;
}

nlohmann::json MixtureScoreModel::provenance() const {
  return {{"type", "mixture"}, {"label", label_}, {"mixture", mixture_.to_json()}, {"schedule", schedule_.to_json()}};
}

nlohmann::json GuidanceConfig::to_json() const {
  return {{"conditional", conditional.to_json()}, {"unconditional", unconditional.to_json()}, {"scale", scale}};
}

GuidedScoreModel::GuidedScoreModel(GuidanceConfig config, NoiseSchedule schedule, std::string label)
    : config_(std::move(config)),
      conditional_(config_.conditional, schedule, label + ":cond"),
      unconditional_(config_.unconditional, schedule, label + ":uncond"),
      label_(std::move(label)) {
  if (config_.conditional.dim() != config_.unconditional.dim()) {
    throw std::invalid_argument("guided model: conditional and unconditional dimensions differ");
  }
  if (!std::isfinite(config_.scale)) throw std::invalid_argument("guided model: scale must be finite");
}

Vector GuidedScoreModel::score(const Vector& x, int k) const {
  const Vector su = unconditional_.score(x, k);
  const Vector sc = conditional_.score(x, k);
  return su + config_.scale * (sc - su);
}

Vector GuidedScoreModel::condition_difference(const Vector& x, int k) const {
  return conditional_.score(x, k) - unconditional_.score(x, k);
}

nlohmann::json GuidedScoreModel::provenance() const {
  return {{"type", "guided"}, {"label", label_}, {"guidance", config_.to_json()}, {"schedule", schedule().to_json()}};
}

std::shared_ptr<const MixtureScoreModel> make_analytic_model(const GaussianMixture& gmm, const NoiseSchedule& schedule,
                                                             std::string label) {
  return std::make_shared<const MixtureScoreModel>(gmm, schedule, std::move(label));
}

std::shared_ptr<const GuidedScoreModel> make_guided_model(const GuidanceConfig& config, const NoiseSchedule& schedule,
                                                          std::string label) {
  return std::make_shared<const GuidedScoreModel>(config, schedule, std::move(label));
}

void check_compatible(const ScoreModel& a, const ScoreModel& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("models '" + a.label() + "' and '" + b.label() + "' differ in dimension");
  if (!(a.schedule() == b.schedule())) {
    throw std::invalid_argument("models '" + a.label() + "' and '" + b.label() + "' use different noise schedules");
  }
}

}  // namespace w2sd
