#pragma once

#include "w2sd/gaussian_mixture.hpp"
#include "w2sd/metrics.hpp"
#include "w2sd/rng.hpp"
#include "w2sd/schedule.hpp"
#include "w2sd/score_model.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace testing {

using w2sd::GaussianMixture;
using w2sd::Matrix;
using w2sd::NoiseSchedule;
using w2sd::Vector;

inline Vector vec1(double x) { return Vector::Constant(1, x); }

inline Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

/// Four modes at (+-4, +-4) with unequal, correlated covariances.
inline GaussianMixture four_mode(const std::vector<double>& weights) {
  std::vector<w2sd::MixtureComponent> comps;
  const double means[4][2] = {{-4, -4}, {-4, 4}, {4, -4}, {4, 4}};
  const double rho[4] = {0.3, -0.2, 0.0, 0.5};
  for (int i = 0; i < 4; ++i) {
    Matrix cov(2, 2);
    cov << 1.0 + 0.2 * i, rho[i], rho[i], 0.8;
    comps.push_back({weights[i], vec2(means[i][0], means[i][1]), cov});
  }
  return GaussianMixture(comps);
}

/// Fourth-order central difference of log p_{t_k} along each axis.
inline Vector fd_gradient(const GaussianMixture& gmm, const NoiseSchedule& s, const Vector& x, int k, double h) {
  Vector g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    auto f = [&](double off) {
      Vector y = x;
      y[i] += off;
      return w2sd::log_noised_density(gmm, s, y, k);
    };
    g[i] = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
  }
  return g;
}

inline double sample_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

inline double mean(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  return m / static_cast<double>(v.size());
}

/// L1 distance between the normalised histograms of a and b on [lo, hi).
inline double histogram_l1(const std::vector<double>& a, const std::vector<double>& b, int bins, double lo,
                           double hi) {
  const auto ha = w2sd::histogram(a, bins, lo, hi);
  const auto hb = w2sd::histogram(b, bins, lo, hi);
  double l1 = 0.0;
  for (int i = 0; i < bins; ++i) {
    l1 += std::abs(static_cast<double>(ha[i]) / a.size() - static_cast<double>(hb[i]) / b.size());
  }
  return l1;
}

/// Score model with s(x, k) = a(k) * x + b(k) in every coordinate (a single
/// Gaussian when a < 0); used where closed forms are needed.
class LinearModel final : public w2sd::ScoreModel {
 public:
  LinearModel(NoiseSchedule schedule, double mean, double variance, std::string label = "linear")
      : schedule_(schedule), mean_(mean), variance_(variance), label_(std::move(label)) {}

  Vector score(const Vector& x, int k) const override {
    const double v = variance_ + schedule_.accumulated_variance(k);
    return (Vector::Constant(x.size(), mean_) - x) / v;
  }
  int dim() const override { return 1; }
  const NoiseSchedule& schedule() const override { return schedule_; }
  const std::string& label() const override { return label_; }
  nlohmann::json provenance() const override { return {{"linear", {mean_, variance_}}}; }

  double slope(int k) const { return -1.0 / (variance_ + schedule_.accumulated_variance(k)); }

 private:
  NoiseSchedule schedule_;
  double mean_;
  double variance_;
  std::string label_;
};

/// s(x, k) = 0 everywhere.
class ZeroModel final : public w2sd::ScoreModel {
 public:
  ZeroModel(NoiseSchedule schedule, int dim) : schedule_(schedule), dim_(dim) {}
  Vector score(const Vector& x, int) const override { return Vector::Zero(x.size()); }
  int dim() const override { return dim_; }
  const NoiseSchedule& schedule() const override { return schedule_; }
  const std::string& label() const override { return label_; }
  nlohmann::json provenance() const override { return {{"zero", true}}; }

 private:
  NoiseSchedule schedule_;
  int dim_;
  std::string label_ = "zero";
};

}  // namespace testing

namespace testing {

/// sqrt(sum |s_model - s_exact|^2 / sum |s_exact|^2) over a 1-D grid restricted
/// to points where the exact noised density is at least 1e-3 of its grid max.
inline double region_relative_l2(const w2sd::ScoreModel& model, const GaussianMixture& exact, int k) {
  const auto& s = model.schedule();
  const double lim = 6.0 + 6.0 * std::sqrt(1.0 + s.accumulated_variance(k));
  const int n = 801;
  std::vector<double> xs, dens;
  double peak = 0.0;
  for (int i = 0; i < n; ++i) {
    xs.push_back(-lim + 2.0 * lim * i / (n - 1));
    dens.push_back(w2sd::noised_density(exact, s, vec1(xs.back()), k).value);
    peak = std::max(peak, dens.back());
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    if (dens[i] < 1e-3 * peak) continue;
    const Vector ref = w2sd::analytic_score(exact, s, vec1(xs[i]), k);
    num += (model.score(vec1(xs[i]), k) - ref).squaredNorm();
    den += ref.squaredNorm();
  }
  return std::sqrt(num / den);
}

/// Consecutive block means of the loss over the final half: each block may
/// exceed its predecessor by at most three standard errors of the difference.
inline bool loss_blocks_non_increasing(const std::vector<double>& loss, std::size_t block, double* worst = nullptr) {
  const std::size_t start = loss.size() / 2;
  std::vector<double> means, errs;
  for (std::size_t b = start; b + block <= loss.size(); b += block) {
    double m = 0.0, ss = 0.0;
    for (std::size_t i = b; i < b + block; ++i) m += loss[i];
    m /= static_cast<double>(block);
    for (std::size_t i = b; i < b + block; ++i) ss += (loss[i] - m) * (loss[i] - m);
    means.push_back(m);
    errs.push_back(ss / (block - 1.0) / static_cast<double>(block));
  }
  double worst_z = -1e300;
  for (std::size_t i = 1; i < means.size(); ++i) {
    worst_z = std::max(worst_z, (means[i] - means[i - 1]) / std::sqrt(errs[i] + errs[i - 1]));
  }
  if (worst) *worst = worst_z;
  return worst_z <= 3.0;
}

}  // namespace testing
