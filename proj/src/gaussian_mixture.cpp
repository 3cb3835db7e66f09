#include "w2sd/gaussian_mixture.hpp"

#include "w2sd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace w2sd {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_dim(const GaussianMixture& gmm, const Vector& x) {
  if (x.size() != gmm.dim()) {
    throw std::invalid_argument("point dimension " + std::to_string(x.size()) + " does not match mixture dimension " +
                                std::to_string(gmm.dim()));
  }
  if (!x.allFinite()) throw NumericalError("non-finite input point");
}

// Per-component log N(x; mu, Sigma + V I) and the gradient direction
// (Sigma + V I)^{-1} (mu - x).
struct ComponentTerm {
  double log_weighted = 0.0;
  Vector pull;
};

ComponentTerm component_term(const MixtureComponent& c, const Vector& x, double variance) {
  const auto d = static_cast<int>(x.size());
  Matrix cov = c.covariance;
  cov.diagonal().array() += variance;
  Eigen::LLT<Matrix> llt(cov);
  Vector diff = c.mean - x;
  Vector pull = llt.solve(diff);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  ComponentTerm out;
  out.log_weighted = std::log(c.weight) - 0.5 * (d * kLog2Pi + log_det + diff.dot(pull));
  out.pull = std::move(pull);
  return out;
}

}  // namespace

GaussianMixture::GaussianMixture(std::vector<MixtureComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw std::invalid_argument("mixture needs at least one component");
  dim_ = static_cast<int>(components_.front().mean.size());
  if (dim_ < 1) throw std::invalid_argument("mixture dimension must be >= 1");
  double total = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    const auto& c = components_[i];
    const std::string tag = "component " + std::to_string(i);
    if (!(c.weight >= 0.0) || !std::isfinite(c.weight)) throw std::invalid_argument(tag + ": weight must be >= 0");
    if (c.mean.size() != dim_) throw std::invalid_argument(tag + ": mean dimension mismatch");
    if (c.covariance.rows() != dim_ || c.covariance.cols() != dim_) {
      throw std::invalid_argument(tag + ": covariance must be " + std::to_string(dim_) + "x" + std::to_string(dim_));
    }
    if (!c.mean.allFinite() || !c.covariance.allFinite()) throw std::invalid_argument(tag + ": non-finite entries");
    const double scale = std::max(1.0, c.covariance.cwiseAbs().maxCoeff());
    if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument(tag + ": covariance is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c.covariance, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() <= 0.0) throw std::invalid_argument(tag + ": covariance is not positive definite");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("mixture weights sum to " + std::to_string(total) + ", expected 1");
  }
}

GaussianMixture GaussianMixture::two_peak(double left_weight, double separation, double variance) {
  std::vector<MixtureComponent> comps(2);
  comps[0] = {left_weight, Vector::Constant(1, -separation), Matrix::Constant(1, 1, variance)};
  comps[1] = {1.0 - left_weight, Vector::Constant(1, separation), Matrix::Constant(1, 1, variance)};
  return GaussianMixture(std::move(comps));
}

GaussianMixture GaussianMixture::single(const Vector& mean, double variance) {
  const auto d = static_cast<int>(mean.size());
  return GaussianMixture({{1.0, mean, Matrix::Identity(d, d) * variance}});
}

GaussianMixture GaussianMixture::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("components") || !j.at("components").is_array()) {
    throw std::invalid_argument("mixture document needs a \"components\" array");
  }
  for (const auto& [key, _] : j.items()) {
    if (key != "components") throw std::invalid_argument("unknown mixture field '" + key + "'");
  }
  std::vector<MixtureComponent> comps;
  for (const auto& c : j.at("components")) {
    for (const auto& [key, _] : c.items()) {
      if (key != "weight" && key != "mean" && key != "cov") throw std::invalid_argument("unknown component field '" + key + "'");
    }
    MixtureComponent mc;
    mc.weight = c.at("weight").get<double>();
    const auto mean = c.at("mean").get<std::vector<double>>();
    mc.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    const auto rows = c.at("cov").get<std::vector<std::vector<double>>>();
    mc.covariance.resize(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != rows[0].size()) throw std::invalid_argument("ragged covariance matrix");
      for (std::size_t col = 0; col < rows[r].size(); ++col) mc.covariance(r, col) = rows[r][col];
    }
    comps.push_back(std::move(mc));
  }
  return GaussianMixture(std::move(comps));
}

nlohmann::json GaussianMixture::to_json() const {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : components_) {
    nlohmann::json cov = nlohmann::json::array();
    for (int r = 0; r < dim_; ++r) {
      std::vector<double> row(dim_);
      for (int col = 0; col < dim_; ++col) row[col] = c.covariance(r, col);
      cov.push_back(row);
    }
    comps.push_back({{"weight", c.weight}, {"mean", std::vector<double>(c.mean.data(), c.mean.data() + dim_)}, {"cov", cov}});
  }
  return {{"components", comps}};
}

std::vector<double> GaussianMixture::weights() const {
  std::vector<double> w;
  w.reserve(components_.size());
  for (const auto& c : components_) w.push_back(c.weight);
  return w;
}

bool operator==(const GaussianMixture& a, const GaussianMixture& b) {
  if (a.dim_ != b.dim_ || a.components_.size() != b.components_.size()) return false;
  for (std::size_t i = 0; i < a.components_.size(); ++i) {
    const auto& x = a.components_[i];
    const auto& y = b.components_[i];
    if (x.weight != y.weight || x.mean != y.mean || x.covariance != y.covariance) return false;
  }
  return true;
}

double log_noised_density(const GaussianMixture& gmm, const NoiseSchedule& schedule, const Vector& x, int k) {
  check_dim(gmm, x);
  const double variance = schedule.accumulated_variance(k);
  std::vector<double> logs;
  logs.reserve(gmm.size());
  for (const auto& c : gmm.components()) {
    if (c.weight == 0.0) continue;
    logs.push_back(component_term(c, x, variance).log_weighted);
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - top);
  return top + std::log(acc);
}

DensityValue noised_density(const GaussianMixture& gmm, const NoiseSchedule& schedule, const Vector& x, int k) {
  const double value = std::exp(log_noised_density(gmm, schedule, x, k));
  if (value < kDensityFloor) return {kDensityFloor, true};
  return {value, false};
}

std::vector<double> responsibilities(const GaussianMixture& gmm, const Vector& x, double variance) {
  check_dim(gmm, x);
  std::vector<double> r(gmm.size(), 0.0);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < gmm.size(); ++i) {
    const auto& c = gmm.component(i);
    r[i] = c.weight == 0.0 ? -std::numeric_limits<double>::infinity() : component_term(c, x, variance).log_weighted;
    top = std::max(top, r[i]);
  }
  double total = 0.0;
  for (double& v : r) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : r) v /= total;
  return r;
}

Vector analytic_score(const GaussianMixture& gmm, const NoiseSchedule& schedule, const Vector& x, int k) {
  check_dim(gmm, x);
  const double variance = schedule.accumulated_variance(k);
  std::vector<ComponentTerm> terms;
  terms.reserve(gmm.size());
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& c : gmm.components()) {
    if (c.weight == 0.0) continue;
    terms.push_back(component_term(c, x, variance));
    top = std::max(top, terms.back().log_weighted);
  }
  Vector score = Vector::Zero(gmm.dim());
  double total = 0.0;
  for (const auto& t : terms) {
    const double r = std::exp(t.log_weighted - top);
    total += r;
    score += r * t.pull;
  }
  score /= total;
  if (!score.allFinite()) throw NumericalError("analytic score is not finite");
  return score;
}

std::vector<Vector> sample_mixture(const GaussianMixture& gmm, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_mixture needs n >= 1");
  Rng rng(seed);
  std::vector<Matrix> factors;
  for (const auto& c : gmm.components()) factors.push_back(Eigen::LLT<Matrix>(c.covariance).matrixL());
  const auto weights = gmm.weights();
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  std::vector<Vector> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const double u = rng.uniform() * cdf.back();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    i = std::min(i, weights.size() - 1);
    out.push_back(gmm.component(i).mean + factors[i] * rng.gaussian_vector(gmm.dim()));
  }
  return out;
}

std::vector<Vector> sample_components(const GaussianMixture& gmm, const std::vector<std::size_t>& counts,
                                      std::uint64_t seed) {
  if (counts.size() != gmm.size()) throw std::invalid_argument("need one count per mixture component");
  Rng rng(seed);
  std::vector<Vector> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const Matrix factor = Eigen::LLT<Matrix>(gmm.component(i).covariance).matrixL();
    for (std::size_t s = 0; s < counts[i]; ++s) out.push_back(gmm.component(i).mean + factor * rng.gaussian_vector(gmm.dim()));
  }
  return out;
}

}  // namespace w2sd
