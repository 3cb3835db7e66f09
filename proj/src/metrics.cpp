#include "w2sd/metrics.hpp"

#include "w2sd/baselines.hpp"
#include "w2sd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace w2sd {

std::vector<double> mode_fractions(std::span<const Vector> samples, const GaussianMixture& gmm) {
  if (samples.empty()) throw std::invalid_argument("mode_fractions: no samples");
  std::vector<std::size_t> counts(gmm.size(), 0);
  for (const auto& x : samples) {
    const auto r = responsibilities(gmm, x, 0.0);
    counts[static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin())]++;
  }
  std::vector<double> out(gmm.size());
  for (std::size_t i = 0; i < counts.size(); ++i) out[i] = static_cast<double>(counts[i]) / samples.size();
  return out;
}

double wasserstein1_1d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("wasserstein1_1d: need at least two samples per set");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa.size() == sb.size()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
    return acc / static_cast<double>(sa.size());
  }
  // Walk the merged quantile breakpoints i/n and j/m; both quantile functions
  // are constant between consecutive breakpoints. Cross-multiplied integer
  // comparisons keep the breakpoint order exact.
  const auto n = sa.size(), m = sb.size();
  std::size_t i = 0, j = 0;
  double acc = 0.0;
  double prev = 0.0;
  while (i < n && j < m) {
    const auto ni = (i + 1) * m, nj = (j + 1) * n;  // compare (i+1)/n with (j+1)/m
    double next;
    if (ni <= nj) {
      next = static_cast<double>(i + 1) / n;
    } else {
      next = static_cast<double>(j + 1) / m;
    }
    acc += (next - prev) * std::abs(sa[i] - sb[j]);
    prev = next;
    if (ni == nj) {
      ++i;
      ++j;
    } else if (ni < nj) {
      ++i;
    } else {
      ++j;
    }
  }
  return acc;
}

double sliced_wasserstein_2d(std::span<const Vector> a, std::span<const Vector> b, int n_projections,
                             std::uint64_t seed) {
  if (n_projections < 8) throw std::invalid_argument("sliced_wasserstein_2d: n_projections must be >= 8");
  if (a.empty() || b.empty() || a.front().size() != 2 || b.front().size() != 2) {
    throw std::invalid_argument("sliced_wasserstein_2d: expects 2-D samples");
  }
  Rng rng(seed);
  std::vector<double> pa(a.size()), pb(b.size());
  double acc = 0.0;
  for (int p = 0; p < n_projections; ++p) {
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    const double cx = std::cos(angle), cy = std::sin(angle);
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] = cx * a[i][0] + cy * a[i][1];
    for (std::size_t i = 0; i < b.size(); ++i) pb[i] = cx * b[i][0] + cy * b[i][1];
    acc += wasserstein1_1d(pa, pb);
  }
  return acc / n_projections;
}

std::vector<double> first_coordinate(std::span<const Vector> samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& x : samples) out.push_back(x[0]);
  return out;
}

double distance_to_reference(std::span<const Vector> samples, std::span<const Vector> reference, std::uint64_t seed,
                             int n_projections) {
  if (samples.empty() || reference.empty()) throw std::invalid_argument("distance_to_reference: empty sample set");
  if (samples.front().size() == 1) return wasserstein1_1d(first_coordinate(samples), first_coordinate(reference));
  return sliced_wasserstein_2d(samples, reference, n_projections, seed);
}

std::string distance_kind(int dim) { return dim == 1 ? "wasserstein1" : "sliced-wasserstein1"; }

bool DifferenceProfile::all_defined_positive() const {
  bool any = false;
  for (const auto& e : entries) {
    if (!e.defined()) continue;
    any = true;
    if (!(e.mean_cosine > 0.0)) return false;
  }
  return any;
}

double DifferenceProfile::min_defined() const {
  double m = std::numeric_limits<double>::quiet_NaN();
  for (const auto& e : entries) {
    if (e.defined() && !(e.mean_cosine >= m)) m = e.mean_cosine;
  }
  return m;
}

nlohmann::json DifferenceProfile::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : entries) {
    rows.push_back({{"k", e.k},
                    {"mean_cosine", e.defined() ? nlohmann::json(e.mean_cosine) : nlohmann::json(nullptr)},
                    {"used", e.used},
                    {"skipped", e.skipped}});
  }
  return {{"probe_policy", probe_policy}, {"entries", rows}};
}

nlohmann::json DifferenceProfile::summary() const {
  std::size_t defined = 0, skipped = 0;
  for (const auto& e : entries) {
    defined += e.defined() ? 1 : 0;
    skipped += e.skipped;
  }
  const double m = min_defined();
  return {{"probe_policy", probe_policy},
          {"defined_levels", defined},
          {"levels", entries.size()},
          {"min_mean_cosine", std::isnan(m) ? nlohmann::json(nullptr) : nlohmann::json(m)},
          {"all_positive", all_defined_positive()},
          {"skipped_probes", skipped}};
}

ProbeSet grid_probes(const NoiseSchedule& schedule, int dim, double lo, double hi, int per_axis) {
  if (dim < 1 || dim > 2 || per_axis < 2) throw std::invalid_argument("grid_probes: dim in {1,2}, per_axis >= 2");
  ProbeSet set;
  set.label = "grid";
  for (int k = schedule.steps(); k >= 0; --k) {
    const double scale = std::sqrt(1.0 + schedule.accumulated_variance(k));
    std::vector<Vector> pts;
    for (int i = 0; i < per_axis; ++i) {
      const double u = lo + (hi - lo) * i / (per_axis - 1);
      if (dim == 1) {
        pts.push_back(Vector::Constant(1, u * scale));
        continue;
      }
      for (int j = 0; j < per_axis; ++j) {
        const double v = lo + (hi - lo) * j / (per_axis - 1);
        Vector p(2);
        p << u * scale, v * scale;
        pts.push_back(p);
      }
    }
    set.levels.emplace_back(k, std::move(pts));
  }
  return set;
}

ProbeSet chain_probes(const std::vector<Trajectory>& chains) {
  ProbeSet set;
  set.label = "chain-states";
  if (chains.empty()) return set;
  for (std::size_t s = 0; s < chains.front().states.size(); ++s) {
    const int k = chains.front().states[s].k;
    std::vector<Vector> pts;
    pts.reserve(chains.size());
    for (const auto& c : chains) pts.push_back(c.states.at(s).x);
    set.levels.emplace_back(k, std::move(pts));
  }
  return set;
}

DifferenceProfile cosine_profile(const ScoreModel& strong, const ScoreModel& weak, const ScoreModel& ideal,
                                 const ProbeSet& probes, bool scale_by_step) {
  check_compatible(strong, weak);
  check_compatible(strong, ideal);
  DifferenceProfile profile;
  profile.probe_policy = probes.label;
  for (const auto& [k, points] : probes.levels) {
    ProfileEntry e;
    e.k = k;
    const double scale = scale_by_step && k >= 1 ? strong.schedule().step_coefficient(k) : 1.0;
    double acc = 0.0;
    for (const auto& x : points) {
      const Vector ss = strong.score(x, k);
      const Vector d1 = scale * (ss - weak.score(x, k));
      const Vector d2 = ideal.score(x, k) - ss;
      if (d1.norm() == 0.0 || d2.norm() == 0.0) {
        ++e.skipped;
        continue;
      }
      acc += cosine_similarity(d1, d2);
      ++e.used;
    }
    e.mean_cosine = e.used ? acc / static_cast<double>(e.used) : std::numeric_limits<double>::quiet_NaN();
    profile.entries.push_back(e);
  }
  return profile;
}

DifferenceProfile cosine_profile(const ScoreModel& strong, const ScoreModel& weak, const ScoreModel& ideal,
                                 const std::vector<Trajectory>& chains) {
  return cosine_profile(strong, weak, ideal, chain_probes(chains));
}

std::vector<std::size_t> histogram(std::span<const double> values, int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw std::invalid_argument("histogram: need bins >= 1 and hi > lo");
  std::vector<std::size_t> counts(bins, 0);
  const double width = (hi - lo) / bins;
  for (double v : values) {
    auto b = static_cast<long>(std::floor((v - lo) / width));
    b = std::clamp(b, 0L, static_cast<long>(bins - 1));
    counts[static_cast<std::size_t>(b)]++;
  }
  return counts;
}

void write_histogram_csv(std::ostream& out, std::span<const double> values, int bins, double lo, double hi,
                         const std::string& config_hash) {
  const auto counts = histogram(values, bins, lo, hi);
  out << "# config_hash=" << config_hash << "\n" << std::setprecision(17);
  out << "bin_left,bin_right,count\n";
  const double width = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) out << lo + b * width << ',' << lo + (b + 1) * width << ',' << counts[b] << "\n";
}

}  // namespace w2sd
