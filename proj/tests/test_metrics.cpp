#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include "w2sd/evaluation.hpp"
#include "w2sd/metrics.hpp"
#include "w2sd/reflection.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

using namespace w2sd;
using testing::vec1;
using testing::vec2;

namespace {

const NoiseSchedule kSchedule;

std::vector<double> gaussian_draws(std::size_t n, double mean, double sd, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = mean + sd * rng.gaussian();
  return v;
}

// Integral of |F_a - F_b| over the real line, from the two step functions.
double cdf_l1(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::vector<double> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double mid = pts[i];
    const double fa = static_cast<double>(std::upper_bound(a.begin(), a.end(), mid) - a.begin()) / a.size();
    const double fb = static_cast<double>(std::upper_bound(b.begin(), b.end(), mid) - b.begin()) / b.size();
    total += std::abs(fa - fb) * (pts[i + 1] - pts[i]);
  }
  return total;
}

std::vector<Vector> as_vectors(const std::vector<double>& v) {
  std::vector<Vector> out;
  for (double x : v) out.push_back(vec1(x));
  return out;
}

Evaluation small_evaluation(std::size_t chains) {
  const auto ideal = GaussianMixture::two_peak(0.5);
  return Evaluation{ideal, ideal.weights(), sample_mixture(ideal, 20000, 77), chains, 2, "0000000000000000", 64, 0,
                    false};
}

}  // namespace

TEST_CASE("mode fractions") {
  const auto g = GaussianMixture::two_peak(0.5);
  const std::vector<Vector> s{vec1(-4), vec1(-3.5), vec1(4.2)};
  const auto f = mode_fractions(s, g);
  CHECK(f[0] == doctest::Approx(2.0 / 3.0));
  CHECK(f[1] == doctest::Approx(1.0 / 3.0));

  std::vector<Vector> shuffled{s[2], s[0], s[1]};
  CHECK(mode_fractions(shuffled, g) == f);

  const auto four = testing::four_mode({0.25, 0.25, 0.25, 0.25});
  const std::vector<Vector> corners{vec2(-4, -4), vec2(-4, 4), vec2(4, -4), vec2(4, 4)};
  for (double x : mode_fractions(corners, four)) CHECK(x == doctest::Approx(0.25));
}

TEST_CASE("one-dimensional W1") {
  const auto a = gaussian_draws(5000, 0.0, 1.0, 1);
  CHECK(wasserstein1_1d(a, a) == 0.0);

  auto shifted = a;
  for (auto& x : shifted) x -= 2.5;
  CHECK(wasserstein1_1d(a, shifted) == doctest::Approx(2.5).epsilon(1e-12));

  const auto n0 = gaussian_draws(100000, 0.0, 1.0, 2);
  const auto n1 = gaussian_draws(100000, 1.0, 1.0, 3);
  CHECK(std::abs(wasserstein1_1d(n0, n1) - 1.0) <= 0.02);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto x = gaussian_draws(37 + seed, 0.0, 1.0, 10 + seed);
    const auto y = gaussian_draws(101 - 3 * seed, 0.5, 2.0, 40 + seed);
    CHECK(wasserstein1_1d(x, y) == doctest::Approx(cdf_l1(x, y)).epsilon(1e-10));
  }

  const std::vector<double> one{1.0};
  CHECK_THROWS(wasserstein1_1d(one, a));
}

TEST_CASE("W1 is a metric on sample sets") {
  for (std::uint64_t t = 0; t < 20; ++t) {
    const auto x = gaussian_draws(200 + 10 * t, 0.0, 1.0, 100 + t);
    const auto y = gaussian_draws(150 + 5 * t, 0.3 * t, 1.5, 200 + t);
    const auto z = gaussian_draws(300, -0.2 * t, 0.7, 300 + t);
    const double xy = wasserstein1_1d(x, y), yx = wasserstein1_1d(y, x);
    CHECK(xy >= 0.0);
    CHECK(xy == doctest::Approx(yx).epsilon(1e-12));
    CHECK(wasserstein1_1d(x, z) <= xy + wasserstein1_1d(y, z) + 1e-12);
  }
}

TEST_CASE("sliced W1") {
  const auto g = testing::four_mode({0.1, 0.2, 0.3, 0.4});
  const auto a = sample_mixture(g, 4000, 1);
  CHECK(sliced_wasserstein_2d(a, a, 64, 9) == 0.0);

  const Vector v = vec2(1.5, -2.0);
  std::vector<Vector> b;
  for (const auto& x : a) b.push_back(x + v);
  const double d = sliced_wasserstein_2d(a, b, 256, 9);
  CHECK(d <= v.norm() + 1e-9);
  // Mean of |<v, u>| over uniform directions is 2|v|/pi; allow a few percent.
  CHECK(d >= 0.9 * 2.0 * v.norm() / std::numbers::pi);

  const auto c = sample_mixture(testing::four_mode({0.4, 0.3, 0.2, 0.1}), 4000, 2);
  const double d1 = sliced_wasserstein_2d(a, c, 1000, 3);
  const double d2 = sliced_wasserstein_2d(a, c, 2000, 3);
  CHECK(std::abs(d1 - d2) / d2 < 0.03);
  CHECK(sliced_wasserstein_2d(a, c, 64, 5) == sliced_wasserstein_2d(a, c, 64, 5));
  CHECK_THROWS(sliced_wasserstein_2d(a, c, 7, 5));

  CHECK(distance_kind(1) == "wasserstein1");
  CHECK(distance_kind(2) == "sliced-wasserstein1");
}

TEST_CASE("cosine profile edge cases") {
  const auto strong = make_analytic_model(GaussianMixture::two_peak(0.25), kSchedule, "strong");
  const auto weak = make_analytic_model(GaussianMixture::two_peak(0.091), kSchedule, "weak");
  const auto ideal = make_analytic_model(GaussianMixture::two_peak(0.5), kSchedule, "ideal");
  const auto probes = grid_probes(kSchedule, 1, -3, 3, 13);
  REQUIRE(probes.levels.size() == 51);

  const auto undefined = cosine_profile(*ideal, *weak, *ideal, probes);
  for (const auto& e : undefined.entries) {
    CHECK_FALSE(e.defined());
    CHECK(std::isnan(e.mean_cosine));
    CHECK(e.skipped == 13);
  }
  CHECK(undefined.to_json()["entries"][0]["mean_cosine"].is_null());

  const auto opposed = cosine_profile(*strong, *ideal, *ideal, probes);
  for (const auto& e : opposed.entries) {
    if (e.defined()) CHECK(e.mean_cosine == doctest::Approx(-1.0));
  }

  const auto plain = cosine_profile(*strong, *weak, *ideal, probes);
  const auto scaled = cosine_profile(*strong, *weak, *ideal, probes, true);
  REQUIRE(plain.entries.size() == scaled.entries.size());
  for (std::size_t i = 0; i < plain.entries.size(); ++i) {
    if (!plain.entries[i].defined()) continue;
    CHECK(plain.entries[i].mean_cosine == doctest::Approx(scaled.entries[i].mean_cosine).epsilon(1e-12));
  }
}

TEST_CASE("nested weights give positive cosines along chains") {
  const auto strong = make_analytic_model(GaussianMixture::two_peak(0.25), kSchedule, "strong");
  const auto weak = make_analytic_model(GaussianMixture::two_peak(0.091), kSchedule, "weak");
  const auto ideal = make_analytic_model(GaussianMixture::two_peak(0.5), kSchedule, "ideal");
  std::vector<Trajectory> chains;
  for (std::uint64_t s = 0; s < 50; ++s) chains.push_back(run_w2sd(*strong, *weak, SamplerConfig{kSchedule, 49, s}));
  const auto p = cosine_profile(*strong, *weak, *ideal, chains);
  CHECK(p.probe_policy == "chain-states");
  CHECK(p.all_defined_positive());
  CHECK(p.min_defined() > 0.0);

  const auto g2 = cosine_profile(
      *make_analytic_model(testing::four_mode({0.1, 0.2, 0.3, 0.4}), kSchedule),
      *make_analytic_model(testing::four_mode({0.03, 0.1, 0.27, 0.6}), kSchedule),
      *make_analytic_model(testing::four_mode({0.25, 0.25, 0.25, 0.25}), kSchedule),
      grid_probes(kSchedule, 2, -3, 3, 5));
  for (const auto& e : g2.entries) CHECK(e.used + e.skipped == 25);
}

TEST_CASE("histograms") {
  const std::vector<double> v{-20.0, -1.0, -0.5, 0.0, 0.5, 20.0};
  const auto h = histogram(v, 4, -1.0, 1.0);
  CHECK(h == std::vector<std::size_t>{2, 1, 1, 2});

  std::ostringstream out;
  write_histogram_csv(out, v, 4, -1.0, 1.0, "abcdef0123456789");
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# config_hash=abcdef0123456789");
  std::getline(in, line);
  CHECK(line == "bin_left,bin_right,count");
  std::getline(in, line);
  CHECK(line == "-1,-0.5,2");
}

TEST_CASE("config hash") {
  const nlohmann::json a{{"x", 1}, {"y", "z"}};
  CHECK(config_hash(a).size() == 16);
  CHECK(config_hash(a) == config_hash(nlohmann::json::parse(a.dump())));
  CHECK(config_hash(a) != config_hash(nlohmann::json{{"x", 2}, {"y", "z"}}));
  // FNV-1a of the empty object "{}".
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : std::string("{}")) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  CHECK(config_hash(nlohmann::json::object()) == buf);
}

TEST_CASE("report invariants") {
  ExperimentReport r;
  r.mode_fractions = {0.4, 0.6};
  r.evaluations_per_chain = 50;
  r.expected_evaluations_per_chain = 50;
  CHECK_NOTHROW(r.check_invariants());
  r.mode_fractions = {0.4, 0.5};
  CHECK_THROWS_AS(r.check_invariants(), std::logic_error);
  r.mode_fractions = {0.4, 0.6};
  r.evaluations_per_chain = 51;
  CHECK_THROWS_AS(r.check_invariants(), std::logic_error);
  const auto j = r.to_json();
  CHECK(j.contains("distance"));
  CHECK_FALSE(j.contains("wall_clock_seconds"));
}

TEST_CASE("evaluate_arm records counts and balance") {
  const auto strong = make_analytic_model(GaussianMixture::two_peak(0.25), kSchedule);
  ArmSpec spec;
  spec.name = "standard";
  spec.method = "standard";
  spec.steps = 50;
  spec.expected_evaluations = 50;
  spec.runner = [&](std::uint64_t s, bool) { return run_standard(*strong, SamplerConfig{kSchedule, 0, s}); };
  const auto run = evaluate_arm(spec, {0, 1}, small_evaluation(500));
  CHECK(run.report.seeds.size() == 2);
  CHECK(run.terminals.size() == 500);
  CHECK(run.report.evaluations_per_chain == 50.0);
  CHECK_NOTHROW(run.report.check_invariants());
  const auto& f = run.report.mode_fractions;
  CHECK(run.report.mode_balance_error == doctest::Approx(std::abs(f[0] - 0.5) + std::abs(f[1] - 0.5)));
}

TEST_CASE("equal-compute arithmetic") {
  auto factory = [](double left) {
    return [left](const NoiseSchedule& s) -> ModelPtr { return make_analytic_model(GaussianMixture::two_peak(left), s); };
  };
  const auto eval = small_evaluation(2000);
  CHECK_THROWS(equal_compute_compare(factory(0.25), factory(0.091), kSchedule, 3, {0}, eval));

  const auto r = equal_compute_compare(factory(0.25), factory(0.091), kSchedule, 50, {0}, eval);
  CHECK(r.t_w2s == 25);
  CHECK(r.lambda == 12);
  CHECK(r.standard.report.evaluations_per_chain == 50.0);
  CHECK(r.w2sd.report.evaluations_per_chain == 49.0);

  const auto odd = equal_compute_compare(factory(0.25), factory(0.091), kSchedule, 7, {0}, small_evaluation(100));
  CHECK(odd.t_w2s == 3);
  CHECK(odd.lambda == 1);
  CHECK(odd.w2sd.report.evaluations_per_chain <= odd.standard.report.evaluations_per_chain);
}

TEST_CASE("equal compute with identical models does not favour W2SD") {
  auto same = [](const NoiseSchedule& s) -> ModelPtr {
    return make_analytic_model(GaussianMixture::two_peak(0.25), s);
  };
  const auto r = equal_compute_compare(same, same, kSchedule, 50, {0, 1, 2, 3, 4}, small_evaluation(4000));
  const double band = 2.0 * std::max(r.standard.report.distance_std, r.w2sd.report.distance_std);
  CHECK(r.standard.report.distance <= r.w2sd.report.distance + band);
}
