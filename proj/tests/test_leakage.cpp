#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>

#include "oracles.hpp"
#include "wcp/core_stats.hpp"
#include "wcp/leakage.hpp"
#include "wcp/rng.hpp"
#include "wcp/simulator.hpp"

using namespace wcp;

namespace {

double leakage_series(double mu) {
  double sum = 0.0;
  for (int n = 2; n <= 60; ++n) sum += oracle::poisson_by_recurrence(mu, n) / std::ldexp(1.0, n);
  return sum;
}

double simpson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  REQUIRE(n % 2 == 1);
  const double h = x[1] - x[0];
  double s = y.front() + y.back();
  for (std::size_t i = 1; i + 1 < n; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i];
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("multi-photon leakage") {
  CHECK(info_leakage(0.0) == 0.0);
  CHECK(info_leakage(0.5) == doctest::Approx(0.02063745843061309).epsilon(1e-14));
  for (int i = 1; i <= 30; ++i) {
    const double mu = 0.1 * i;
    CHECK(std::abs(info_leakage(mu) - leakage_series(mu)) <= 1e-12);
    CHECK(info_leakage(mu) < multi_photon_probability(mu));
  }
  CHECK(info_leakage(1e-9) >= 0.0);
  CHECK_THROWS(info_leakage(-0.1));
}

TEST_CASE("leakage difference") {
  CHECK(leakage_difference(0.4, 0.4) == 0.0);
  CHECK(leakage_difference(0.6, 0.5) > 0.0);
  CHECK(leakage_difference(0.6, 0.5) == doctest::Approx(info_leakage(0.6) - info_leakage(0.5)));
}

TEST_CASE("fluctuation fit of exact data") {
  std::map<double, std::vector<double>> data;
  for (double mu : {0.2, 0.4, 0.6, 0.8, 1.0}) {
    const double s = 0.1 * mu;
    data[mu] = {mu - s, mu + s};  // sample std of {m - s, m + s} is s * sqrt(2)
  }
  auto fit = fit_fluctuation(data);
  CHECK(fit.model.slope == doctest::Approx(0.1 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(std::abs(fit.model.intercept) <= 1e-9);
  REQUIRE(fit.points.size() == 5);
  for (const auto& p : fit.points) CHECK(std::abs(p.deviation) <= 1e-9);

  std::map<double, std::vector<double>> scaled;
  for (double mu : {0.2, 0.5, 0.9}) {
    const double s = 0.1 * mu / std::sqrt(2.0);
    scaled[mu] = {mu + s, mu - s};
  }
  fit = fit_fluctuation(scaled);
  CHECK(fit.model.slope == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(std::abs(fit.model.intercept) <= 1e-9);

  std::map<double, std::vector<double>> permuted;
  for (const auto& [mu, v] : scaled) permuted[mu] = {v[1], v[0]};
  const auto again = fit_fluctuation(permuted);
  CHECK(again.model.slope == fit.model.slope);
  CHECK(again.model.intercept == fit.model.intercept);

  CHECK_THROWS(fit_fluctuation({{0.5, {0.4, 0.6}}}));
  CHECK_THROWS(fit_fluctuation({{0.5, {0.4, 0.6}}, {0.7, {0.7}}}));
}

TEST_CASE("fluctuation fit recovers simulated parameters") {
  SimConfig cfg;
  cfg.seed = 12;
  cfg.efficiencies = overall_efficiencies(branching_efficiencies(DetectionTree::measured()), 1.0,
                                          kReferenceDetectorEfficiency);
  SourceModel src;
  src.fluctuation = {0.04, 0.002};
  std::map<double, std::vector<double>> data;
  const auto n = pulses_per_cycle(1.0, cfg);
  for (int i = 1; i <= 10; ++i) {
    src.mu = 0.1 * i;
    cfg.seed = derive_seed(12, StreamPurpose::fluct_source, static_cast<std::uint64_t>(i));
    const auto counts = simulate_count_series(src, 100, 1.0, cfg, 0);
    data[src.mu] = per_cycle_mean_photon(counts, n, cfg.efficiencies.overall[0]);
  }
  const auto fit = fit_fluctuation(data);
  CHECK(fit.slope_stderr > 0.0);
  CHECK(std::abs(fit.model.slope - 0.04) <= 3 * fit.slope_stderr);
  CHECK(std::abs(fit.model.intercept - 0.002) <= 3 * fit.intercept_stderr);
}

TEST_CASE("source distribution") {
  const auto d = gaussian_distribution(100.0, 10.0);
  CHECK(d.grid.size() >= 2048);
  CHECK(d.grid.front() == 0.0);
  CHECK(d.grid.back() == doctest::Approx(160.0));
  for (double v : d.density) CHECK(v >= 0.0);
  CHECK(std::abs(simpson(d.grid, d.density) + d.truncated_mass - 1.0) <= 1e-9);

  std::vector<double> xf(d.grid.size()), x2f(d.grid.size());
  for (std::size_t i = 0; i < d.grid.size(); ++i) {
    xf[i] = d.grid[i] * d.density[i];
    x2f[i] = (d.grid[i] - 100.0) * (d.grid[i] - 100.0) * d.density[i];
  }
  CHECK(simpson(d.grid, xf) == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(simpson(d.grid, x2f) == doctest::Approx(100.0).epsilon(1e-6));

  const auto heavy = gaussian_distribution(0.5, 0.3);
  CHECK(heavy.truncated_mass == doctest::Approx(0.5 * std::erfc(0.5 / 0.3 / std::sqrt(2.0))).epsilon(1e-9));
  CHECK(std::abs(simpson(heavy.grid, heavy.density) + heavy.truncated_mass - 1.0) <= 1e-9);

  const auto model = source_distribution_at({0.04, 0.002}, 0.5);
  CHECK(model.sigma == doctest::Approx(0.022));
  CHECK(model.mean == 0.5);
  CHECK(model.density_at(0.5) == doctest::Approx(1.0 / (0.022 * std::sqrt(2 * M_PI))).epsilon(1e-12));
  CHECK(model.density_at(-1.0) == 0.0);

  CHECK_THROWS(gaussian_distribution(1.0, 0.0));
  CHECK_THROWS(source_distribution_at({0.0, 0.0}, 0.5));
}

TEST_CASE("overlap of source distributions") {
  const auto a = gaussian_distribution(100.0, 10.0);
  CHECK(cross_correlation(a, a) == doctest::Approx(1.0).epsilon(1e-9));

  const auto far = gaussian_distribution(400.0, 10.0);
  CHECK(cross_correlation(a, far) < 1e-6);

  const auto b = gaussian_distribution(105.0, 12.0);
  CHECK(std::abs(cross_correlation(a, b) - gaussian_overlap(100.0, 10.0, 105.0, 12.0)) <= 1e-6);
  CHECK(cross_correlation(a, b) == cross_correlation(b, a));
  CHECK(gaussian_overlap(1.0, 2.0, 1.0, 2.0) == doctest::Approx(1.0));
  CHECK(gaussian_overlap(0.0, 1.0, 1.0, 1.0) == doctest::Approx(std::exp(-0.25)));
}

TEST_CASE("pairwise side-channel leakage") {
  CHECK(std::abs(pairwise_leakage(1.0)) <= 1e-12);
  CHECK(pairwise_leakage(0.0) == 1.0);
  const std::array<std::pair<double, double>, 6> table{
      {{0.9904, 0.0027}, {0.9715, 0.0082}, {0.9993, 0.0002}, {0.9949, 0.0014}, {0.9948, 0.0014}, {0.9796, 0.0058}}};
  for (const auto& [r, expected] : table) CHECK(std::abs(pairwise_leakage(r) - expected) <= 5e-4);
  double prev = 2.0;
  for (int i = 0; i <= 500; ++i) {
    const double v = pairwise_leakage(0.5 + 0.001 * i);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS(pairwise_leakage(1.01));
  CHECK_THROWS(pairwise_leakage(-0.01));
}

TEST_CASE("pairwise reports cover each unordered pair") {
  std::vector<LabeledDistribution> sources;
  for (int i = 0; i < 4; ++i) {
    sources.push_back({"S" + std::to_string(i + 1), gaussian_distribution(0.5, 0.02 + 0.001 * i)});
  }
  const auto reports = pairwise_reports(sources);
  REQUIRE(reports.size() == 6);
  CHECK(reports[0].pair() == "S1&S2");
  CHECK(reports[5].pair() == "S3&S4");
  for (const auto& rep : reports) {
    CHECK(rep.r > 0.99);
    CHECK(rep.r <= 1.0);
    CHECK(rep.i_prime == doctest::Approx(pairwise_leakage(rep.r)));
  }
}
