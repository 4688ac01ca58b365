#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "wcp/coincidence.hpp"
#include "wcp/simulator.hpp"

using namespace wcp;

namespace {

EfficiencySet reference_set() {
  return overall_efficiencies(branching_efficiencies(DetectionTree::measured()), 1.0,
                              kReferenceDetectorEfficiency);
}

EfficiencySet uniform_set(double eta) { return overall_efficiencies({eta, eta, eta, eta}, 1.0, 1.0); }

SimConfig config(std::uint64_t pulses, std::uint64_t seed, EfficiencySet eff) {
  SimConfig cfg;
  cfg.n_pulses = pulses;
  cfg.seed = seed;
  cfg.efficiencies = eff;
  return cfg;
}

double sample_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (v.size() - 1));
}

}  // namespace

TEST_CASE("timestamp stream bins back to the simulated histogram") {
  SourceModel src;
  src.mu = 0.8;
  auto cfg = config(20'000, 11, reference_set());
  cfg.emit_timestamps = true;
  const auto run = simulate_timestamps(src, cfg);
  CHECK(run.histogram == simulate_pulses(src, cfg));
  BinningOptions opt;
  opt.rep_period_ps = cfg.rep_period_ps;
  opt.n_pulses = cfg.n_pulses;
  const auto binned = patterns_from_timestamps(run.records, opt);
  CHECK(binned.discarded == 0);
  CHECK(binned.histogram == run.histogram);
  std::uint64_t clicks = 0;
  for (unsigned m = 0; m < 16; ++m) clicks += run.histogram.counts[m] * __builtin_popcount(m);
  CHECK(run.records.size() == clicks);

  cfg.emit_timestamps = false;
  CHECK_THROWS(simulate_timestamps(src, cfg));
}

TEST_CASE("pulses keep their outcome when the run is extended") {
  SourceModel src;
  src.mu = 0.5;
  auto cfg = config(5'000, 3, reference_set());
  cfg.emit_timestamps = true;
  const auto short_run = simulate_timestamps(src, cfg);
  cfg.n_pulses = 10'000;
  const auto long_run = simulate_timestamps(src, cfg);
  std::vector<TimestampRecord> prefix;
  for (const auto& r : long_run.records) {
    if (r.time_ps < 5'000 * cfg.rep_period_ps) prefix.push_back(r);
  }
  CHECK(prefix == short_run.records);
}

TEST_CASE("worker count never changes the histogram") {
  SourceModel src;
  src.mu = 0.5;
  auto cfg = config(200'000, 99, reference_set());
  cfg.workers = 1;
  const auto one = simulate_pulses(src, cfg);
  for (unsigned w : {2u, 3u, 8u}) {
    cfg.workers = w;
    CHECK(simulate_pulses(src, cfg) == one);
  }
  cfg.seed = 100;
  CHECK_FALSE(simulate_pulses(src, cfg) == one);
}

TEST_CASE("marginal click rates follow the Poisson model") {
  SourceModel src;
  src.mu = 0.5;
  const auto eff = reference_set();
  const auto hist = simulate_pulses(src, config(400'000, 5, eff));
  const auto s = observed_coincidences(hist);
  for (int i = 0; i < 4; ++i) {
    const double p = 1.0 - std::exp(-src.mu * eff.overall[i]);
    const double se = std::sqrt(p * (1 - p) / hist.total_pulses);
    CHECK(std::abs(s.subset[1u << i] - p) <= 3 * se);
  }
}

TEST_CASE("uniform efficiency single-detector rate") {
  SourceModel src;
  src.mu = 0.5;
  const auto hist = simulate_pulses(src, config(400'000, 17, uniform_set(0.1)));
  const auto s = observed_coincidences(hist);
  const double p = 1.0 - std::exp(-0.05);
  const double se = std::sqrt(p * (1 - p) / hist.total_pulses);
  CHECK(std::abs(s.subset[1] - p) <= 3 * se);
}

TEST_CASE("vanishing intensity gives no clicks") {
  SourceModel src;
  src.mu = 1e-9;
  const auto hist = simulate_pulses(src, config(100'000, 1, reference_set()));
  CHECK(hist.counts[0] == 100'000);
}

TEST_CASE("dark clicks add independent background") {
  SourceModel src;
  src.mu = 1e-12;
  src.dark_rate = 0.005;
  const auto hist = simulate_pulses(src, config(200'000, 8, reference_set()));
  const auto s = observed_coincidences(hist);
  const double se = std::sqrt(0.005 * 0.995 / 200'000);
  CHECK(std::abs(s.subset[1] - 0.005) <= 3.5 * se);
  src.dark_rate = 0.02;
  CHECK_THROWS(simulate_pulses(src, config(10, 1, reference_set())));
}

TEST_CASE("invalid simulator inputs") {
  SourceModel src;
  src.mu = -0.1;
  CHECK_THROWS(simulate_pulses(src, config(10, 1, reference_set())));
  src.mu = 0.5;
  CHECK_THROWS(simulate_pulses(src, config(0, 1, reference_set())));
  auto cfg = config(10, 1, reference_set());
  cfg.rep_period_ps = 0;
  CHECK_THROWS(simulate_pulses(src, cfg));
}

TEST_CASE("count series without fluctuation is binomial") {
  SourceModel src;
  src.mu = 0.5;
  auto cfg = config(1, 21, reference_set());
  const int cycles = 400;
  const double duration = 0.01;
  const auto n = pulses_per_cycle(duration, cfg);
  CHECK(n == 12'500);
  const auto counts = simulate_count_series(src, cycles, duration, cfg, 0);
  REQUIRE(counts.size() == cycles);
  const double p = 1.0 - std::exp(-0.5 * cfg.efficiencies.overall[0]);
  std::vector<double> as_double(counts.begin(), counts.end());
  const double mean = std::accumulate(as_double.begin(), as_double.end(), 0.0) / cycles;
  CHECK(std::abs(mean - n * p) <= 4 * std::sqrt(n * p * (1 - p) / cycles));
  const double var = std::pow(sample_std(as_double), 2);
  CHECK(var == doctest::Approx(n * p * (1 - p)).epsilon(0.25));

  const auto mu_hat = per_cycle_mean_photon(counts, n, cfg.efficiencies.overall[0]);
  const double mu_mean = std::accumulate(mu_hat.begin(), mu_hat.end(), 0.0) / cycles;
  CHECK(mu_mean == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("count series fluctuation grows with intensity") {
  auto cfg = config(1, 4, reference_set());
  SourceModel src;
  src.fluctuation = {0.04, 0.002};
  double prev = 0.0;
  for (double mu : {0.2, 0.5, 1.0}) {
    src.mu = mu;
    const auto counts = simulate_count_series(src, 200, 1.0, cfg, 0);
    const auto mu_hat = per_cycle_mean_photon(counts, pulses_per_cycle(1.0, cfg), cfg.efficiencies.overall[0]);
    const double s = sample_std(mu_hat);
    CHECK(s > prev);
    CHECK(s == doctest::Approx(src.fluctuation.sigma(mu)).epsilon(0.2));
    prev = s;
  }
  src.mu = 0.5;
  CHECK(simulate_count_series(src, 20, 1.0, cfg, 2) == simulate_count_series(src, 20, 1.0, cfg, 2));
  auto other = cfg;
  other.seed = 5;
  CHECK_FALSE(simulate_count_series(src, 20, 1.0, cfg, 2) == simulate_count_series(src, 20, 1.0, other, 2));
}

TEST_CASE("truncated mass") {
  CHECK(truncated_mass(0.5, 0.0) == 0.0);
  CHECK(truncated_mass(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(truncated_mass(1.0, 1.0) == doctest::Approx(0.15865525393145707).epsilon(1e-12));
}
