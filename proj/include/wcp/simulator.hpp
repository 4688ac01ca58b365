// Monte-Carlo model of a weak coherent pulse source observed through the
// four-detector tree.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wcp/coincidence.hpp"
#include "wcp/optics.hpp"

namespace wcp {

/// Standard deviation of the per-cycle mean photon number, sigma = a mu + b.
struct LinearFluctuation {
  double slope = 0.0;
  double intercept = 0.0;

  double sigma(double mu) const { return slope * mu + intercept; }
  bool active() const { return slope > 0.0 || intercept > 0.0; }
};

struct SourceModel {
  std::string label = "S1";
  double mu = 0.5;
  LinearFluctuation fluctuation;
  /// Per-detector, per-pulse dark click probability.
  double dark_rate = 0.0;

  void validate() const;
};

struct SimConfig {
  std::uint64_t n_pulses = 1'000'000;
  std::uint64_t seed = 1;
  std::uint64_t rep_period_ps = 800'000;
  EfficiencySet efficiencies;
  bool emit_timestamps = false;
  /// Delay of every click record after the start of its period.
  std::uint64_t click_delay_ps = 10'000;
  /// Pulses sharing one intensity draw when the source fluctuates.
  std::uint64_t cycle_pulses = 1'250'000;
  /// 0 picks the hardware concurrency. Never affects results.
  unsigned workers = 0;

  double repetition_rate_hz() const { return 1e12 / static_cast<double>(rep_period_ps); }
  void validate() const;
};

struct TimestampRun {
  std::vector<TimestampRecord> records;
  PatternHistogram histogram;
};

PatternHistogram simulate_pulses(const SourceModel& source, const SimConfig& cfg);

/// Click records for every pulse plus the histogram they bin to.
TimestampRun simulate_timestamps(const SourceModel& source, const SimConfig& cfg);

/// Single-detector click totals for `cycles` consecutive cycles, each with its
/// own intensity draw. `detector0` is 0-based.
std::vector<std::uint64_t> simulate_count_series(const SourceModel& source, int cycles,
                                                 double cycle_duration_s, const SimConfig& cfg,
                                                 int detector0 = 0);

std::uint64_t pulses_per_cycle(double cycle_duration_s, const SimConfig& cfg);

/// Per-cycle mean photon number recovered from a single detector's click
/// fraction, -ln(1 - k/N) / eta.
std::vector<double> per_cycle_mean_photon(const std::vector<std::uint64_t>& counts,
                                          std::uint64_t pulses, double eta);

/// Probability mass of N(mu, sigma) at or below zero.
double truncated_mass(double mu, double sigma);

}  // namespace wcp
