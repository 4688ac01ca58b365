// Click patterns, coincidence probabilities and the threshold-detector
// coincidence model for D = 4 detectors.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcp/optics.hpp"

namespace wcp {

inline constexpr int kPatterns = 1 << kDetectors;

/// Which detectors clicked in one trigger period. Bit i is detector i+1.
struct DetectionPattern {
  std::uint8_t mask = 0;

  bool clicked(int detector0) const { return (mask >> detector0) & 1u; }
  void set(int detector0) { mask = static_cast<std::uint8_t>(mask | (1u << detector0)); }
  int clicks() const;
};

struct PatternHistogram {
  std::array<std::uint64_t, kPatterns> counts{};
  std::uint64_t total_pulses = 0;

  void add(DetectionPattern p, std::uint64_t n = 1) {
    counts[p.mask] += n;
    total_pulses += n;
  }
  PatternHistogram& operator+=(const PatternHistogram& other);
  bool operator==(const PatternHistogram&) const = default;

  void validate() const;
};

struct TimestampRecord {
  int channel = 1;            // 1..4
  std::uint64_t time_ps = 0;  // since run start
  bool operator==(const TimestampRecord&) const = default;
};

/// Optional acceptance window inside each period, relative to its start.
struct IntraPeriodWindow {
  std::uint64_t start_ps = 0;
  std::uint64_t width_ps = 0;
};

struct BinningOptions {
  std::uint64_t rep_period_ps = 800'000;
  std::uint64_t offset_ps = 0;
  std::uint64_t n_pulses = 0;
  std::optional<IntraPeriodWindow> window;
};

struct BinningResult {
  PatternHistogram histogram;
  std::uint64_t discarded = 0;
};

/// Observed subset and order-averaged coincidence probabilities.
struct CoincidenceSummary {
  /// Indexed by subset bitmask; entry 0 is unused.
  std::array<double, kPatterns> subset{};
  /// order[r-1] is the r-fold average.
  std::array<double, kDetectors> order{};
  std::uint64_t total_pulses = 0;

  double subset_probability(std::uint8_t mask) const { return subset[mask]; }
  /// Recomputes `order` from `subset`.
  void refresh_orders();
  /// Checks superset monotonicity, non-increasing orders and order averaging.
  void validate() const;
};

/// Number of detector subsets of each size, C(4, j).
int binomial(int n, int k);

/// All masks over the four detectors with exactly `size` bits set.
std::span<const std::uint8_t> subsets_of_size(int size);

/// "1,3" style label for a subset mask.
std::string subset_label(std::uint8_t mask);
std::uint8_t parse_subset_label(const std::string& label);

/// omega_{r,j} = C(D - j, r - j) / C(D, r).
double order_weight(int r, int j);

/// Sum of the efficiencies of the detectors in `mask`.
double subset_efficiency(const DetectorArray& eta, std::uint8_t mask);

BinningResult patterns_from_timestamps(std::span<const TimestampRecord> stream,
                                       const BinningOptions& options);

CoincidenceSummary observed_coincidences(const PatternHistogram& hist);

/// Order-averaged r-fold coincidence probability given exactly n photons.
double conditional_coincidence(int n, int r, const DetectorArray& eta);

/// r-fold coincidence probabilities (r = 1..4) of a Poisson source.
DetectorArray poisson_coincidence_model(double mu, const DetectorArray& eta);

/// Model subset probabilities, P(all of W click) = prod_{i in W} (1 - e^{-mu eta_i}).
CoincidenceSummary poisson_coincidence_summary(double mu, const DetectorArray& eta,
                                               std::uint64_t total_pulses);

}  // namespace wcp
