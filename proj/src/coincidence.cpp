#include "wcp/coincidence.hpp"

#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wcp {

namespace {

constexpr auto kSubsetsBySize = [] {
  std::array<std::array<std::uint8_t, 6>, kDetectors + 1> table{};
  std::array<int, kDetectors + 1> fill{};
  for (int mask = 0; mask < kPatterns; ++mask) {
    const int size = std::popcount(static_cast<unsigned>(mask));
    table[size][fill[size]++] = static_cast<std::uint8_t>(mask);
  }
  return table;
}();

constexpr std::array<int, kDetectors + 1> kSubsetCounts{1, 4, 6, 4, 1};

void require_order(int r) {
  if (r < 1 || r > kDetectors) throw std::invalid_argument("coincidence order must be 1..4");
}

}  // namespace

int DetectionPattern::clicks() const { return std::popcount(static_cast<unsigned>(mask)); }

PatternHistogram& PatternHistogram::operator+=(const PatternHistogram& other) {
  for (int i = 0; i < kPatterns; ++i) counts[i] += other.counts[i];
  total_pulses += other.total_pulses;
  return *this;
}

void PatternHistogram::validate() const {
  std::uint64_t sum = 0;
  for (auto c : counts) sum += c;
  if (sum != total_pulses) {
    throw std::invalid_argument("pattern counts do not sum to total_pulses");
  }
}

int binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  int result = 1;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

std::span<const std::uint8_t> subsets_of_size(int size) {
  if (size < 0 || size > kDetectors) throw std::invalid_argument("subset size must be 0..4");
  return {kSubsetsBySize[size].data(), static_cast<std::size_t>(kSubsetCounts[size])};
}

std::string subset_label(std::uint8_t mask) {
  std::string out;
  for (int d = 0; d < kDetectors; ++d) {
    if (mask & (1u << d)) {
      if (!out.empty()) out += ',';
      out += std::to_string(d + 1);
    }
  }
  return out;
}

std::uint8_t parse_subset_label(const std::string& label) {
  std::uint8_t mask = 0;
  std::istringstream in(label);
  std::string part;
  int previous = 0;
  while (std::getline(in, part, ',')) {
    int d = 0;
    try {
      std::size_t used = 0;
      d = std::stoi(part, &used);
      if (used != part.size()) d = 0;
    } catch (const std::exception&) {
      d = 0;
    }
    if (d < 1 || d > kDetectors || d <= previous) {
      throw std::invalid_argument("bad subset label '" + label + "'");
    }
    previous = d;
    mask = static_cast<std::uint8_t>(mask | (1u << (d - 1)));
  }
  if (mask == 0) throw std::invalid_argument("empty subset label");
  return mask;
}

double order_weight(int r, int j) {
  return static_cast<double>(binomial(kDetectors - j, r - j)) / binomial(kDetectors, r);
}

double subset_efficiency(const DetectorArray& eta, std::uint8_t mask) {
  double s = 0.0;
  for (int d = 0; d < kDetectors; ++d) {
    if (mask & (1u << d)) s += eta[d];
  }
  return s;
}

BinningResult patterns_from_timestamps(std::span<const TimestampRecord> stream,
                                       const BinningOptions& options) {
  if (options.rep_period_ps == 0) throw std::invalid_argument("repetition period must be > 0");
  if (options.window && options.window->start_ps + options.window->width_ps > options.rep_period_ps) {
    throw std::invalid_argument("intra-period window extends past the repetition period");
  }

  BinningResult result;
  // one pulse is open at a time because the stream is time-sorted
  std::uint64_t open_pulse = 0;
  DetectionPattern open_pattern;
  bool has_open = false;
  std::uint64_t pulses_with_clicks = 0;
  std::uint64_t previous_time = 0;

  auto close_open = [&] {
    if (has_open) {
      result.histogram.counts[open_pattern.mask] += 1;
      ++pulses_with_clicks;
    }
  };

  for (const auto& rec : stream) {
    if (rec.channel < 1 || rec.channel > kDetectors) {
      throw std::invalid_argument("timestamp channel must be 1..4");
    }
    if (rec.time_ps < previous_time) throw std::invalid_argument("timestamp stream is not sorted");
    previous_time = rec.time_ps;

    if (rec.time_ps < options.offset_ps) {
      ++result.discarded;
      continue;
    }
    const std::uint64_t since = rec.time_ps - options.offset_ps;
    const std::uint64_t pulse = since / options.rep_period_ps;
    if (pulse >= options.n_pulses) {
      ++result.discarded;
      continue;
    }
    if (options.window) {
      const std::uint64_t phase = since % options.rep_period_ps;
      if (phase < options.window->start_ps ||
          phase >= options.window->start_ps + options.window->width_ps) {
        ++result.discarded;
        continue;
      }
    }
    if (!has_open || pulse != open_pulse) {
      close_open();
      open_pulse = pulse;
      open_pattern = {};
      has_open = true;
    }
    open_pattern.set(rec.channel - 1);
  }
  close_open();

  result.histogram.counts[0] += options.n_pulses - pulses_with_clicks;
  result.histogram.total_pulses = options.n_pulses;
  return result;
}

void CoincidenceSummary::refresh_orders() {
  for (int r = 1; r <= kDetectors; ++r) {
    double sum = 0.0;
    for (auto mask : subsets_of_size(r)) sum += subset[mask];
    order[r - 1] = sum / binomial(kDetectors, r);
  }
}

void CoincidenceSummary::validate() const {
  constexpr double tol = 1e-12;
  for (int w = 1; w < kPatterns; ++w) {
    if (!(subset[w] >= -tol && subset[w] <= 1.0 + tol)) {
      throw std::invalid_argument("subset probability outside [0, 1]");
    }
    for (int v = 1; v < kPatterns; ++v) {
      if ((v & w) == v && subset[w] > subset[v] + tol) {
        throw std::invalid_argument("subset probabilities are not monotone under inclusion");
      }
    }
  }
  for (int r = 1; r <= kDetectors; ++r) {
    double sum = 0.0;
    for (auto mask : subsets_of_size(r)) sum += subset[mask];
    if (std::abs(order[r - 1] - sum / binomial(kDetectors, r)) > tol) {
      throw std::invalid_argument("order average does not match subset probabilities");
    }
    if (r > 1 && order[r - 1] > order[r - 2] + tol) {
      throw std::invalid_argument("order-averaged coincidences increase with order");
    }
  }
}

CoincidenceSummary observed_coincidences(const PatternHistogram& hist) {
  if (hist.total_pulses == 0) throw std::invalid_argument("histogram has zero pulses");
  hist.validate();
  CoincidenceSummary summary;
  summary.total_pulses = hist.total_pulses;
  const double total = static_cast<double>(hist.total_pulses);
  for (int w = 1; w < kPatterns; ++w) {
    std::uint64_t hits = 0;
    for (int p = 0; p < kPatterns; ++p) {
      if ((p & w) == w) hits += hist.counts[p];
    }
    summary.subset[w] = static_cast<double>(hits) / total;
  }
  summary.refresh_orders();
  return summary;
}

double conditional_coincidence(int n, int r, const DetectorArray& eta) {
  if (n < 0) throw std::invalid_argument("photon count must be >= 0");
  require_order(r);
  validate_efficiencies(eta);
  double total = 0.0;
  for (int j = 0; j <= r; ++j) {
    double inner = 0.0;
    for (auto mask : subsets_of_size(j)) {
      const double miss = std::max(0.0, 1.0 - subset_efficiency(eta, mask));
      inner += std::pow(miss, n);
    }
    total += ((j % 2) ? -1.0 : 1.0) * order_weight(r, j) * inner;
  }
  return total;
}

DetectorArray poisson_coincidence_model(double mu, const DetectorArray& eta) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mean photon number must be >= 0");
  validate_efficiencies(eta);
  // sum_n p_n (1 - s)^n = e^{-mu s}; the j = 0 constants cancel for r >= 1, so
  // summing expm1 terms avoids carrying the O(1) parts through the alternation
  DetectorArray out{};
  for (int r = 1; r <= kDetectors; ++r) {
    double total = 0.0;
    for (int j = 1; j <= r; ++j) {
      double inner = 0.0;
      for (auto mask : subsets_of_size(j)) inner += std::expm1(-mu * subset_efficiency(eta, mask));
      total += ((j % 2) ? -1.0 : 1.0) * order_weight(r, j) * inner;
    }
    out[r - 1] = std::max(0.0, total);
  }
  return out;
}

CoincidenceSummary poisson_coincidence_summary(double mu, const DetectorArray& eta,
                                               std::uint64_t total_pulses) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mean photon number must be >= 0");
  validate_efficiencies(eta);
  CoincidenceSummary summary;
  summary.total_pulses = total_pulses;
  for (int w = 1; w < kPatterns; ++w) {
    double p = 1.0;
    for (int d = 0; d < kDetectors; ++d) {
      if (w & (1 << d)) p *= -std::expm1(-mu * eta[d]);
    }
    summary.subset[w] = p;
  }
  summary.refresh_orders();
  return summary;
}

}  // namespace wcp
