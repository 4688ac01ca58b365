#include "wcp/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "wcp/rng.hpp"

namespace wcp {

namespace {

constexpr int kMaxRejections = 1000;

double sample_truncated_normal(CounterRng& rng, double mean, double sigma) {
  std::normal_distribution<double> normal(mean, sigma);
  for (int i = 0; i < kMaxRejections; ++i) {
    const double x = normal(rng);
    if (x >= 0.0) return x;
  }
  throw std::runtime_error("truncated normal rejection sampling did not terminate");
}

/// Mean photon number in force during `cycle`.
double cycle_intensity(const SourceModel& source, std::uint64_t seed, std::uint64_t cycle) {
  if (!source.fluctuation.active()) return source.mu;
  CounterRng rng(seed, StreamPurpose::intensity, cycle);
  return sample_truncated_normal(rng, source.mu, source.fluctuation.sigma(source.mu));
}

void check_truncation(const SourceModel& source) {
  if (!source.fluctuation.active()) return;
  if (truncated_mass(source.mu, source.fluctuation.sigma(source.mu)) > 0.5) {
    throw std::invalid_argument("fluctuation model truncates more than half of the intensity");
  }
}

/// Draws one pulse from its own stream. Photon number by CDF inversion, then
/// independent routing of each photon.
class PulseSampler {
 public:
  PulseSampler(const SourceModel& source, const SimConfig& cfg) : source_(source), cfg_(cfg) {
    double acc = 0.0;
    for (int d = 0; d < kDetectors; ++d) {
      acc += cfg.efficiencies.overall[d];
      cumulative_[d] = acc;
    }
  }

  DetectionPattern sample(std::uint64_t pulse) {
    const std::uint64_t cycle = pulse / cfg_.cycle_pulses;
    if (!have_cycle_ || cycle != cycle_) {
      cycle_ = cycle;
      have_cycle_ = true;
      mu_ = cycle_intensity(source_, cfg_.seed, cycle);
      vacuum_ = std::exp(-mu_);
    }

    CounterRng rng(cfg_.seed, StreamPurpose::pulse, pulse);
    DetectionPattern pattern;

    // inversion: smallest n with CDF(n) > u
    const double u = rng.uniform();
    double term = vacuum_;
    double cdf = term;
    int photons = 0;
    while (u >= cdf && term > 0.0) {
      ++photons;
      term *= mu_ / photons;
      cdf += term;
    }

    for (int k = 0; k < photons; ++k) {
      const double v = rng.uniform();
      for (int d = 0; d < kDetectors; ++d) {
        if (v < cumulative_[d]) {
          pattern.set(d);
          break;
        }
      }
    }
    if (source_.dark_rate > 0.0) {
      for (int d = 0; d < kDetectors; ++d) {
        if (rng.uniform() < source_.dark_rate) pattern.set(d);
      }
    }
    return pattern;
  }

 private:
  const SourceModel& source_;
  const SimConfig& cfg_;
  std::array<double, kDetectors> cumulative_{};
  std::uint64_t cycle_ = 0;
  bool have_cycle_ = false;
  double mu_ = 0.0;
  double vacuum_ = 1.0;
};

unsigned worker_count(const SimConfig& cfg) {
  unsigned w = cfg.workers;
  if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
  const std::uint64_t min_chunk = 4096;
  const std::uint64_t useful = std::max<std::uint64_t>(1, cfg.n_pulses / min_chunk);
  return static_cast<unsigned>(std::min<std::uint64_t>(w, useful));
}

/// Runs body(begin, end, slot) over disjoint pulse ranges.
template <typename Body>
void for_each_range(const SimConfig& cfg, unsigned workers, Body body) {
  const std::uint64_t n = cfg.n_pulses;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::uint64_t begin = n * w / workers;
    const std::uint64_t end = n * (w + 1) / workers;
    threads.emplace_back([&, begin, end, w] {
      try {
        body(begin, end, w);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void SourceModel::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("source mu must be > 0");
  if (!(fluctuation.slope >= 0.0 && fluctuation.intercept >= 0.0)) {
    throw std::invalid_argument("fluctuation coefficients must be >= 0");
  }
  if (!(dark_rate >= 0.0 && dark_rate <= 0.01)) {
    throw std::invalid_argument("dark rate must lie in [0, 0.01]");
  }
}

void SimConfig::validate() const {
  if (n_pulses == 0) throw std::invalid_argument("n_pulses must be > 0");
  if (rep_period_ps == 0) throw std::invalid_argument("repetition period must be > 0");
  if (cycle_pulses == 0) throw std::invalid_argument("cycle length must be > 0 pulses");
  if (click_delay_ps >= rep_period_ps) {
    throw std::invalid_argument("click delay must be shorter than the repetition period");
  }
  efficiencies.validate();
}

double truncated_mass(double mu, double sigma) {
  if (sigma <= 0.0) return mu > 0.0 ? 0.0 : 1.0;
  return 0.5 * std::erfc(mu / (sigma * std::sqrt(2.0)));
}

PatternHistogram simulate_pulses(const SourceModel& source, const SimConfig& cfg) {
  source.validate();
  cfg.validate();
  check_truncation(source);

  const unsigned workers = worker_count(cfg);
  std::vector<PatternHistogram> partial(workers);
  for_each_range(cfg, workers, [&](std::uint64_t begin, std::uint64_t end, unsigned slot) {
    PulseSampler sampler(source, cfg);
    auto& h = partial[slot];
    for (std::uint64_t p = begin; p < end; ++p) h.add(sampler.sample(p));
  });

  PatternHistogram total;
  for (const auto& h : partial) total += h;
  return total;
}

TimestampRun simulate_timestamps(const SourceModel& source, const SimConfig& cfg) {
  if (!cfg.emit_timestamps) throw std::invalid_argument("timestamp emission is disabled in the config");
  source.validate();
  cfg.validate();
  check_truncation(source);

  const unsigned workers = worker_count(cfg);
  std::vector<TimestampRun> partial(workers);
  for_each_range(cfg, workers, [&](std::uint64_t begin, std::uint64_t end, unsigned slot) {
    PulseSampler sampler(source, cfg);
    auto& run = partial[slot];
    for (std::uint64_t p = begin; p < end; ++p) {
      const auto pattern = sampler.sample(p);
      run.histogram.add(pattern);
      const std::uint64_t t = p * cfg.rep_period_ps + cfg.click_delay_ps;
      for (int d = 0; d < kDetectors; ++d) {
        if (pattern.clicked(d)) run.records.push_back({d + 1, t});
      }
    }
  });

  TimestampRun out;
  std::size_t total_records = 0;
  for (const auto& run : partial) total_records += run.records.size();
  out.records.reserve(total_records);
  for (auto& run : partial) {
    out.histogram += run.histogram;
    out.records.insert(out.records.end(), run.records.begin(), run.records.end());
  }
  return out;
}

std::uint64_t pulses_per_cycle(double cycle_duration_s, const SimConfig& cfg) {
  if (!(cycle_duration_s > 0.0)) throw std::invalid_argument("cycle duration must be > 0");
  const auto pulses = static_cast<std::uint64_t>(std::llround(cycle_duration_s * cfg.repetition_rate_hz()));
  if (pulses == 0) throw std::invalid_argument("cycle duration is shorter than one pulse period");
  return pulses;
}

std::vector<std::uint64_t> simulate_count_series(const SourceModel& source, int cycles,
                                                 double cycle_duration_s, const SimConfig& cfg,
                                                 int detector0) {
  if (cycles < 2) throw std::invalid_argument("count series needs at least 2 cycles");
  if (detector0 < 0 || detector0 >= kDetectors) throw std::invalid_argument("detector index out of range");
  source.validate();
  cfg.efficiencies.validate();
  check_truncation(source);

  const std::uint64_t pulses = pulses_per_cycle(cycle_duration_s, cfg);
  const double eta = cfg.efficiencies.overall[detector0];
  std::vector<std::uint64_t> series;
  series.reserve(cycles);
  for (int c = 0; c < cycles; ++c) {
    CounterRng rng(cfg.seed, StreamPurpose::count_series, static_cast<std::uint64_t>(c));
    double mu = source.mu;
    if (source.fluctuation.active()) {
      mu = sample_truncated_normal(rng, source.mu, source.fluctuation.sigma(source.mu));
    }
    // pulses within a cycle are i.i.d. given its intensity, so one detector's
    // click total is binomial
    const double p_click = 1.0 - (1.0 - source.dark_rate) * std::exp(-mu * eta);
    std::binomial_distribution<std::uint64_t> clicks(pulses, p_click);
    series.push_back(clicks(rng));
  }
  return series;
}

std::vector<double> per_cycle_mean_photon(const std::vector<std::uint64_t>& counts,
                                          std::uint64_t pulses, double eta) {
  if (pulses == 0 || !(eta > 0.0)) throw std::invalid_argument("pulses and efficiency must be > 0");
  std::vector<double> out;
  out.reserve(counts.size());
  for (auto k : counts) {
    if (k >= pulses) throw std::domain_error("detector clicked on every pulse; intensity is unresolvable");
    out.push_back(-std::log1p(-static_cast<double>(k) / static_cast<double>(pulses)) / eta);
  }
  return out;
}

}  // namespace wcp
