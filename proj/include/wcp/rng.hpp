// Counter-based random streams. A stream is a pure function of
// (seed, purpose, index), so work can be split across threads in any way
// without changing the numbers drawn for a given pulse or cycle.
#pragma once

#include <cstdint>
#include <limits>

namespace wcp {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

enum class StreamPurpose : std::uint64_t {
  pulse = 1,
  intensity = 2,
  count_series = 3,
  sweep_point = 4,
  fluct_source = 5,
};

/// Derives an independent 64-bit seed, e.g. for one sweep point.
constexpr std::uint64_t derive_seed(std::uint64_t seed, StreamPurpose purpose,
                                    std::uint64_t index) {
  return splitmix64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(purpose))) + index);
}

/// SplitMix64 sequence started from a derived key. Satisfies
/// UniformRandomBitGenerator so it can drive <random> distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, StreamPurpose purpose, std::uint64_t index)
      : state_(derive_seed(seed, purpose, index)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t out = splitmix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return out;
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace wcp
