// Independent reference computations used only by the tests. None of these
// call into the coincidence model under test.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include "wcp/optics.hpp"

namespace wcp::oracle {

inline double poisson_by_recurrence(double mu, int n) {
  double p = std::exp(-mu);
  for (int k = 1; k <= n; ++k) p *= mu / k;
  return p;
}

/// P(every detector in `mask` clicks | n photons) by enumerating every
/// assignment of n photons to the four detectors or loss.
inline double enumerate_subset_click(int n, std::uint8_t mask, const DetectorArray& eta) {
  const double loss = 1.0 - (eta[0] + eta[1] + eta[2] + eta[3]);
  std::array<double, 5> outcome{eta[0], eta[1], eta[2], eta[3], loss};
  std::int64_t combos = 1;
  for (int i = 0; i < n; ++i) combos *= 5;
  double total = 0.0;
  for (std::int64_t c = 0; c < combos; ++c) {
    std::int64_t rest = c;
    double prob = 1.0;
    unsigned hit = 0;
    for (int i = 0; i < n; ++i) {
      const int where = static_cast<int>(rest % 5);
      rest /= 5;
      prob *= outcome[where];
      if (where < 4) hit |= 1u << where;
    }
    if ((hit & mask) == mask) total += prob;
  }
  return total;
}

/// Order-averaged r-fold coincidence given n photons, by enumeration.
inline double enumerate_order(int n, int r, const DetectorArray& eta) {
  double sum = 0.0;
  int subsets = 0;
  for (unsigned mask = 1; mask < 16; ++mask) {
    if (__builtin_popcount(mask) != r) continue;
    sum += enumerate_subset_click(n, static_cast<std::uint8_t>(mask), eta);
    ++subsets;
  }
  return sum / subsets;
}

/// Distribution over the set of hit detectors after n photons, propagated
/// photon by photon.
inline std::array<double, 16> hit_set_distribution(int n, const DetectorArray& eta) {
  std::array<double, 16> state{};
  state[0] = 1.0;
  const double loss = 1.0 - (eta[0] + eta[1] + eta[2] + eta[3]);
  for (int k = 0; k < n; ++k) {
    std::array<double, 16> next{};
    for (unsigned s = 0; s < 16; ++s) {
      if (state[s] == 0.0) continue;
      next[s] += state[s] * loss;
      for (int d = 0; d < 4; ++d) next[s | (1u << d)] += state[s] * eta[d];
    }
    state = next;
  }
  return state;
}

/// Truncated sum over n of p_n times the r-fold coincidence given n photons.
inline double truncated_poisson_order(double mu, int r, const DetectorArray& eta, int n_max = 80) {
  double total = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const auto hits = hit_set_distribution(n, eta);
    double avg = 0.0;
    int subsets = 0;
    for (unsigned w = 1; w < 16; ++w) {
      if (__builtin_popcount(w) != r) continue;
      for (unsigned s = 0; s < 16; ++s) {
        if ((s & w) == w) avg += hits[s];
      }
      ++subsets;
    }
    total += poisson_by_recurrence(mu, n) * avg / subsets;
  }
  return total;
}

/// Random efficiency vector with every entry positive and the sum below 1.
inline DetectorArray random_efficiencies(std::mt19937_64& rng, double max_sum = 0.95) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  DetectorArray eta{};
  double sum = 0.0;
  for (auto& e : eta) {
    e = u(rng);
    sum += e;
  }
  const double scale = std::uniform_real_distribution<double>(0.05, max_sum)(rng) / sum;
  for (auto& e : eta) e *= scale;
  return eta;
}

/// Reference efficiencies: characterised splitters, unit coupling, 65 % detectors.
inline DetectorArray reference_efficiencies() {
  const std::array<double, 4> branching{0.494 * 0.474, 0.494 * 0.446, 0.453 * 0.461, 0.453 * 0.456};
  DetectorArray eta{};
  for (int i = 0; i < 4; ++i) eta[i] = 0.65 * branching[i];
  return eta;
}

}  // namespace wcp::oracle
