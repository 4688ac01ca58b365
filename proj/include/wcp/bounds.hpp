// Upper and lower limits on p_0, p_1, p_2, p_3 and p_{>=4} from the four
// order-averaged coincidence probabilities.
#pragma once

#include <array>

#include "wcp/coincidence.hpp"
#include "wcp/optics.hpp"

namespace wcp {

/// s_j = (sum over |W| = j of prod_{i in W} eta_i) / C(4, j), with s_1 taken
/// as the mean efficiency, and xi_{i,j} = s_i / (s_j eta^{i-j}) - 1.
struct ShapeFactors {
  double mean = 0.0;
  std::array<double, kDetectors + 1> s{};  // s[1..4]
  /// xi[i][j] for 2 <= i <= 4, 1 <= j < i; other entries are zero.
  std::array<std::array<double, kDetectors + 1>, kDetectors + 1> xi{};
  bool uniform = false;
};

ShapeFactors shape_factors(const DetectorArray& eta);

/// c~_r = c_obs,r / c_{r,r}, where c_{r,r} = r! s_r is the r-fold coincidence
/// probability of exactly r photons. For equal efficiencies this is
/// c_obs,r / (r! eta^r).
using NormalizedCoincidences = std::array<double, kDetectors>;

NormalizedCoincidences normalized_coincidences(const DetectorArray& orders,
                                               const ShapeFactors& shape);

inline constexpr int kBoundEntries = 5;  // n = 0, 1, 2, 3, >=4

struct PhotonNumberBounds {
  std::array<double, kBoundEntries> lower{};
  std::array<double, kBoundEntries> upper{};

  double clipped_lower(int k) const;
  double clipped_upper(int k) const;
  double width(int k) const { return upper[k] - lower[k]; }
};

/// The explicit D = 4 limits, evaluated verbatim (no clipping).
PhotonNumberBounds bounds_from_normalized(const NormalizedCoincidences& c, const ShapeFactors& shape);

PhotonNumberBounds photon_number_bounds(const DetectorArray& orders, const DetectorArray& eta);
PhotonNumberBounds photon_number_bounds(const CoincidenceSummary& summary, const DetectorArray& eta);

}  // namespace wcp
