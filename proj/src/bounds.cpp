#include "wcp/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wcp {

namespace {

constexpr std::array<double, kDetectors + 1> kFactorial{1.0, 1.0, 2.0, 6.0, 24.0};

}  // namespace

ShapeFactors shape_factors(const DetectorArray& eta) {
  validate_efficiencies(eta);
  for (double e : eta) {
    if (!(e > 0.0)) throw std::invalid_argument("shape factors need every detector efficiency > 0");
  }
  ShapeFactors sf;
  sf.mean = mean_efficiency(eta);
  sf.uniform = std::all_of(eta.begin(), eta.end(), [&](double e) { return e == eta[0]; });

  sf.s[1] = sf.mean;
  for (int j = 2; j <= kDetectors; ++j) {
    if (sf.uniform) {
      sf.s[j] = std::pow(sf.mean, j);
      continue;
    }
    double sum = 0.0;
    for (auto mask : subsets_of_size(j)) {
      double prod = 1.0;
      for (int d = 0; d < kDetectors; ++d) {
        if (mask & (1u << d)) prod *= eta[d];
      }
      sum += prod;
    }
    sf.s[j] = sum / binomial(kDetectors, j);
  }

  if (!sf.uniform) {
    for (int i = 2; i <= kDetectors; ++i) {
      for (int j = 1; j < i; ++j) {
        sf.xi[i][j] = sf.s[i] / (sf.s[j] * std::pow(sf.mean, i - j)) - 1.0;
      }
    }
  }
  return sf;
}

NormalizedCoincidences normalized_coincidences(const DetectorArray& orders, const ShapeFactors& shape) {
  if (!(shape.mean > 0.0)) throw std::invalid_argument("mean efficiency must be > 0");
  NormalizedCoincidences c{};
  for (int r = 1; r <= kDetectors; ++r) {
    c[r - 1] = orders[r - 1] / (kFactorial[r] * shape.s[r]);
  }
  return c;
}

PhotonNumberBounds bounds_from_normalized(const NormalizedCoincidences& c, const ShapeFactors& shape) {
  const double e = shape.mean;
  const double e2 = e * e;
  const double e3 = e2 * e;
  const double e4 = e3 * e;
  const auto& x = shape.xi;
  const double x21 = x[2][1], x31 = x[3][1], x32 = x[3][2];
  const double x41 = x[4][1], x42 = x[4][2], x43 = x[4][3];
  const double c1 = c[0], c2 = c[1], c3 = c[2], c4 = c[3];

  // terms shared between the limits of the same p_n
  const double c3_p0 = 1.0 - (3.0 - 3.0 * x32) * e + (2.0 - 12.0 * x32 + 6.0 * x31) * e2;
  const double head0 = 1.0 - c1 + (1.0 - (1.0 - 3.0 * x21) * e) * c2 - c3_p0 * c3;
  const double c3_p1 = 3.0 - (6.0 - 6.0 * x32) * e + (2.0 - 12.0 * x32 + 6.0 * x31) * e2;
  const double head1 = c1 - (2.0 - (1.0 - 3.0 * x21) * e) * c2 + c3_p1 * c3;
  const double head2 = c2 - 3.0 * (1.0 - (1.0 - x32) * e) * c3;
  const double cubic = 6.0 + 24.0 * x21 - 32.0 * x32 / 3.0 - 16.0 * x43 + 44.0 * x42 / 3.0 - 6.0 * x41;
  const double quad_u = 11.0 + 6.0 * x21 - 8.0 * x32 / 3.0 - 12.0 * x43 + 11.0 * x42 / 3.0;

  PhotonNumberBounds b;
  b.lower[0] = head0 + 4.0 * (1.0 + x43) * e *
                           (1.0 - 6.0 * e + (11.0 + 3.0 * x31) * e2 - 6.0 * (1.0 + x31) * e3) * c4;
  b.upper[0] = head0 + (1.0 - (6.0 - 2.0 * x43) * e + quad_u * e2 - cubic * e3) * c4;

  b.lower[1] = head1 - (4.0 - (18.0 - 6.0 * x43) * e +
                        (22.0 + 12.0 * x21 - 16.0 * x32 / 3.0 - 24.0 * x43 + 22.0 * x42 / 3.0) * e2 -
                        cubic * e3) *
                           c4;
  b.upper[1] = head1 - 4.0 * (1.0 + x43) * e * (3.0 - 12.0 * e + (11.0 + 3.0 * x31) * e2) * c4;

  b.lower[2] = head2 + 12.0 * (1.0 + x43) * e * (1.0 - 2.0 * e) * c4;
  b.upper[2] = head2 + (6.0 - (18.0 - 6.0 * x43) * e + quad_u * e2) * c4;

  b.lower[3] = c3 - (4.0 - 2.0 * (3.0 - x43) * e) * c4;
  b.upper[3] = c3 - 4.0 * (1.0 + x43) * e * c4;

  b.lower[4] = 24.0 * (1.0 + x41) * e4 * c4;
  b.upper[4] = c4;
  return b;
}

PhotonNumberBounds photon_number_bounds(const DetectorArray& orders, const DetectorArray& eta) {
  if (!(mean_efficiency(eta) > 0.0)) throw std::invalid_argument("mean efficiency must be > 0");
  const auto shape = shape_factors(eta);
  return bounds_from_normalized(normalized_coincidences(orders, shape), shape);
}

PhotonNumberBounds photon_number_bounds(const CoincidenceSummary& summary, const DetectorArray& eta) {
  summary.validate();
  return photon_number_bounds(summary.order, eta);
}

double PhotonNumberBounds::clipped_lower(int k) const { return std::clamp(lower.at(k), 0.0, 1.0); }
double PhotonNumberBounds::clipped_upper(int k) const { return std::clamp(upper.at(k), 0.0, 1.0); }

}  // namespace wcp
