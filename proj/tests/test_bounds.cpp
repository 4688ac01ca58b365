#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "wcp/bounds.hpp"
#include "wcp/coincidence.hpp"

using namespace wcp;

namespace {

DetectorArray uniform(double e) { return {e, e, e, e}; }

/// Equal-efficiency limits written out with every shape correction at zero.
PhotonNumberBounds uniform_oracle(const DetectorArray& orders, double e) {
  const double c1 = orders[0] / e;
  const double c2 = orders[1] / (2 * e * e);
  const double c3 = orders[2] / (6 * e * e * e);
  const double c4 = orders[3] / (24 * e * e * e * e);
  const double e2 = e * e, e3 = e2 * e, e4 = e3 * e;
  const double p0 = 1 - c1 + (1 - e) * c2 - (1 - 3 * e + 2 * e2) * c3;
  const double p1 = c1 - (2 - e) * c2 + (3 - 6 * e + 2 * e2) * c3;
  const double p2 = c2 - 3 * (1 - e) * c3;
  PhotonNumberBounds b;
  b.lower[0] = p0 + 4 * e * (1 - 6 * e + 11 * e2 - 6 * e3) * c4;
  b.upper[0] = p0 + (1 - 6 * e + 11 * e2 - 6 * e3) * c4;
  b.lower[1] = p1 - (4 - 18 * e + 22 * e2 - 6 * e3) * c4;
  b.upper[1] = p1 - 4 * e * (3 - 12 * e + 11 * e2) * c4;
  b.lower[2] = p2 + 12 * e * (1 - 2 * e) * c4;
  b.upper[2] = p2 + (6 - 18 * e + 11 * e2) * c4;
  b.lower[3] = c3 - (4 - 6 * e) * c4;
  b.upper[3] = c3 - 4 * e * c4;
  b.lower[4] = 24 * e4 * c4;
  b.upper[4] = c4;
  return b;
}

std::array<double, 5> poisson_truth(double mu) {
  std::array<double, 5> p{};
  double head = 0.0;
  for (int n = 0; n < 4; ++n) {
    p[n] = oracle::poisson_by_recurrence(mu, n);
    head += p[n];
  }
  p[4] = 1.0 - head;
  return p;
}

double subset_product_mean(const DetectorArray& eta, int size) {
  double sum = 0.0;
  int count = 0;
  for (unsigned mask = 0; mask < 16; ++mask) {
    if (__builtin_popcount(mask) != size) continue;
    double prod = 1.0;
    for (int i = 0; i < 4; ++i) {
      if (mask & (1u << i)) prod *= eta[i];
    }
    sum += prod;
    ++count;
  }
  return sum / count;
}

}  // namespace

TEST_CASE("shape factors of equal efficiencies") {
  const auto sf = shape_factors(uniform(0.1));
  CHECK(sf.uniform);
  CHECK(sf.s[1] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(sf.s[2] == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(sf.s[3] == doctest::Approx(0.001).epsilon(1e-15));
  CHECK(sf.s[4] == doctest::Approx(0.0001).epsilon(1e-15));
  for (const auto& row : sf.xi)
    for (double x : row) CHECK(x == 0.0);
}

TEST_CASE("shape factors by subset enumeration") {
  const DetectorArray eta{0.1, 0.1, 0.1, 0.2};
  const auto sf = shape_factors(eta);
  CHECK_FALSE(sf.uniform);
  CHECK(sf.mean == doctest::Approx(0.125));
  CHECK(sf.s[2] == doctest::Approx(0.015).epsilon(1e-14));
  CHECK(sf.s[3] == doctest::Approx(0.00175).epsilon(1e-14));
  CHECK(sf.s[4] == doctest::Approx(0.0002).epsilon(1e-14));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = oracle::random_efficiencies(rng);
    const auto s = shape_factors(e);
    for (int j = 2; j <= 4; ++j) CHECK(s.s[j] == doctest::Approx(subset_product_mean(e, j)).epsilon(1e-13));
    for (int j = 1; j <= 4; ++j) CHECK(s.s[j] > 0.0);
  }
}

TEST_CASE("shape correction identities") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto e = oracle::random_efficiencies(rng);
    const auto sf = shape_factors(e);
    const double m = mean_efficiency(e);
    for (int i = 2; i <= 4; ++i) {
      CHECK(std::abs(sf.xi[i][1] - (subset_product_mean(e, i) / std::pow(m, i) - 1.0)) <= 1e-12);
      for (int j = 1; j < i; ++j) {
        // (1 + xi_{i,j}) (1 + xi_{j,1}) = 1 + xi_{i,1}
        const double xj1 = j == 1 ? 0.0 : sf.xi[j][1];
        CHECK(std::abs((1 + sf.xi[i][j]) * (1 + xj1) - (1 + sf.xi[i][1])) <= 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(shape_factors({0.1, 0.0, 0.1, 0.1}), std::invalid_argument);
}

TEST_CASE("vacuum bounds") {
  const auto b = photon_number_bounds(DetectorArray{0, 0, 0, 0}, oracle::reference_efficiencies());
  CHECK(b.lower[0] == 1.0);
  CHECK(b.upper[0] == 1.0);
  for (int k = 1; k < 5; ++k) {
    CHECK(b.lower[k] == 0.0);
    CHECK(b.upper[k] == 0.0);
  }
}

TEST_CASE("equal efficiencies reduce to the uncorrected formulas") {
  for (double e : {0.01, 0.05, 0.2}) {
    for (double mu : {0.1, 0.5, 1.0}) {
      const auto orders = poisson_coincidence_model(mu, uniform(e));
      const auto got = photon_number_bounds(orders, uniform(e));
      const auto want = uniform_oracle(orders, e);
      for (int k = 0; k < 5; ++k) {
        CHECK(got.lower[k] == doctest::Approx(want.lower[k]).epsilon(1e-12));
        CHECK(got.upper[k] == doctest::Approx(want.upper[k]).epsilon(1e-12));
      }
    }
  }

  // a non-uniform shape with its corrections zeroed follows the same formulas
  auto sf = shape_factors({0.1, 0.12, 0.08, 0.1});
  for (auto& row : sf.xi) row.fill(0.0);
  for (int j = 1; j <= 4; ++j) sf.s[j] = std::pow(sf.mean, j);
  const auto orders = poisson_coincidence_model(0.5, uniform(0.1));
  const auto got = bounds_from_normalized(normalized_coincidences(orders, sf), sf);
  const auto want = uniform_oracle(orders, 0.1);
  for (int k = 0; k < 5; ++k) {
    CHECK(got.lower[k] == doctest::Approx(want.lower[k]).epsilon(1e-12));
    CHECK(got.upper[k] == doctest::Approx(want.upper[k]).epsilon(1e-12));
  }
}

TEST_CASE("tail upper limit is the normalized four-fold rate") {
  const auto eta = oracle::reference_efficiencies();
  const auto sf = shape_factors(eta);
  const auto orders = poisson_coincidence_model(0.8, eta);
  const auto c = normalized_coincidences(orders, sf);
  const auto b = photon_number_bounds(orders, eta);
  CHECK(b.upper[4] == c[3]);
  CHECK(b.lower[4] == doctest::Approx(24 * (1 + sf.xi[4][1]) * std::pow(sf.mean, 4) * c[3]).epsilon(1e-13));
}

TEST_CASE("true photon-number probabilities lie inside the limits") {
  for (double e : {0.01, 0.05}) {
    for (double mu : {0.1, 0.5, 1.0}) {
      const auto b = photon_number_bounds(poisson_coincidence_model(mu, uniform(e)), uniform(e));
      const auto p = poisson_truth(mu);
      for (int k = 0; k < 5; ++k) {
        CHECK(b.lower[k] <= p[k] + 1e-12);
        CHECK(p[k] <= b.upper[k] + 1e-12);
        CHECK(b.lower[k] <= b.upper[k]);
      }
    }
  }
}

TEST_CASE("sandwich holds for unequal efficiencies") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    DetectorArray eta{};
    std::uniform_real_distribution<double> u(0.005, 0.06);
    for (auto& x : eta) x = u(rng);
    for (double mu : {0.1, 0.5, 1.0}) {
      const auto b = photon_number_bounds(poisson_coincidence_model(mu, eta), eta);
      const auto p = poisson_truth(mu);
      for (int k = 0; k < 5; ++k) {
        CHECK(b.lower[k] <= p[k] + 1e-12);
        CHECK(p[k] <= b.upper[k] + 1e-12);
      }
    }
  }
}

TEST_CASE("limits stay finite as the efficiency vanishes") {
  const double mu = 0.5;
  const auto p = poisson_truth(mu);
  const auto b = photon_number_bounds(poisson_coincidence_model(mu, uniform(1e-4)), uniform(1e-4));
  for (int k = 0; k < 4; ++k) {
    CHECK(std::isfinite(b.lower[k]));
    CHECK(b.width(k) >= 0.0);
  }
  // the normalized four-fold rate tends to mu^4 / 4!
  CHECK(b.upper[4] == doctest::Approx(std::pow(mu, 4) / 24).epsilon(1e-3));
  CHECK(b.upper[4] >= p[4]);
}

TEST_CASE("clipped view") {
  PhotonNumberBounds b;
  b.lower[1] = -0.01;
  b.upper[1] = 1.2;
  CHECK(b.clipped_lower(1) == 0.0);
  CHECK(b.clipped_upper(1) == 1.0);
  CHECK(b.width(1) == doctest::Approx(1.21));
}
