// Information leakage: multi-photon pulses and distinguishable source
// intensity fluctuations.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "wcp/simulator.hpp"

namespace wcp {

/// sum_{n>=2} p_n / 2^n = e^{-mu} (e^{mu/2} - 1 - mu/2).
double info_leakage(double mu);

/// info_leakage(mu_rigorous) - info_leakage(mu_single).
double leakage_difference(double mu_rigorous, double mu_single);

struct FluctuationPoint {
  double mu = 0.0;
  double sigma = 0.0;      // sample standard deviation of the series
  double fitted = 0.0;     // a mu + b
  double deviation = 0.0;  // sigma - fitted
};

struct FluctuationFit {
  LinearFluctuation model;
  double slope_stderr = 0.0;
  double intercept_stderr = 0.0;
  std::vector<FluctuationPoint> points;
};

/// Least-squares line through (mu, sample std of the series at mu).
FluctuationFit fit_fluctuation(const std::map<double, std::vector<double>>& series_per_mu);

/// Gaussian N(mean, sigma) restricted to [0, mean + 6 sigma]. The density is
/// not renormalized: the weight below zero is reported as `truncated_mass`.
struct SourceDistribution {
  std::vector<double> grid;
  std::vector<double> density;
  double mean = 0.0;
  double sigma = 0.0;
  double truncated_mass = 0.0;

  double density_at(double x) const;
};

inline constexpr std::size_t kDefaultGridPoints = 4097;

SourceDistribution source_distribution_at(const LinearFluctuation& model, double mu,
                                          std::size_t grid_points = kDefaultGridPoints);
SourceDistribution gaussian_distribution(double mean, double sigma,
                                         std::size_t grid_points = kDefaultGridPoints);

/// Normalized overlap integral of two densities, trapezoidal quadrature on a
/// shared grid. Distributions on different grids are re-evaluated on a common one.
double cross_correlation(const SourceDistribution& a, const SourceDistribution& b);

/// Closed-form overlap of two untruncated Gaussians on the whole real line.
double gaussian_overlap(double mean_a, double sigma_a, double mean_b, double sigma_b);

/// I'(A:E) = 1 + 2 (R/4) log2(R/4) for one source pair.
double pairwise_leakage(double r);

struct LeakageReport {
  std::string label_a;
  std::string label_b;
  double r = 0.0;
  double i_prime = 0.0;

  std::string pair() const { return label_a + "&" + label_b; }
};

struct LabeledDistribution {
  std::string label;
  SourceDistribution distribution;
};

/// One report per unordered pair, in input order.
std::vector<LeakageReport> pairwise_reports(const std::vector<LabeledDistribution>& sources);

}  // namespace wcp
