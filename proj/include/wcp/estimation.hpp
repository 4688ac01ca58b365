// Mean photon number estimation: the single-detector linear rule and the
// four-detector inversion of the Poisson coincidence model.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "wcp/coincidence.hpp"
#include "wcp/optics.hpp"

namespace wcp {

enum class EstimationMethod { single_detector, rigorous };

std::string method_name(EstimationMethod m);

struct MuEstimate {
  double mu_hat = 0.0;
  EstimationMethod method = EstimationMethod::single_detector;
  /// RMS of (observed - model) over the fitted orders; 0 for the single-detector rule.
  double residual = 0.0;
  std::vector<int> fit_orders;
};

/// No clicks at all, or too few to form a statistic.
class InsufficientData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double best_mu)
      : std::runtime_error(what), best_mu_(best_mu) {}
  double best_mu() const { return best_mu_; }

 private:
  double best_mu_;
};

struct RigorousOptions {
  double mu_max = 10.0;
  double tolerance = 1e-10;
  int max_iterations = 200;
  int scan_points = 400;
};

/// mu = N / (nu_rep eta). Deliberately uncorrected for multi-photon pulses.
MuEstimate estimate_mu_single(double counts_per_second, double rep_rate_hz, double eta_overall);

/// Single-detector rule applied to one detector's click probability in a summary.
MuEstimate estimate_mu_single(const CoincidenceSummary& summary, double rep_rate_hz,
                              const DetectorArray& eta, int detector0);

/// Weighted least squares of the four order-averaged coincidences against the
/// Poisson model. Weights are 1 / max(c(1-c)/N, 1/N^2).
MuEstimate estimate_mu_rigorous(const CoincidenceSummary& summary, const DetectorArray& eta,
                                const RigorousOptions& options = {});

struct PoissonityResult {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double threshold = 0.0;  // 99th percentile of chi-square
  bool passed = false;
  std::vector<int> orders_used;
};

/// Chi-square of observed vs model coincidences at `mu_hat`. Orders whose
/// expected count is below `min_expected` are left out.
PoissonityResult poissonity_test(const CoincidenceSummary& summary, double mu_hat,
                                 const DetectorArray& eta, double min_expected = 5.0);

struct SweepRow {
  double mu_true = 0.0;
  double mu_method1 = 0.0;
  double mu_method2 = 0.0;
  /// mu_method2 - mu_method1
  double delta_mu = 0.0;
  double residual = 0.0;
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  /// info_leakage(mu_method2) - info_leakage(mu_method1)
  double delta_info = 0.0;
};

struct SweepOptions {
  int method1_detector0 = 0;
  double rep_rate_hz = 1.25e6;
  unsigned workers = 0;
};

/// Simulates each grid point with its own derived seed and compares the two
/// estimates.
std::vector<SweepRow> method_difference_sweep(const std::vector<double>& mu_grid,
                                              const EfficiencySet& efficiencies,
                                              std::uint64_t pulses_per_point, std::uint64_t seed,
                                              const SweepOptions& options = {});

}  // namespace wcp
