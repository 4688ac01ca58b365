#include "wcp/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>

#include "wcp/leakage.hpp"
#include "wcp/rng.hpp"
#include "wcp/simulator.hpp"

namespace wcp {

namespace {

constexpr double kInvGolden = 0.6180339887498949;

struct Objective {
  DetectorArray observed{};
  DetectorArray weight{};
  const DetectorArray& eta;

  double operator()(double mu) const {
    const auto model = poisson_coincidence_model(mu, eta);
    double sse = 0.0;
    for (int r = 0; r < kDetectors; ++r) {
      const double d = observed[r] - model[r];
      sse += weight[r] * d * d;
    }
    return sse;
  }
};

/// Slope of the objective, from the product form of the subset click probabilities.
double objective_slope(const Objective& f, double mu) {
  DetectorArray click{}, dclick{};
  for (int i = 0; i < kDetectors; ++i) {
    click[i] = -std::expm1(-mu * f.eta[i]);
    dclick[i] = f.eta[i] * std::exp(-mu * f.eta[i]);
  }
  DetectorArray model{}, slope{};
  for (int r = 1; r <= kDetectors; ++r) {
    const auto masks = subsets_of_size(r);
    for (auto mask : masks) {
      double prod = 1.0, dprod = 0.0;
      for (int i = 0; i < kDetectors; ++i) {
        if (!(mask & (1u << i))) continue;
        dprod = dprod * click[i] + prod * dclick[i];
        prod *= click[i];
      }
      model[r - 1] += prod;
      slope[r - 1] += dprod;
    }
    model[r - 1] /= static_cast<double>(masks.size());
    slope[r - 1] /= static_cast<double>(masks.size());
  }
  double g = 0.0;
  for (int r = 0; r < kDetectors; ++r) g += f.weight[r] * (model[r] - f.observed[r]) * slope[r];
  return g;
}

double rms_mismatch(const DetectorArray& observed, const DetectorArray& model) {
  double s = 0.0;
  for (int r = 0; r < kDetectors; ++r) s += (observed[r] - model[r]) * (observed[r] - model[r]);
  return std::sqrt(s / kDetectors);
}

}  // namespace

std::string method_name(EstimationMethod m) {
  return m == EstimationMethod::single_detector ? "I" : "II";
}

MuEstimate estimate_mu_single(double counts_per_second, double rep_rate_hz, double eta_overall) {
  if (!(rep_rate_hz > 0.0)) throw std::invalid_argument("repetition rate must be > 0");
  if (!(eta_overall > 0.0 && eta_overall <= 1.0)) {
    throw std::invalid_argument("detector efficiency must lie in (0, 1]");
  }
  if (!(counts_per_second >= 0.0)) throw std::invalid_argument("count rate must be >= 0");
  MuEstimate est;
  est.method = EstimationMethod::single_detector;
  est.mu_hat = counts_per_second / (rep_rate_hz * eta_overall);
  return est;
}

MuEstimate estimate_mu_single(const CoincidenceSummary& summary, double rep_rate_hz,
                              const DetectorArray& eta, int detector0) {
  if (detector0 < 0 || detector0 >= kDetectors) throw std::invalid_argument("detector index out of range");
  const auto mask = static_cast<std::uint8_t>(1u << detector0);
  return estimate_mu_single(summary.subset_probability(mask) * rep_rate_hz, rep_rate_hz,
                            eta[detector0]);
}

MuEstimate estimate_mu_rigorous(const CoincidenceSummary& summary, const DetectorArray& eta,
                                const RigorousOptions& options) {
  if (summary.total_pulses == 0) throw std::invalid_argument("summary has zero pulses");
  validate_efficiencies(eta);
  if (std::all_of(summary.order.begin(), summary.order.end(), [](double c) { return c <= 0.0; })) {
    throw InsufficientData("insufficient data: no clicks recorded in any coincidence order");
  }

  const double n = static_cast<double>(summary.total_pulses);
  const double floor = 1.0 / (n * n);
  Objective f{summary.order, {}, eta};
  for (int r = 0; r < kDetectors; ++r) {
    const double c = summary.order[r];
    f.weight[r] = 1.0 / std::max(c * (1.0 - c) / n, floor);
  }

  // quadratically spaced scan, denser near zero
  const int k_max = options.scan_points;
  auto grid = [&](int k) {
    const double x = static_cast<double>(k) / k_max;
    return options.mu_max * x * x;
  };
  int best_k = 1;
  double best_f = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= k_max; ++k) {
    const double v = f(grid(k));
    if (v < best_f) {
      best_f = v;
      best_k = k;
    }
  }
  if (best_k == k_max) {
    throw ConvergenceError("mean photon number is not bracketed below mu_max", grid(k_max));
  }

  double lo = grid(best_k - 1);
  double hi = grid(best_k + 1);
  double bracket_lo = lo;
  double bracket_hi = hi;
  double x1 = hi - kInvGolden * (hi - lo);
  double x2 = lo + kInvGolden * (hi - lo);
  double f1 = f(x1);
  double f2 = f(x2);
  int iter = 0;
  while (hi - lo >= options.tolerance) {
    if (++iter > options.max_iterations) {
      throw ConvergenceError("golden-section search did not converge", f1 < f2 ? x1 : x2);
    }
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvGolden * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvGolden * (hi - lo);
      f2 = f(x2);
    }
  }

  double mu_hat = 0.5 * (lo + hi);
  if (objective_slope(f, bracket_lo) < 0.0 && objective_slope(f, bracket_hi) > 0.0) {
    for (int i = 0; i < 128; ++i) {
      const double mid = 0.5 * (bracket_lo + bracket_hi);
      if (mid <= bracket_lo || mid >= bracket_hi) break;
      (objective_slope(f, mid) < 0.0 ? bracket_lo : bracket_hi) = mid;
    }
    mu_hat = 0.5 * (bracket_lo + bracket_hi);
  }

  MuEstimate est;
  est.method = EstimationMethod::rigorous;
  est.mu_hat = mu_hat;
  est.residual = rms_mismatch(summary.order, poisson_coincidence_model(est.mu_hat, eta));
  est.fit_orders = {1, 2, 3, 4};
  return est;
}

PoissonityResult poissonity_test(const CoincidenceSummary& summary, double mu_hat,
                                 const DetectorArray& eta, double min_expected) {
  if (summary.total_pulses == 0) throw std::invalid_argument("summary has zero pulses");
  const double n = static_cast<double>(summary.total_pulses);
  const auto model = poisson_coincidence_model(mu_hat, eta);

  PoissonityResult result;
  for (int r = 0; r < kDetectors; ++r) {
    const double var = model[r] * (1.0 - model[r]) / n;
    if (n * model[r] < min_expected || var <= 0.0) continue;
    const double z = (summary.order[r] - model[r]) / std::sqrt(var);
    result.statistic += z * z;
    result.orders_used.push_back(r + 1);
  }
  if (result.orders_used.size() < 2) {
    throw InsufficientData("insufficient data: fewer than two coincidence orders have enough counts");
  }
  result.degrees_of_freedom = static_cast<int>(result.orders_used.size()) - 1;
  boost::math::chi_squared dist(result.degrees_of_freedom);
  result.threshold = boost::math::quantile(dist, 0.99);
  result.passed = result.statistic < result.threshold;
  return result;
}

std::vector<SweepRow> method_difference_sweep(const std::vector<double>& mu_grid,
                                              const EfficiencySet& efficiencies,
                                              std::uint64_t pulses_per_point, std::uint64_t seed,
                                              const SweepOptions& options) {
  for (double mu : mu_grid) {
    if (!(mu > 0.0 && mu <= 2.0)) throw std::invalid_argument("sweep grid values must lie in (0, 2]");
  }
  std::vector<SweepRow> rows;
  rows.reserve(mu_grid.size());
  for (std::size_t i = 0; i < mu_grid.size(); ++i) {
    SourceModel source;
    source.mu = mu_grid[i];
    SimConfig cfg;
    cfg.n_pulses = pulses_per_point;
    cfg.seed = derive_seed(seed, StreamPurpose::sweep_point, i);
    cfg.efficiencies = efficiencies;
    cfg.workers = options.workers;
    cfg.rep_period_ps = static_cast<std::uint64_t>(std::llround(1e12 / options.rep_rate_hz));

    const auto summary = observed_coincidences(simulate_pulses(source, cfg));
    const auto single = estimate_mu_single(summary, options.rep_rate_hz, efficiencies.overall,
                                           options.method1_detector0);
    const auto rigorous = estimate_mu_rigorous(summary, efficiencies.overall);

    SweepRow row;
    row.mu_true = mu_grid[i];
    row.mu_method1 = single.mu_hat;
    row.mu_method2 = rigorous.mu_hat;
    row.delta_mu = rigorous.mu_hat - single.mu_hat;
    row.residual = rigorous.residual;
    row.pulses = pulses_per_point;
    row.seed = cfg.seed;
    row.delta_info = leakage_difference(rigorous.mu_hat, single.mu_hat);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace wcp
