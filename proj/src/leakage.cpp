#include "wcp/leakage.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wcp {

namespace {

double normal_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

double sample_stddev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

double info_leakage(double mu) {
  if (!(mu >= 0.0)) throw std::invalid_argument("mean photon number must be >= 0");
  return std::exp(-mu) * (std::expm1(0.5 * mu) - 0.5 * mu);
}

double leakage_difference(double mu_rigorous, double mu_single) {
  return info_leakage(mu_rigorous) - info_leakage(mu_single);
}

FluctuationFit fit_fluctuation(const std::map<double, std::vector<double>>& series_per_mu) {
  if (series_per_mu.size() < 2) {
    throw std::invalid_argument("fluctuation fit needs at least two distinct mu points");
  }
  FluctuationFit fit;
  for (const auto& [mu, series] : series_per_mu) {
    if (series.size() < 2) throw std::invalid_argument("each count series needs at least 2 cycles");
    fit.points.push_back({mu, sample_stddev(series), 0.0, 0.0});
  }

  const double n = static_cast<double>(fit.points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& p : fit.points) {
    sx += p.mu;
    sy += p.sigma;
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : fit.points) {
    sxx += (p.mu - mx) * (p.mu - mx);
    sxy += (p.mu - mx) * (p.sigma - my);
  }
  fit.model.slope = sxy / sxx;
  fit.model.intercept = my - fit.model.slope * mx;

  double rss = 0.0;
  for (auto& p : fit.points) {
    p.fitted = fit.model.sigma(p.mu);
    p.deviation = p.sigma - p.fitted;
    rss += p.deviation * p.deviation;
  }
  if (fit.points.size() > 2) {
    const double s2 = rss / (n - 2.0);
    fit.slope_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
  }
  return fit;
}

double SourceDistribution::density_at(double x) const {
  if (x < 0.0) return 0.0;
  return normal_pdf(x, mean, sigma);
}

SourceDistribution gaussian_distribution(double mean, double sigma, std::size_t grid_points) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be > 0");
  if (grid_points < 2048) throw std::invalid_argument("distribution grid needs at least 2048 points");
  const double upper = mean + 6.0 * sigma;
  if (!(upper > 0.0)) throw std::invalid_argument("distribution has no support on the positive axis");

  SourceDistribution d;
  d.mean = mean;
  d.sigma = sigma;
  d.truncated_mass = 0.5 * std::erfc(mean / (sigma * std::sqrt(2.0)));
  d.grid.resize(grid_points);
  d.density.resize(grid_points);
  const double step = upper / static_cast<double>(grid_points - 1);
  for (std::size_t i = 0; i < grid_points; ++i) {
    d.grid[i] = step * static_cast<double>(i);
    d.density[i] = normal_pdf(d.grid[i], mean, sigma);
  }
  return d;
}

SourceDistribution source_distribution_at(const LinearFluctuation& model, double mu,
                                          std::size_t grid_points) {
  return gaussian_distribution(mu, model.sigma(mu), grid_points);
}

double cross_correlation(const SourceDistribution& a, const SourceDistribution& b) {
  std::vector<double> grid;
  std::vector<double> fa, fb;
  if (a.grid == b.grid) {
    grid = a.grid;
    fa = a.density;
    fb = b.density;
  } else {
    const double upper = std::max(a.grid.back(), b.grid.back());
    const std::size_t n = std::max(a.grid.size(), b.grid.size());
    grid.resize(n);
    fa.resize(n);
    fb.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      grid[i] = upper * static_cast<double>(i) / static_cast<double>(n - 1);
      fa[i] = grid[i] <= a.grid.back() ? a.density_at(grid[i]) : 0.0;
      fb[i] = grid[i] <= b.grid.back() ? b.density_at(grid[i]) : 0.0;
    }
  }

  std::vector<double> prod(grid.size()), aa(grid.size()), bb(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    prod[i] = fa[i] * fb[i];
    aa[i] = fa[i] * fa[i];
    bb[i] = fb[i] * fb[i];
  }
  const double na = trapezoid(grid, aa);
  const double nb = trapezoid(grid, bb);
  if (!(na > 0.0) || !(nb > 0.0)) throw std::invalid_argument("distribution has zero norm");
  return std::min(1.0, trapezoid(grid, prod) / std::sqrt(na * nb));
}

double gaussian_overlap(double mean_a, double sigma_a, double mean_b, double sigma_b) {
  const double s2 = sigma_a * sigma_a + sigma_b * sigma_b;
  const double dm = mean_a - mean_b;
  return std::sqrt(2.0 * sigma_a * sigma_b / s2) * std::exp(-dm * dm / (2.0 * s2));
}

double pairwise_leakage(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("cross-correlation must lie in [0, 1]");
  if (r == 0.0) return 1.0;
  const double q = r / 4.0;
  // both orderings (i, j) and (j, i) of the pair contribute
  return 1.0 + 2.0 * q * std::log2(q);
}

std::vector<LeakageReport> pairwise_reports(const std::vector<LabeledDistribution>& sources) {
  std::vector<LeakageReport> out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    for (std::size_t j = i + 1; j < sources.size(); ++j) {
      LeakageReport rep;
      rep.label_a = sources[i].label;
      rep.label_b = sources[j].label;
      rep.r = cross_correlation(sources[i].distribution, sources[j].distribution);
      rep.i_prime = pairwise_leakage(rep.r);
      out.push_back(rep);
    }
  }
  return out;
}

}  // namespace wcp
