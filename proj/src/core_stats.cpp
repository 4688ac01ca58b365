#include "wcp/core_stats.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wcp {

namespace {

void require_mu(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw std::invalid_argument("mean photon number must be finite and >= 0, got " +
                                std::to_string(mu));
  }
}

void require_n(int n) {
  if (n < 0) throw std::invalid_argument("photon count must be >= 0");
}

}  // namespace

double coherent_fock_probability(double mu, int n) {
  require_mu(mu);
  require_n(n);
  // amplitude <n|alpha> with alpha = sqrt(mu) taken real; the phase drops out of |.|^2
  const double alpha = std::sqrt(mu);
  double amplitude;
  if (n == 0) {
    amplitude = std::exp(-mu / 2.0);
  } else if (mu == 0.0) {
    amplitude = 0.0;
  } else {
    amplitude = std::exp(-mu / 2.0 + n * std::log(alpha) - 0.5 * std::lgamma(n + 1.0));
  }
  return amplitude * amplitude;
}

double poisson_pmf(double mu, int n) {
  require_mu(mu);
  require_n(n);
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  if (n <= 20) {
    double p = std::exp(-mu);
    for (int k = 1; k <= n; ++k) p *= mu / k;
    return p;
  }
  return std::exp(-mu + n * std::log(mu) - std::lgamma(n + 1.0));
}

PhotonNumberDistribution PhotonNumberDistribution::poisson(double mu, int n_max) {
  require_mu(mu);
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  PhotonNumberDistribution d;
  d.mu = mu;
  d.n_max = n_max;
  d.probs.resize(static_cast<std::size_t>(n_max) + 1);
  double cumulative = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    d.probs[n] = poisson_pmf(mu, n);
    cumulative += d.probs[n];
  }
  // the explicit tail sum avoids 1 - cumulative cancellation when the tail is tiny
  double tail = 0.0;
  for (int n = n_max + 1;; ++n) {
    const double p = poisson_pmf(mu, n);
    tail += p;
    if (n > mu && (p == 0.0 || p < 1e-18 * tail)) break;
  }
  d.tail = tail;
  return d;
}

double PhotonNumberDistribution::total() const {
  double s = tail;
  for (double p : probs) s += p;
  return s;
}

void AttenuationSpec::validate() const {
  if (!(repetition_rate > 0.0)) throw std::invalid_argument("repetition rate must be > 0");
  if (!(average_power > 0.0)) throw std::invalid_argument("average power must be > 0");
  if (!(wavelength > 0.0)) throw std::invalid_argument("wavelength must be > 0");
  if (!(optical_density >= 0.0)) throw std::invalid_argument("optical density must be >= 0");
}

double unattenuated_mean_photon(const AttenuationSpec& spec) {
  spec.validate();
  const double pulse_energy = spec.average_power / spec.repetition_rate;
  return pulse_energy * spec.wavelength / (kPlanck * kSpeedOfLight);
}

double desired_mean_photon(const AttenuationSpec& spec) {
  return unattenuated_mean_photon(spec) * std::pow(10.0, -spec.optical_density);
}

double optical_density_for(const AttenuationSpec& spec, double target_mu) {
  if (!(target_mu > 0.0)) throw std::invalid_argument("target mean photon number must be > 0");
  const double od = std::log10(unattenuated_mean_photon(spec) / target_mu);
  if (od < 0.0) {
    throw std::domain_error("target exceeds the unattenuated mean photon number");
  }
  return od;
}

double multi_photon_probability(double mu) {
  require_mu(mu);
  // -expm1(-mu) - mu e^{-mu} keeps precision for small mu
  return -std::expm1(-mu) - mu * std::exp(-mu);
}

}  // namespace wcp
