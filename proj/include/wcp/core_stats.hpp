// Photon-number statistics of coherent and weak coherent pulses.
#pragma once

#include <cstdint>
#include <vector>

namespace wcp {

// CODATA 2018 exact values.
inline constexpr double kPlanck = 6.62607015e-34;     // J s
inline constexpr double kSpeedOfLight = 299792458.0;  // m / s

/// Tabulated Poisson photon-number distribution with the tail mass above
/// `n_max` carried explicitly so normalization can be checked.
struct PhotonNumberDistribution {
  double mu = 0.0;
  int n_max = 0;
  std::vector<double> probs;  // p_0 .. p_{n_max}
  double tail = 0.0;          // p_{>n_max}

  static PhotonNumberDistribution poisson(double mu, int n_max = 64);

  double total() const;
};

/// Settings of the attenuated pulsed laser.
struct AttenuationSpec {
  double average_power = 0.0;    // W
  double repetition_rate = 0.0;  // Hz
  double wavelength = 0.0;       // m
  double optical_density = 0.0;

  void validate() const;
};

/// |<n|alpha>|^2 for a coherent state with |alpha|^2 = mu, evaluated from the
/// Fock-basis amplitude e^{-|alpha|^2/2} alpha^n / sqrt(n!).
double coherent_fock_probability(double mu, int n);

/// e^{-mu} mu^n / n!. Direct product for n <= 20, log-space beyond.
double poisson_pmf(double mu, int n);

/// Photons per pulse after the filter stack: (P/nu) * lambda / (h c) * 10^-OD.
double desired_mean_photon(const AttenuationSpec& spec);

/// Mean photon number before any attenuation (OD ignored).
double unattenuated_mean_photon(const AttenuationSpec& spec);

/// Optical density that brings `spec` (OD ignored) to `target_mu`.
double optical_density_for(const AttenuationSpec& spec, double target_mu);

/// P(n >= 2) = 1 - e^{-mu}(1 + mu).
double multi_photon_probability(double mu);

}  // namespace wcp
