// Run configuration shared by the command-line tools.
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcp/optics.hpp"
#include "wcp/simulator.hpp"

namespace wcp {

/// Defaults reproduce the reference transmitter: 1.25 MHz triggering,
/// 65 % detector efficiency, the characterised BS3/BS4/BS5 splitters and
/// unit coupling. The fluctuation coefficients of S1..S4 are illustrative.
struct RunConfig {
  DetectionTree geometry = DetectionTree::measured();
  DetectorArray coupling{1.0, 1.0, 1.0, 1.0};
  double detector_efficiency = kReferenceDetectorEfficiency;
  double rep_rate_hz = 1.25e6;
  std::vector<SourceModel> sources = default_sources();
  std::uint64_t pulses = 1'000'000;
  std::uint64_t seed = 7;
  unsigned workers = 0;
  int method1_detector = 1;  // 1-based
  int cycles = 100;
  double cycle_duration_s = 1.0;
  std::vector<double> fluct_mu_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::string output_dir;

  static std::vector<SourceModel> default_sources();

  EfficiencySet efficiencies() const;
  std::uint64_t rep_period_ps() const;
  const SourceModel& source(const std::string& label) const;
  /// Simulation settings for `pulses` pulses with this config's geometry.
  SimConfig sim_config() const;

  /// Checks every module precondition the commands depend on.
  void validate() const;
};

/// Unknown keys are rejected so typos do not silently fall back to defaults.
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace wcp
