// Readers and writers for the toolkit's CSV and JSON files.
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcp/bounds.hpp"
#include "wcp/coincidence.hpp"
#include "wcp/estimation.hpp"
#include "wcp/leakage.hpp"
#include "wcp/optics.hpp"

namespace wcp::io {

using json = nlohmann::ordered_json;

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

// {"total_pulses": N, "counts": [16 ints]}, index = bitmask, bit 0 = detector 1.
json histogram_to_json(const PatternHistogram& hist);
PatternHistogram histogram_from_json(const json& j);

// {"total_pulses": N, "subsets": {"1": p, "1,2": p, ...}, "orders": [c1, c2, c3, c4]}
json summary_to_json(const CoincidenceSummary& summary);
CoincidenceSummary summary_from_json(const json& j);

// header "channel,time_ps", rows sorted by time
std::string timestamps_to_csv(const std::vector<TimestampRecord>& records);
std::vector<TimestampRecord> timestamps_from_csv(const std::string& text);

json efficiency_to_json(const EfficiencySet& set);
/// Accepts a full efficiency set or just {"eta": [4 values]}.
DetectorArray efficiency_from_json(const json& j);

// [{"n": 0, "lower", "upper", "clipped_lower", "clipped_upper"}, ..., {"n": "ge4", ...}]
json bounds_to_json(const PhotonNumberBounds& bounds);
PhotonNumberBounds bounds_from_json(const json& j);

struct MultiPhotonEntry {
  double mu = 0.0;
  double i_ae = 0.0;
};

struct MisestimationEntry {
  double mu_single = 0.0;
  double mu_rigorous = 0.0;
  double delta_info = 0.0;
};

struct LeakageDocument {
  std::vector<LeakageReport> pairs;
  std::vector<MultiPhotonEntry> multi_photon;
  std::vector<MisestimationEntry> misestimation;
};

/// One array holding {pair, R, I_prime}, {mu, I_AE} and {mu_I, mu_II, delta_I} entries.
json leakage_to_json(const LeakageDocument& doc);
LeakageDocument leakage_from_json(const json& j);

json estimate_to_json(const MuEstimate& est);
MuEstimate estimate_from_json(const json& j);

// mu_true,mu_method1,mu_method2,delta_mu,residual,pulses,seed,delta_I
std::string sweep_to_csv(const std::vector<SweepRow>& rows);
std::vector<SweepRow> sweep_from_csv(const std::string& text);

// cycle_index,counts
std::string count_series_to_csv(const std::vector<std::uint64_t>& counts);
std::vector<std::uint64_t> count_series_from_csv(const std::string& text);

json fluctuation_fit_to_json(const FluctuationFit& fit);
FluctuationFit fluctuation_fit_from_json(const json& j);

}  // namespace wcp::io
