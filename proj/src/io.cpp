#include "wcp/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace wcp::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t start = 0;
  while (start < s.size() && s[start] == ' ') ++start;
  return s.substr(start);
}

template <typename T>
T parse_number(const std::string& text, const char* what) {
  T value{};
  const auto cell = trim(text);
  const auto* first = cell.data();
  const auto* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || cell.empty()) {
    throw std::invalid_argument(std::string("cannot parse ") + what + " from '" + cell + "'");
  }
  return value;
}

/// Yields the non-empty data lines after checking the header.
std::vector<std::vector<std::string>> csv_rows(const std::string& text, const std::string& header) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != header) {
    throw std::invalid_argument("expected CSV header '" + header + "'");
  }
  const auto columns = split(header, ',').size();
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (cells.size() != columns) throw std::invalid_argument("CSV row has the wrong number of columns: " + line);
    rows.push_back(std::move(cells));
  }
  return rows;
}

DetectorArray array4(const json& j, const char* what) {
  if (!j.is_array() || j.size() != kDetectors) {
    throw std::invalid_argument(std::string(what) + " must be an array of 4 numbers");
  }
  DetectorArray out{};
  for (int i = 0; i < kDetectors; ++i) out[i] = j.at(i).get<double>();
  return out;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("cannot format number");
  return std::string(buf.data(), ptr);
}

json histogram_to_json(const PatternHistogram& hist) {
  json j;
  j["total_pulses"] = hist.total_pulses;
  j["counts"] = hist.counts;
  return j;
}

PatternHistogram histogram_from_json(const json& j) {
  PatternHistogram hist;
  hist.total_pulses = j.at("total_pulses").get<std::uint64_t>();
  const auto& counts = j.at("counts");
  if (!counts.is_array() || counts.size() != kPatterns) {
    throw std::invalid_argument("histogram counts must hold 16 entries");
  }
  for (int i = 0; i < kPatterns; ++i) hist.counts[i] = counts.at(i).get<std::uint64_t>();
  hist.validate();
  return hist;
}

json summary_to_json(const CoincidenceSummary& summary) {
  json j;
  j["total_pulses"] = summary.total_pulses;
  json subsets = json::object();
  for (int size = 1; size <= kDetectors; ++size) {
    for (auto mask : subsets_of_size(size)) subsets[subset_label(mask)] = summary.subset[mask];
  }
  j["subsets"] = subsets;
  j["orders"] = summary.order;
  return j;
}

CoincidenceSummary summary_from_json(const json& j) {
  CoincidenceSummary summary;
  summary.total_pulses = j.at("total_pulses").get<std::uint64_t>();
  std::array<bool, kPatterns> seen{};
  for (const auto& [key, value] : j.at("subsets").items()) {
    const auto mask = parse_subset_label(key);
    summary.subset[mask] = value.get<double>();
    seen[mask] = true;
  }
  for (int w = 1; w < kPatterns; ++w) {
    if (!seen[w]) throw std::invalid_argument("summary is missing subset " + subset_label(static_cast<std::uint8_t>(w)));
  }
  summary.refresh_orders();
  if (j.contains("orders")) {
    const auto stored = array4(j.at("orders"), "orders");
    for (int r = 0; r < kDetectors; ++r) {
      if (std::abs(stored[r] - summary.order[r]) > 1e-12) {
        throw std::invalid_argument("stored order averages disagree with the subset probabilities");
      }
    }
  }
  summary.validate();
  return summary;
}

std::string timestamps_to_csv(const std::vector<TimestampRecord>& records) {
  std::string out = "channel,time_ps\n";
  out.reserve(out.size() + records.size() * 16);
  for (const auto& r : records) {
    out += std::to_string(r.channel);
    out += ',';
    out += std::to_string(r.time_ps);
    out += '\n';
  }
  return out;
}

std::vector<TimestampRecord> timestamps_from_csv(const std::string& text) {
  std::vector<TimestampRecord> out;
  for (const auto& row : csv_rows(text, "channel,time_ps")) {
    TimestampRecord rec;
    rec.channel = parse_number<int>(row[0], "channel");
    rec.time_ps = parse_number<std::uint64_t>(row[1], "time_ps");
    if (rec.channel < 1 || rec.channel > kDetectors) throw std::invalid_argument("channel must be 1..4");
    if (!out.empty() && rec.time_ps < out.back().time_ps) {
      throw std::invalid_argument("timestamp rows are not sorted by time_ps");
    }
    out.push_back(rec);
  }
  return out;
}

json efficiency_to_json(const EfficiencySet& set) {
  json j;
  j["eta_b"] = set.branching;
  j["eta_c"] = set.coupling;
  j["eta_d"] = set.detector;
  j["eta"] = set.overall;
  j["eta_bar"] = set.average;
  return j;
}

DetectorArray efficiency_from_json(const json& j) {
  DetectorArray eta{};
  if (j.contains("eta")) {
    eta = array4(j.at("eta"), "eta");
  } else {
    const auto branching = array4(j.at("eta_b"), "eta_b");
    const double detector = j.at("eta_d").get<double>();
    const auto& c = j.at("eta_c");
    const auto set = c.is_array() ? overall_efficiencies(branching, array4(c, "eta_c"), detector)
                                  : overall_efficiencies(branching, c.get<double>(), detector);
    eta = set.overall;
  }
  validate_efficiencies(eta);
  return eta;
}

json bounds_to_json(const PhotonNumberBounds& bounds) {
  json arr = json::array();
  for (int k = 0; k < kBoundEntries; ++k) {
    json e;
    if (k < 4) {
      e["n"] = k;
    } else {
      e["n"] = "ge4";
    }
    e["lower"] = bounds.lower[k];
    e["upper"] = bounds.upper[k];
    e["clipped_lower"] = bounds.clipped_lower(k);
    e["clipped_upper"] = bounds.clipped_upper(k);
    arr.push_back(e);
  }
  return arr;
}

PhotonNumberBounds bounds_from_json(const json& j) {
  PhotonNumberBounds b;
  std::array<bool, kBoundEntries> seen{};
  for (const auto& e : j) {
    int k = 0;
    if (e.at("n").is_string()) {
      if (e.at("n").get<std::string>() != "ge4") throw std::invalid_argument("unknown bound entry");
      k = 4;
    } else {
      k = e.at("n").get<int>();
      if (k < 0 || k > 3) throw std::invalid_argument("bound entry n must be 0..3 or \"ge4\"");
    }
    b.lower[k] = e.at("lower").get<double>();
    b.upper[k] = e.at("upper").get<double>();
    seen[k] = true;
  }
  for (bool s : seen) {
    if (!s) throw std::invalid_argument("bounds report is missing an entry");
  }
  return b;
}

json leakage_to_json(const LeakageDocument& doc) {
  json arr = json::array();
  for (const auto& p : doc.pairs) {
    arr.push_back({{"pair", p.pair()}, {"R", p.r}, {"I_prime", p.i_prime}});
  }
  for (const auto& m : doc.multi_photon) arr.push_back({{"mu", m.mu}, {"I_AE", m.i_ae}});
  for (const auto& m : doc.misestimation) {
    arr.push_back({{"mu_I", m.mu_single}, {"mu_II", m.mu_rigorous}, {"delta_I", m.delta_info}});
  }
  return arr;
}

LeakageDocument leakage_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("leakage report must be a JSON array");
  LeakageDocument doc;
  for (const auto& e : j) {
    if (e.contains("pair")) {
      LeakageReport rep;
      const auto pair = e.at("pair").get<std::string>();
      const auto amp = pair.find('&');
      if (amp == std::string::npos) throw std::invalid_argument("pair label must look like S1&S2");
      rep.label_a = pair.substr(0, amp);
      rep.label_b = pair.substr(amp + 1);
      rep.r = e.at("R").get<double>();
      rep.i_prime = e.at("I_prime").get<double>();
      doc.pairs.push_back(rep);
    } else if (e.contains("I_AE")) {
      doc.multi_photon.push_back({e.at("mu").get<double>(), e.at("I_AE").get<double>()});
    } else if (e.contains("delta_I")) {
      doc.misestimation.push_back(
          {e.at("mu_I").get<double>(), e.at("mu_II").get<double>(), e.at("delta_I").get<double>()});
    } else {
      throw std::invalid_argument("unrecognised leakage report entry");
    }
  }
  return doc;
}

json estimate_to_json(const MuEstimate& est) {
  json j;
  j["method"] = method_name(est.method);
  j["mu_hat"] = est.mu_hat;
  j["residual"] = est.residual;
  j["fit_orders"] = est.fit_orders;
  return j;
}

MuEstimate estimate_from_json(const json& j) {
  MuEstimate est;
  const auto m = j.at("method").get<std::string>();
  if (m == "I") {
    est.method = EstimationMethod::single_detector;
  } else if (m == "II") {
    est.method = EstimationMethod::rigorous;
  } else {
    throw std::invalid_argument("method must be I or II");
  }
  est.mu_hat = j.at("mu_hat").get<double>();
  est.residual = j.value("residual", 0.0);
  est.fit_orders = j.value("fit_orders", std::vector<int>{});
  return est;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::string out = "mu_true,mu_method1,mu_method2,delta_mu,residual,pulses,seed,delta_I\n";
  for (const auto& r : rows) {
    out += format_double(r.mu_true) + ',' + format_double(r.mu_method1) + ',' +
           format_double(r.mu_method2) + ',' + format_double(r.delta_mu) + ',' +
           format_double(r.residual) + ',' + std::to_string(r.pulses) + ',' + std::to_string(r.seed) +
           ',' + format_double(r.delta_info) + '\n';
  }
  return out;
}

std::vector<SweepRow> sweep_from_csv(const std::string& text) {
  std::vector<SweepRow> rows;
  for (const auto& c : csv_rows(text, "mu_true,mu_method1,mu_method2,delta_mu,residual,pulses,seed,delta_I")) {
    SweepRow r;
    r.mu_true = parse_number<double>(c[0], "mu_true");
    r.mu_method1 = parse_number<double>(c[1], "mu_method1");
    r.mu_method2 = parse_number<double>(c[2], "mu_method2");
    r.delta_mu = parse_number<double>(c[3], "delta_mu");
    r.residual = parse_number<double>(c[4], "residual");
    r.pulses = parse_number<std::uint64_t>(c[5], "pulses");
    r.seed = parse_number<std::uint64_t>(c[6], "seed");
    r.delta_info = parse_number<double>(c[7], "delta_I");
    rows.push_back(r);
  }
  return rows;
}

std::string count_series_to_csv(const std::vector<std::uint64_t>& counts) {
  std::string out = "cycle_index,counts\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(counts[i]) + '\n';
  }
  return out;
}

std::vector<std::uint64_t> count_series_from_csv(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& c : csv_rows(text, "cycle_index,counts")) {
    if (parse_number<std::uint64_t>(c[0], "cycle_index") != out.size()) {
      throw std::invalid_argument("count series cycle indices must be consecutive from 0");
    }
    out.push_back(parse_number<std::uint64_t>(c[1], "counts"));
  }
  return out;
}

json fluctuation_fit_to_json(const FluctuationFit& fit) {
  json j;
  j["a"] = fit.model.slope;
  j["b"] = fit.model.intercept;
  j["a_stderr"] = fit.slope_stderr;
  j["b_stderr"] = fit.intercept_stderr;
  json points = json::array();
  for (const auto& p : fit.points) {
    points.push_back({{"mu", p.mu}, {"sigma", p.sigma}, {"fitted", p.fitted}, {"deviation", p.deviation}});
  }
  j["points"] = points;
  return j;
}

FluctuationFit fluctuation_fit_from_json(const json& j) {
  FluctuationFit fit;
  fit.model.slope = j.at("a").get<double>();
  fit.model.intercept = j.at("b").get<double>();
  fit.slope_stderr = j.value("a_stderr", 0.0);
  fit.intercept_stderr = j.value("b_stderr", 0.0);
  if (j.contains("points")) {
    for (const auto& p : j.at("points")) {
      fit.points.push_back({p.at("mu").get<double>(), p.at("sigma").get<double>(),
                            p.at("fitted").get<double>(), p.at("deviation").get<double>()});
    }
  }
  return fit;
}

}  // namespace wcp::io
