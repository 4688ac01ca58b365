#include "wcp/config.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "wcp/io.hpp"

namespace wcp {

namespace {

using json = nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
  }
}

BeamSplitter splitter_from_json(const json& j, const std::string& name) {
  reject_unknown(j, {"t2", "r2"}, name);
  BeamSplitter bs;
  bs.t2 = j.at("t2").get<double>();
  bs.r2 = j.at("r2").get<double>();
  return bs;
}

SourceModel source_from_json(const json& j) {
  reject_unknown(j, {"label", "mu", "fluct_a", "fluct_b", "dark_rate"}, "source");
  SourceModel s;
  s.label = j.at("label").get<std::string>();
  s.mu = j.value("mu", s.mu);
  s.fluctuation.slope = j.value("fluct_a", 0.0);
  s.fluctuation.intercept = j.value("fluct_b", 0.0);
  s.dark_rate = j.value("dark_rate", 0.0);
  return s;
}

}  // namespace

std::vector<SourceModel> RunConfig::default_sources() {
  return {
      {"S1", 0.5, {0.040, 0.002}, 0.0},
      {"S2", 0.5, {0.044, 0.002}, 0.0},
      {"S3", 0.5, {0.036, 0.002}, 0.0},
      {"S4", 0.5, {0.041, 0.002}, 0.0},
  };
}

EfficiencySet RunConfig::efficiencies() const {
  return overall_efficiencies(branching_efficiencies(geometry), coupling, detector_efficiency);
}

std::uint64_t RunConfig::rep_period_ps() const {
  return static_cast<std::uint64_t>(std::llround(1e12 / rep_rate_hz));
}

const SourceModel& RunConfig::source(const std::string& label) const {
  for (const auto& s : sources) {
    if (s.label == label) return s;
  }
  throw std::invalid_argument("no source labelled '" + label + "' in the config");
}

SimConfig RunConfig::sim_config() const {
  SimConfig sim;
  sim.n_pulses = pulses;
  sim.seed = seed;
  sim.rep_period_ps = rep_period_ps();
  sim.efficiencies = efficiencies();
  sim.workers = workers;
  sim.cycle_pulses = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(rep_rate_hz * cycle_duration_s)));
  return sim;
}

void RunConfig::validate() const {
  if (!(rep_rate_hz > 0.0) || !std::isfinite(rep_rate_hz)) throw std::invalid_argument("rep_rate_hz must be > 0");
  geometry.validate();
  efficiencies().validate();
  if (sources.empty()) throw std::invalid_argument("config needs at least one source");
  std::set<std::string> labels;
  for (const auto& s : sources) {
    s.validate();
    if (!labels.insert(s.label).second) throw std::invalid_argument("duplicate source label " + s.label);
  }
  if (pulses == 0) throw std::invalid_argument("pulses must be > 0");
  if (method1_detector < 1 || method1_detector > kDetectors) {
    throw std::invalid_argument("method1_detector must be 1..4");
  }
  if (cycles < 2) throw std::invalid_argument("cycles must be >= 2");
  if (!(cycle_duration_s > 0.0)) throw std::invalid_argument("cycle_duration_s must be > 0");
  for (double mu : fluct_mu_grid) {
    if (!(mu > 0.0)) throw std::invalid_argument("fluct_mu_grid values must be > 0");
  }
  sim_config().validate();
}

RunConfig config_from_json(const json& j) {
  reject_unknown(j,
                 {"geometry", "eta_c", "eta_d", "rep_rate_hz", "sources", "pulses", "seed", "workers",
                  "method1_detector", "cycles", "cycle_duration_s", "fluct_mu_grid", "output_dir"},
                 "config");
  RunConfig cfg;
  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    reject_unknown(g, {"bs3", "bs4", "bs5", "leaf_to_detector"}, "geometry");
    if (g.contains("bs3")) cfg.geometry.root = splitter_from_json(g.at("bs3"), "bs3");
    if (g.contains("bs4")) cfg.geometry.transmitted = splitter_from_json(g.at("bs4"), "bs4");
    if (g.contains("bs5")) cfg.geometry.reflected = splitter_from_json(g.at("bs5"), "bs5");
    if (g.contains("leaf_to_detector")) {
      const auto leaves = g.at("leaf_to_detector").get<std::vector<int>>();
      if (leaves.size() != kDetectors) throw std::invalid_argument("leaf_to_detector needs 4 entries");
      for (int i = 0; i < kDetectors; ++i) cfg.geometry.leaf_to_detector[i] = leaves[i] - 1;
    }
  }
  if (j.contains("eta_c")) {
    const auto& c = j.at("eta_c");
    if (c.is_array()) {
      const auto v = c.get<std::vector<double>>();
      if (v.size() != kDetectors) throw std::invalid_argument("eta_c array needs 4 entries");
      for (int i = 0; i < kDetectors; ++i) cfg.coupling[i] = v[i];
    } else {
      cfg.coupling.fill(c.get<double>());
    }
  }
  cfg.detector_efficiency = j.value("eta_d", cfg.detector_efficiency);
  cfg.rep_rate_hz = j.value("rep_rate_hz", cfg.rep_rate_hz);
  if (j.contains("sources")) {
    cfg.sources.clear();
    for (const auto& s : j.at("sources")) cfg.sources.push_back(source_from_json(s));
  }
  cfg.pulses = j.value("pulses", cfg.pulses);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.workers = j.value("workers", cfg.workers);
  cfg.method1_detector = j.value("method1_detector", cfg.method1_detector);
  cfg.cycles = j.value("cycles", cfg.cycles);
  cfg.cycle_duration_s = j.value("cycle_duration_s", cfg.cycle_duration_s);
  cfg.fluct_mu_grid = j.value("fluct_mu_grid", cfg.fluct_mu_grid);
  cfg.output_dir = j.value("output_dir", cfg.output_dir);
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  auto splitter = [](const BeamSplitter& bs) { return nlohmann::ordered_json{{"t2", bs.t2}, {"r2", bs.r2}}; };
  std::vector<int> leaves;
  for (int d : cfg.geometry.leaf_to_detector) leaves.push_back(d + 1);
  j["geometry"] = {{"bs3", splitter(cfg.geometry.root)},
                   {"bs4", splitter(cfg.geometry.transmitted)},
                   {"bs5", splitter(cfg.geometry.reflected)},
                   {"leaf_to_detector", leaves}};
  j["eta_c"] = cfg.coupling;
  j["eta_d"] = cfg.detector_efficiency;
  j["rep_rate_hz"] = cfg.rep_rate_hz;
  auto sources = nlohmann::ordered_json::array();
  for (const auto& s : cfg.sources) {
    sources.push_back({{"label", s.label},
                       {"mu", s.mu},
                       {"fluct_a", s.fluctuation.slope},
                       {"fluct_b", s.fluctuation.intercept},
                       {"dark_rate", s.dark_rate}});
  }
  j["sources"] = sources;
  j["pulses"] = cfg.pulses;
  j["seed"] = cfg.seed;
  j["workers"] = cfg.workers;
  j["method1_detector"] = cfg.method1_detector;
  j["cycles"] = cfg.cycles;
  j["cycle_duration_s"] = cfg.cycle_duration_s;
  j["fluct_mu_grid"] = cfg.fluct_mu_grid;
  j["output_dir"] = cfg.output_dir;
  return j;
}

RunConfig load_config(const std::filesystem::path& path) {
  const auto j = json::parse(io::read_file(path));
  return config_from_json(j);
}

}  // namespace wcp
