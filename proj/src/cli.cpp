#include "wcp/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "wcp/bounds.hpp"
#include "wcp/config.hpp"
#include "wcp/estimation.hpp"
#include "wcp/io.hpp"
#include "wcp/leakage.hpp"
#include "wcp/rng.hpp"
#include "wcp/simulator.hpp"

namespace wcp::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
};

struct Context {
  CommonOptions common;
  RunConfig config;
  fs::path out_dir;

  fs::path output(const std::string& name) const {
    fs::path p(name);
    return p.is_absolute() ? p : out_dir / p;
  }
};

Context make_context(const CommonOptions& common) {
  Context ctx;
  ctx.common = common;
  if (!common.config_path.empty()) ctx.config = load_config(common.config_path);
  if (!common.out_dir.empty()) {
    ctx.out_dir = common.out_dir;
  } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
    ctx.out_dir = env;
  } else if (!ctx.config.output_dir.empty()) {
    ctx.out_dir = ctx.config.output_dir;
  } else {
    ctx.out_dir = ".";
  }
  return ctx;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--config", common.config_path, "Run configuration JSON")->check(CLI::ExistingFile);
  cmd->add_option("--out-dir", common.out_dir, "Directory for relative output paths");
}

DetectorArray efficiencies_for(const Context& ctx, const std::string& eff_path) {
  if (!eff_path.empty()) return io::efficiency_from_json(json::parse(io::read_file(eff_path)));
  return ctx.config.efficiencies().overall;
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::vector<double> linspace(double lo, double hi, int steps) {
  if (steps < 1) throw std::invalid_argument("--steps must be >= 1");
  if (steps == 1) return {lo};
  std::vector<double> v(steps);
  for (int i = 0; i < steps; ++i) v[i] = lo + (hi - lo) * i / (steps - 1);
  return v;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  CommonOptions common;
  std::string source = "S1";
  std::optional<double> mu;
  std::optional<std::uint64_t> pulses;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string hist_out = "histogram.json";
  std::string timestamps_out;
};

int run_simulate(const SimulateArgs& a, std::ostream& out) {
  auto ctx = make_context(a.common);
  auto& cfg = ctx.config;
  if (a.pulses) cfg.pulses = *a.pulses;
  if (a.seed) cfg.seed = *a.seed;
  if (a.workers) cfg.workers = *a.workers;
  SourceModel source = cfg.source(a.source);
  if (a.mu) source.mu = *a.mu;
  cfg.validate();

  SimConfig sim = cfg.sim_config();
  PatternHistogram hist;
  if (!a.timestamps_out.empty()) {
    sim.emit_timestamps = true;
    auto run = simulate_timestamps(source, sim);
    hist = run.histogram;
    io::write_file_atomic(ctx.output(a.timestamps_out), io::timestamps_to_csv(run.records));
  } else {
    hist = simulate_pulses(source, sim);
  }

  json j = io::histogram_to_json(hist);
  j["meta"] = {{"source", source.label}, {"mu", source.mu}, {"seed", cfg.seed}};
  io::write_file_atomic(ctx.output(a.hist_out), j.dump(2) + "\n");

  const auto summary = observed_coincidences(hist);
  out << "simulate: " << source.label << " mu=" << source.mu << " pulses=" << hist.total_pulses
      << " seed=" << cfg.seed << " c_obs=[" << summary.order[0] << ", " << summary.order[1] << ", "
      << summary.order[2] << ", " << summary.order[3] << "] -> " << ctx.output(a.hist_out).string()
      << "\n";
  return 0;
}

// ------------------------------------------------------------- coincidence

struct CoincidenceArgs {
  CommonOptions common;
  std::string hist;
  std::string timestamps;
  std::optional<std::uint64_t> n_pulses;
  std::optional<std::uint64_t> rep_period_ps;
  std::uint64_t offset_ps = 0;
  std::optional<std::uint64_t> window_start_ps;
  std::optional<std::uint64_t> window_width_ps;
  std::string out = "coincidences.json";
  std::string hist_out;
};

int run_coincidence(const CoincidenceArgs& a, std::ostream& out) {
  auto ctx = make_context(a.common);
  PatternHistogram hist;
  std::uint64_t discarded = 0;
  if (!a.hist.empty()) {
    hist = io::histogram_from_json(json::parse(io::read_file(a.hist)));
  } else {
    if (!a.n_pulses) throw std::invalid_argument("--n-pulses is required with --timestamps");
    BinningOptions opt;
    opt.n_pulses = *a.n_pulses;
    opt.rep_period_ps = a.rep_period_ps.value_or(ctx.config.rep_period_ps());
    opt.offset_ps = a.offset_ps;
    if (a.window_start_ps || a.window_width_ps) {
      if (!a.window_width_ps) throw std::invalid_argument("--window-width-ps is required for a window");
      opt.window = IntraPeriodWindow{a.window_start_ps.value_or(0), *a.window_width_ps};
    }
    const auto records = io::timestamps_from_csv(io::read_file(a.timestamps));
    auto binned = patterns_from_timestamps(records, opt);
    hist = binned.histogram;
    discarded = binned.discarded;
    if (!a.hist_out.empty()) {
      io::write_file_atomic(ctx.output(a.hist_out), io::histogram_to_json(hist).dump(2) + "\n");
    }
  }
  const auto summary = observed_coincidences(hist);
  io::write_file_atomic(ctx.output(a.out), io::summary_to_json(summary).dump(2) + "\n");
  out << "coincidence: pulses=" << summary.total_pulses << " discarded=" << discarded << " c_obs=["
      << summary.order[0] << ", " << summary.order[1] << ", " << summary.order[2] << ", "
      << summary.order[3] << "] -> " << ctx.output(a.out).string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  CommonOptions common;
  std::string summary;
  std::string eff;
  std::string method = "both";
  std::optional<int> detector;
  std::optional<double> rep_rate;
  std::string out = "estimate.json";
};

int run_estimate(const EstimateArgs& a, std::ostream& out) {
  auto ctx = make_context(a.common);
  const auto summary = io::summary_from_json(json::parse(io::read_file(a.summary)));
  const auto eta = efficiencies_for(ctx, a.eff);
  const int detector = a.detector.value_or(ctx.config.method1_detector);
  if (detector < 1 || detector > kDetectors) throw std::invalid_argument("--detector must be 1..4");
  const double rate = a.rep_rate.value_or(ctx.config.rep_rate_hz);

  json report;
  report["total_pulses"] = summary.total_pulses;
  json estimates = json::array();
  std::ostringstream line;
  line << "estimate:";
  // Method II first so a summary without clicks fails before anything is written
  std::optional<MuEstimate> rigorous;
  if (a.method == "II" || a.method == "both") rigorous = estimate_mu_rigorous(summary, eta);
  if (a.method == "I" || a.method == "both") {
    const auto single = estimate_mu_single(summary, rate, eta, detector - 1);
    auto e = io::estimate_to_json(single);
    e["detector"] = detector;
    estimates.push_back(e);
    line << " mu_I=" << single.mu_hat;
  }
  if (rigorous) {
    auto e = io::estimate_to_json(*rigorous);
    try {
      const auto p = poissonity_test(summary, rigorous->mu_hat, eta);
      e["poissonity"] = {{"statistic", p.statistic},
                         {"degrees_of_freedom", p.degrees_of_freedom},
                         {"threshold", p.threshold},
                         {"passed", p.passed},
                         {"orders_used", p.orders_used}};
      line << " mu_II=" << rigorous->mu_hat << " poissonian=" << (p.passed ? "yes" : "no");
    } catch (const InsufficientData& ex) {
      e["poissonity"] = {{"error", ex.what()}};
      line << " mu_II=" << rigorous->mu_hat << " poissonian=untested";
    }
    estimates.push_back(e);
  }
  report["estimates"] = estimates;
  io::write_file_atomic(ctx.output(a.out), report.dump(2) + "\n");
  out << line.str() << " -> " << ctx.output(a.out).string() << "\n";
  return 0;
}

// ------------------------------------------------------------------ bounds

struct BoundsArgs {
  CommonOptions common;
  std::string summary;
  std::string eff;
  std::string out = "bounds.json";
};

int run_bounds(const BoundsArgs& a, std::ostream& out) {
  auto ctx = make_context(a.common);
  const auto summary = io::summary_from_json(json::parse(io::read_file(a.summary)));
  const auto eta = efficiencies_for(ctx, a.eff);
  const auto b = photon_number_bounds(summary, eta);
  io::write_file_atomic(ctx.output(a.out), io::bounds_to_json(b).dump(2) + "\n");
  static const char* names[] = {"p0", "p1", "p2", "p3", "p>=4"};
  out << "bounds:";
  for (int k = 0; k < kBoundEntries; ++k) {
    out << " " << names[k] << "=[" << b.lower[k] << ", " << b.upper[k] << "]";
  }
  out << " -> " << ctx.output(a.out).string() << "\n";
  return 0;
}

// ----------------------------------------------------------------- leakage

struct LeakageArgs {
  CommonOptions common;
  std::vector<double> pair_r;
  std::vector<double> mu;
  std::optional<double> mu_single;
  std::optional<double> mu_rigorous;
  std::string fits;
  double at_mu = 0.5;
  std::string distributions_out;
  std::string out = "leakage.json";
};

int run_leakage(const LeakageArgs& a, std::ostream& out) {
  auto ctx = make_context(a.common);
  if (a.pair_r.empty() && a.mu.empty() && !a.mu_single && a.fits.empty()) {
    throw std::invalid_argument("nothing to evaluate: give --pair-r, --mu, --mu-I/--mu-II or --fits");
  }
  if (a.mu_single.has_value() != a.mu_rigorous.has_value()) {
    throw std::invalid_argument("--mu-I and --mu-II must be given together");
  }

  io::LeakageDocument doc;
  for (std::size_t i = 0; i < a.pair_r.size(); ++i) {
    LeakageReport rep;
    rep.label_a = "input";
    rep.label_b = std::to_string(i + 1);
    rep.r = a.pair_r[i];
    rep.i_prime = pairwise_leakage(rep.r);
    doc.pairs.push_back(rep);
    out << "leakage: R=" << rep.r << " I'(A:E)=" << fixed(rep.i_prime, 4) << "\n";
  }

  if (!a.fits.empty()) {
    const auto fits = json::parse(io::read_file(a.fits));
    std::vector<LabeledDistribution> sources;
    for (const auto& s : fits.at("sources")) {
      const auto fit = io::fluctuation_fit_from_json(s);
      sources.push_back({s.at("label").get<std::string>(), source_distribution_at(fit.model, a.at_mu)});
    }
    for (const auto& rep : pairwise_reports(sources)) {
      doc.pairs.push_back(rep);
      out << "leakage: " << rep.pair() << " R=" << fixed(rep.r, 4) << " I'(A:E)=" << fixed(rep.i_prime, 4)
          << "\n";
    }
    if (!a.distributions_out.empty()) {
      double upper = 0.0;
      for (const auto& s : sources) upper = std::max(upper, s.distribution.grid.back());
      std::string csv = "x";
      for (const auto& s : sources) csv += "," + s.label;
      csv += "\n";
      const std::size_t n = kDefaultGridPoints;
      for (std::size_t i = 0; i < n; ++i) {
        const double x = upper * static_cast<double>(i) / static_cast<double>(n - 1);
        csv += io::format_double(x);
        for (const auto& s : sources) csv += "," + io::format_double(s.distribution.density_at(x));
        csv += "\n";
      }
      io::write_file_atomic(ctx.output(a.distributions_out), csv);
    }
  }

  for (double mu : a.mu) {
    const double i_ae = info_leakage(mu);
    doc.multi_photon.push_back({mu, i_ae});
    out << "leakage: mu=" << mu << " I(A:E)=" << i_ae << "\n";
  }
  if (a.mu_single) {
    const double d = leakage_difference(*a.mu_rigorous, *a.mu_single);
    doc.misestimation.push_back({*a.mu_single, *a.mu_rigorous, d});
    out << "leakage: mu_I=" << *a.mu_single << " mu_II=" << *a.mu_rigorous << " delta_I=" << d << "\n";
  }
  io::write_file_atomic(ctx.output(a.out), io::leakage_to_json(doc).dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------------- fluct

struct FluctArgs {
  CommonOptions common;
  std::optional<int> cycles;
  std::optional<double> cycle_duration;
  std::optional<std::uint64_t> seed;
  std::optional<int> detector;
  std::vector<double> mu_grid;
  std::string fits_out = "fits.json";
  std::string points_out = "fluct_points.csv";
  std::string series_dir;
};

int run_fluct(const FluctArgs& a, std::ostream& out) {
  auto ctx = make_context(a.common);
  auto& cfg = ctx.config;
  if (a.cycles) cfg.cycles = *a.cycles;
  if (a.cycle_duration) cfg.cycle_duration_s = *a.cycle_duration;
  if (a.seed) cfg.seed = *a.seed;
  if (a.detector) cfg.method1_detector = *a.detector;
  if (!a.mu_grid.empty()) cfg.fluct_mu_grid = a.mu_grid;
  cfg.validate();

  const int detector0 = cfg.method1_detector - 1;
  const auto base = cfg.sim_config();
  const double eta = base.efficiencies.overall[detector0];
  const auto pulses = pulses_per_cycle(cfg.cycle_duration_s, base);

  json fits;
  fits["seed"] = cfg.seed;
  fits["detector"] = cfg.method1_detector;
  fits["cycles"] = cfg.cycles;
  fits["cycle_duration_s"] = cfg.cycle_duration_s;
  json sources = json::array();
  std::string points_csv = "source,mu,sigma,fitted,deviation\n";

  for (std::size_t k = 0; k < cfg.sources.size(); ++k) {
    const auto& src = cfg.sources[k];
    std::map<double, std::vector<double>> series_per_mu;
    for (std::size_t m = 0; m < cfg.fluct_mu_grid.size(); ++m) {
      SourceModel point = src;
      point.mu = cfg.fluct_mu_grid[m];
      SimConfig sim = base;
      sim.seed = derive_seed(derive_seed(cfg.seed, StreamPurpose::fluct_source, k), StreamPurpose::fluct_source, m);
      const auto counts = simulate_count_series(point, cfg.cycles, cfg.cycle_duration_s, sim, detector0);
      if (!a.series_dir.empty()) {
        const auto name = src.label + "_mu" + io::format_double(point.mu) + ".csv";
        io::write_file_atomic(ctx.output(a.series_dir) / name, io::count_series_to_csv(counts));
      }
      series_per_mu[point.mu] = per_cycle_mean_photon(counts, pulses, eta);
    }
    const auto fit = fit_fluctuation(series_per_mu);
    json entry = io::fluctuation_fit_to_json(fit);
    entry["label"] = src.label;
    sources.push_back(entry);
    for (const auto& p : fit.points) {
      points_csv += src.label + "," + io::format_double(p.mu) + "," + io::format_double(p.sigma) + "," +
                    io::format_double(p.fitted) + "," + io::format_double(p.deviation) + "\n";
    }
    out << "fluct: " << src.label << " a=" << fit.model.slope << " (+/- " << fit.slope_stderr
        << ") b=" << fit.model.intercept << " (+/- " << fit.intercept_stderr << ")\n";
  }
  fits["sources"] = sources;
  io::write_file_atomic(ctx.output(a.fits_out), fits.dump(2) + "\n");
  io::write_file_atomic(ctx.output(a.points_out), points_csv);
  out << "fluct: -> " << ctx.output(a.fits_out).string() << "\n";
  return 0;
}

// ------------------------------------------------------------------- sweep

struct SweepArgs {
  CommonOptions common;
  double mu_min = 0.1;
  double mu_max = 1.0;
  int steps = 10;
  std::optional<std::uint64_t> pulses;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<int> detector;
  std::string out = "sweep.csv";
};

int run_sweep(const SweepArgs& a, std::ostream& out) {
  auto ctx = make_context(a.common);
  auto& cfg = ctx.config;
  if (a.pulses) cfg.pulses = *a.pulses;
  if (a.seed) cfg.seed = *a.seed;
  if (a.workers) cfg.workers = *a.workers;
  if (a.detector) cfg.method1_detector = *a.detector;
  cfg.validate();

  SweepOptions opt;
  opt.method1_detector0 = cfg.method1_detector - 1;
  opt.rep_rate_hz = cfg.rep_rate_hz;
  opt.workers = cfg.workers;
  const auto rows = method_difference_sweep(linspace(a.mu_min, a.mu_max, a.steps), cfg.efficiencies(),
                                            cfg.pulses, cfg.seed, opt);
  io::write_file_atomic(ctx.output(a.out), io::sweep_to_csv(rows));
  for (const auto& r : rows) {
    out << "sweep: mu=" << fixed(r.mu_true, 3) << " mu_I=" << fixed(r.mu_method1, 5)
        << " mu_II=" << fixed(r.mu_method2, 5) << " delta_mu=" << fixed(r.delta_mu, 5)
        << " delta_I=" << r.delta_info << "\n";
  }
  out << "sweep: " << rows.size() << " points -> " << ctx.output(a.out).string() << "\n";
  return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Photon-statistics characterisation of weak coherent pulse sources", "wcpstat"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Monte-Carlo click patterns for one source");
  add_common(c_sim, sim.common);
  c_sim->add_option("--source", sim.source, "Source label from the config");
  c_sim->add_option("--mu", sim.mu, "Override the source's mean photon number");
  c_sim->add_option("--pulses", sim.pulses, "Number of pulses");
  c_sim->add_option("--seed", sim.seed, "Random seed");
  c_sim->add_option("--workers", sim.workers, "Worker threads (0 = all cores)");
  c_sim->add_option("--hist-out", sim.hist_out, "Histogram JSON output");
  c_sim->add_option("--timestamps-out", sim.timestamps_out, "Also write click timestamps CSV");

  CoincidenceArgs co;
  auto* c_co = app.add_subcommand("coincidence", "Coincidence probabilities from a histogram or timestamps");
  add_common(c_co, co.common);
  auto* in_hist = c_co->add_option("--hist", co.hist, "Histogram JSON")->check(CLI::ExistingFile);
  auto* in_ts = c_co->add_option("--timestamps", co.timestamps, "Timestamp CSV")->check(CLI::ExistingFile);
  in_hist->excludes(in_ts);
  c_co->add_option("--n-pulses", co.n_pulses, "Trigger periods covered by the timestamps");
  c_co->add_option("--rep-period-ps", co.rep_period_ps, "Repetition period in ps");
  c_co->add_option("--offset-ps", co.offset_ps, "Time of the first period start in ps");
  c_co->add_option("--window-start-ps", co.window_start_ps, "Intra-period window start");
  c_co->add_option("--window-width-ps", co.window_width_ps, "Intra-period window width");
  c_co->add_option("--out", co.out, "Coincidence summary JSON output");
  c_co->add_option("--hist-out", co.hist_out, "Write the binned histogram as well");

  EstimateArgs es;
  auto* c_es = app.add_subcommand("estimate", "Estimate the mean photon number");
  add_common(c_es, es.common);
  c_es->add_option("--summary", es.summary, "Coincidence summary JSON")->required()->check(CLI::ExistingFile);
  c_es->add_option("--eff", es.eff, "Efficiency JSON")->check(CLI::ExistingFile);
  c_es->add_option("--method", es.method, "I, II or both")->check(CLI::IsMember({"I", "II", "both"}));
  c_es->add_option("--detector", es.detector, "Detector used by Method I (1-4)");
  c_es->add_option("--rep-rate", es.rep_rate, "Repetition rate in Hz");
  c_es->add_option("--out", es.out, "Estimate JSON output");

  BoundsArgs bo;
  auto* c_bo = app.add_subcommand("bounds", "Photon-number probability limits");
  add_common(c_bo, bo.common);
  c_bo->add_option("--summary", bo.summary, "Coincidence summary JSON")->required()->check(CLI::ExistingFile);
  c_bo->add_option("--eff", bo.eff, "Efficiency JSON")->check(CLI::ExistingFile);
  c_bo->add_option("--out", bo.out, "Bounds JSON output");

  LeakageArgs le;
  auto* c_le = app.add_subcommand("leakage", "Information leakage calculators");
  add_common(c_le, le.common);
  c_le->add_option("--pair-r", le.pair_r, "Cross-correlation of a source pair");
  c_le->add_option("--mu", le.mu, "Mean photon number for multi-photon leakage");
  c_le->add_option("--mu-I", le.mu_single, "Single-detector estimate");
  c_le->add_option("--mu-II", le.mu_rigorous, "Four-detector estimate");
  c_le->add_option("--fits", le.fits, "Fluctuation fits JSON from 'fluct'")->check(CLI::ExistingFile);
  c_le->add_option("--at-mu", le.at_mu, "Mean photon number for the source distributions");
  c_le->add_option("--distributions-out", le.distributions_out, "Plot-ready distribution CSV");
  c_le->add_option("--out", le.out, "Leakage report JSON output");

  FluctArgs fl;
  auto* c_fl = app.add_subcommand("fluct", "Intensity-fluctuation series and linear fits");
  add_common(c_fl, fl.common);
  c_fl->add_option("--cycles", fl.cycles, "Cycles per mu point");
  c_fl->add_option("--cycle-duration", fl.cycle_duration, "Cycle duration in seconds");
  c_fl->add_option("--seed", fl.seed, "Random seed");
  c_fl->add_option("--detector", fl.detector, "Detector used for the count series (1-4)");
  c_fl->add_option("--mu-grid", fl.mu_grid, "Mean photon numbers to probe");
  c_fl->add_option("--fits-out", fl.fits_out, "Fit JSON output");
  c_fl->add_option("--points-out", fl.points_out, "Per-point CSV output");
  c_fl->add_option("--series-dir", fl.series_dir, "Directory for per-point count series CSVs");

  SweepArgs sw;
  auto* c_sw = app.add_subcommand("sweep", "Method I vs Method II over a mu grid");
  add_common(c_sw, sw.common);
  c_sw->add_option("--mu-min", sw.mu_min, "First grid value");
  c_sw->add_option("--mu-max", sw.mu_max, "Last grid value");
  c_sw->add_option("--steps", sw.steps, "Number of grid points");
  c_sw->add_option("--pulses", sw.pulses, "Pulses per grid point");
  c_sw->add_option("--seed", sw.seed, "Random seed");
  c_sw->add_option("--workers", sw.workers, "Worker threads (0 = all cores)");
  c_sw->add_option("--detector", sw.detector, "Detector used by Method I (1-4)");
  c_sw->add_option("--out", sw.out, "Sweep CSV output");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (c_sim->parsed()) return run_simulate(sim, out);
    if (c_co->parsed()) {
      if (co.hist.empty() && co.timestamps.empty()) {
        err << "error: coincidence needs --hist or --timestamps\n\n" << c_co->help();
        return 2;
      }
      return run_coincidence(co, out);
    }
    if (c_es->parsed()) return run_estimate(es, out);
    if (c_bo->parsed()) return run_bounds(bo, out);
    if (c_le->parsed()) return run_leakage(le, out);
    if (c_fl->parsed()) return run_fluct(fl, out);
    if (c_sw->parsed()) return run_sweep(sw, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace wcp::cli
