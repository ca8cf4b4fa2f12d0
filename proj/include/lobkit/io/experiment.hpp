#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lobkit/coimpact/coimpact.hpp"
#include "lobkit/core/error.hpp"
#include "lobkit/core/random.hpp"
#include "lobkit/core/stats.hpp"
#include "lobkit/flow/splitting.hpp"
#include "lobkit/flow/zero_intelligence.hpp"
#include "lobkit/impact/propagator.hpp"
#include "lobkit/impact/tim.hpp"
#include "lobkit/io/config.hpp"
#include "lobkit/io/csv.hpp"
#include "lobkit/llob/llob.hpp"
#include "lobkit/lob/book.hpp"
#include "lobkit/lob/event_csv.hpp"
#include "lobkit/metaorder/metaorder.hpp"
#include "lobkit/stats/autocorrelation.hpp"
#include "lobkit/stats/curve.hpp"
#include "lobkit/stats/response.hpp"
#include "lobkit/stats/sign_series.hpp"
#include "lobkit/version.hpp"

namespace lobkit::io {

namespace fs = std::filesystem;

/// Files produced by one replica, in write order: (relative name, contents).
using OutputFiles = std::vector<std::pair<std::string, std::string>>;

/// Two-column `quantity,value` table.
class Summary {
public:
  void add(const std::string& key, double v) { w_.row(key, v); }
  void add(const std::string& key, const std::string& v) { w_.row(key, v); }
  std::string str() const { return w_.str(); }

private:
  CsvWriter w_{"quantity", "value"};
};

namespace detail {

inline SplittingPopulation splitting_population(const ExperimentConfig& c) {
  SplittingPopulation p;
  p.agents = static_cast<std::int32_t>(c.integer("generator", "agents"));
  p.alpha = c.real("generator", "alpha");
  p.herding = c.real("generator", "herding");
  return p;
}

inline SignSeries splitting_signs(const ExperimentConfig& c, std::uint64_t seed) {
  return simulate_splitting_agents(splitting_population(c), static_cast<std::size_t>(c.integer("generator", "count")),
                                   seed);
}

inline OutputFiles run_simulate_flow(const ExperimentConfig& c, std::uint64_t seed) {
  return {{"signs.csv", signs_to_csv(splitting_signs(c, seed))}};
}

inline OutputFiles run_simulate_book(const ExperimentConfig& c, std::uint64_t seed) {
  const double tick = c.real("model", "tick");
  const BookState book = BookState::symmetric(
      static_cast<std::int32_t>(c.integer("model", "levels")), tick, static_cast<std::int32_t>(c.integer("model", "best_bid")),
      static_cast<std::int32_t>(c.integer("model", "spread")), static_cast<std::int32_t>(c.integer("model", "per_side")),
      c.integer("model", "depth"));
  const PoissonRates rates{c.reals("generator", "limit"), c.reals("generator", "cancel"),
                           c.real("generator", "market_buy"), c.real("generator", "market_sell")};
  const EventStream events = simulate_zi(rates, book, c.real("generator", "horizon"), seed);
  const Replay r = replay(book, events);
  Summary s;
  s.add("events", static_cast<double>(events.size()));
  s.add("trades", static_cast<double>(r.trades.size()));
  s.add("unfilled", static_cast<double>(r.unfilled));
  s.add("final_mid", r.final_book.midprice());
  return {{"events.csv", events_to_csv(events)}, {"trades.csv", trades_to_csv(r.trades, tick)}, {"summary.csv", s.str()}};
}

inline OutputFiles run_stats(const ExperimentConfig& c, std::uint64_t seed) {
  const SignSeries signs = splitting_signs(c, seed);
  const auto max_lag = static_cast<std::size_t>(c.integer("fit", "max_lag"));
  const SignAutocorrelation ac = sign_autocorr(signs, max_lag);
  const PowerLawTailFit fit = fit_powerlaw_tail(ac.curve, c.real("fit", "lag_min"), c.real("fit", "lag_max"));
  const std::vector<std::size_t> lags = log_lags(1, max_lag);
  const SplitHerdDecomposition d = split_herd_decompose(signs, lags);
  CsvWriter sh({"tau", "total", "split", "herd"});
  for (std::size_t i = 0; i < d.lags.size(); ++i) sh.row(d.lags[i], d.total[i], d.split[i], d.herd[i]);
  Summary s;
  s.add("gamma", fit.gamma);
  s.add("gamma_stderr", fit.gamma_stderr);
  s.add("hurst", fit.hurst);
  s.add("r_squared", fit.r_squared);
  return {{"autocorrelation.csv", curve_to_csv(ac.curve)}, {"split_herd.csv", sh.str()}, {"summary.csv", s.str()}};
}

/// Splitting-agent signs pushed through a single-propagator price model.
struct PropagatorRun {
  SignSeries signs;
  Curve response;
};

inline PropagatorRun propagator_run(const ExperimentConfig& c, std::uint64_t seed) {
  PropagatorRun r{splitting_signs(c, derive_seed(seed, 0)), {}};
  const Kernel g = Kernel::power_law(c.real("model", "g0"), c.real("model", "gamma"), c.real("model", "l0"));
  const auto n = static_cast<std::int64_t>(r.signs.size());
  const std::vector<double> prices =
      tim_price(unit_orders(r.signs.signs), ImpactSpec::single(g, ImpactFunction::linear(), c.real("model", "noise")), n,
                derive_seed(seed, 1));
  const std::vector<std::int64_t> lags = symmetric_lags(c.integer("fit", "max_lag"));
  r.response = response_function(r.signs.signs, prices, lags);
  return r;
}

inline OutputFiles run_impact(const ExperimentConfig& c, std::uint64_t seed) {
  const PropagatorRun r = propagator_run(c, seed);
  Summary s;
  s.add("response_lag_1", r.response.at(1.0));
  s.add("response_lag_max", r.response.x.empty() ? 0.0 : r.response.value.back());
  return {{"response.csv", curve_to_csv(r.response)}, {"summary.csv", s.str()}};
}

inline OutputFiles run_calibrate(const ExperimentConfig& c, std::uint64_t seed) {
  const PropagatorRun r = propagator_run(c, seed);
  const auto max_lag = static_cast<std::size_t>(c.integer("fit", "max_lag"));
  const std::vector<double> corr = dense_correlation(sign_autocorr(r.signs, max_lag).curve);
  CalibrationOptions opt;
  opt.l0 = c.real("model", "l0");
  const PropagatorFit fit = calibrate_propagator(r.response, corr, opt);
  Summary s;
  s.add("g0", fit.kernel.g0());
  s.add("g0_stderr", fit.g0_stderr);
  s.add("gamma", fit.shape);
  s.add("objective", fit.objective);
  s.add("converged", fit.converged ? 1.0 : 0.0);
  return {{"response.csv", curve_to_csv(r.response)}, {"fitted.csv", curve_to_csv(fit.fitted)}, {"summary.csv", s.str()}};
}

inline OutputFiles run_llob(const ExperimentConfig& c, std::uint64_t) {
  const LlobParams p{c.real("model", "diffusivity"), c.real("model", "cancellation"), c.real("model", "deposition")};
  p.validate();
  const double duration = c.real("generator", "duration");
  TrajectoryOptions opt;
  opt.nodes = static_cast<std::size_t>(c.integer("generator", "nodes"));
  CsvWriter scaling({"eta", "impact", "F"});
  for (double eta : logspace(c.real("generator", "eta_min"), c.real("generator", "eta_max"),
                             static_cast<std::size_t>(c.integer("generator", "points")))) {
    const ImpactScaling s = impact_scaling(eta * p.transaction_rate() * duration, duration, p, opt);
    scaling.row(eta, s.impact, s.scaling);
  }
  // Unit participation, observed through twice the execution time.
  const std::vector<double> times = linspace(2.0 * duration / 100.0, 2.0 * duration, 100);
  opt.horizon = 2.0 * duration;
  const Trajectory tr = price_trajectory_selfconsistent(
      p, MetaorderSchedule::constant(p.transaction_rate() * duration, duration), times, opt);
  return {{"scaling.csv", scaling.str()}, {"trajectory.csv", trajectory_to_csv(tr.times, tr.displacement)}};
}

inline OutputFiles run_metaorder(const ExperimentConfig& c, std::uint64_t seed) {
  const double volume = c.real("model", "daily_volume");
  const double sigma = c.real("model", "volatility");
  TimMarket market;
  market.kernel = Kernel::power_law(c.real("model", "g0"), c.real("model", "gamma"), 0.0);
  market.impact = ImpactFunction::power(c.real("model", "delta"));
  market.volatility = sigma;
  ExecutionPlan plan = c.text("generator", "shape") == "front-loaded"
                           ? ExecutionPlan::front_loaded(c.real("generator", "decay"))
                           : ExecutionPlan::constant();
  plan.children = static_cast<std::size_t>(c.integer("generator", "children"));
  plan.samples = 21;
  plan.post_horizon = c.real("generator", "post_horizon");
  plan.post_samples = plan.post_horizon > 0.0 ? 20 : 0;

  const double phi_lo = c.real("generator", "phi_min"), phi_hi = c.real("generator", "phi_max");
  const double eta_lo = c.real("generator", "eta_min"), eta_hi = c.real("generator", "eta_max");
  if (!(phi_lo > 0.0 && phi_lo < phi_hi)) throw InvalidArgument("need 0 < generator.phi_min < generator.phi_max");
  if (!(eta_lo > 0.0 && eta_lo < eta_hi && eta_hi <= 1.0))
    throw InvalidArgument("need 0 < generator.eta_min < generator.eta_max <= 1");
  const auto count = static_cast<std::size_t>(c.integer("generator", "count"));
  Rng rng(derive_seed(seed, 0));
  std::vector<ExecutionRecord> records;
  records.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double phi = phi_lo * std::pow(phi_hi / phi_lo, uniform01(rng));
    const double eta = eta_lo * std::pow(eta_hi / eta_lo, uniform01(rng));
    const Metaorder mo = Metaorder::from_participation(random_sign(rng), phi, eta, volume, sigma);
    records.push_back(execute_metaorder(mo, plan, market, derive_seed(seed, i + 1)));
  }

  const ImpactCurve curve =
      measure_impact(records, logspace(phi_lo, phi_hi, static_cast<std::size_t>(c.integer("fit", "phi_bins")) + 1));
  const ImpactSurface surface = measure_impact_surface(
      records, logspace(phi_lo / eta_hi, phi_hi / eta_lo, static_cast<std::size_t>(c.integer("fit", "duration_bins")) + 1),
      logspace(eta_lo, eta_hi, static_cast<std::size_t>(c.integer("fit", "eta_bins")) + 1));
  const SqrtLawFit sqrt_fit = fit_sqrt_law(curve, sigma);
  const SurfaceFit surface_fit = fit_surface(surface);

  Summary s;
  s.add("sqrt_exponent", sqrt_fit.exponent);
  s.add("sqrt_exponent_stderr", sqrt_fit.exponent_stderr);
  s.add("sqrt_prefactor", sqrt_fit.prefactor);
  s.add("surface_amplitude", surface_fit.amplitude);
  s.add("surface_duration_exponent", surface_fit.duration_exponent);
  s.add("surface_participation_exponent", surface_fit.participation_exponent);
  OutputFiles out{{"dataset.csv", records_to_csv(records)},
                  {"impact_curve.csv", impact_curve_to_csv(curve)},
                  {"surface.csv", impact_surface_to_csv(surface)}};
  if (plan.post_horizon > 0.0) {
    const DecayProfile d = decay_profile(records, linspace(plan.post_horizon / 10.0, plan.post_horizon, 10));
    CsvWriter w({"h", "post_mean", "ratio", "stderr"});
    for (std::size_t i = 0; i < d.lag.size(); ++i) w.row(d.lag[i], d.post_mean[i], d.ratio[i], d.ratio_stderr[i]);
    out.emplace_back("decay.csv", w.str());
    s.add("decay_asymptote", d.asymptotic);
    s.add("decay_asymptote_stderr", d.asymptotic_stderr);
  }
  out.emplace_back("summary.csv", s.str());
  return out;
}

inline OutputFiles run_coimpact(const ExperimentConfig& c, std::uint64_t seed) {
  CoImpactModel m;
  m.rho = c.real("model", "rho");
  m.sizes = SizeLaw{c.real("model", "size_tail"), c.real("model", "size_lower"), c.real("model", "size_upper")};
  m.prefactor = c.real("model", "prefactor");
  m.exponent = c.real("model", "exponent");
  const CoImpactEnsemble e =
      simulate_coimpact(static_cast<std::size_t>(c.integer("generator", "days")),
                        CountLaw::geometric(c.real("generator", "mean_count")), m, c.real("model", "noise"), seed);
  const Curve curve = binned_response(e.signed_responses(), logspace(m.sizes.lower, m.sizes.upper,
                                                                     static_cast<std::size_t>(c.integer("fit", "bins")) + 1));
  CsvWriter w({"phi", "impact", "stderr", "n"});
  for (std::size_t i = 0; i < curve.size(); ++i) w.row(curve.x[i], curve.value[i], curve.std_error[i], curve.count[i]);
  const auto [corr, corr_se] = sign_correlation(e.days);
  const OffsetPowerFit fit = fit_offset_power(curve);
  const LinearFit cost = shortfall_vs_imbalance(e.shortfalls(m.prefactor, m.exponent));
  Summary s;
  s.add("sign_correlation", corr);
  s.add("sign_correlation_stderr", corr_se);
  s.add("intercept", fit.intercept);
  s.add("intercept_stderr", fit.intercept_stderr);
  s.add("prefactor", fit.prefactor);
  s.add("exponent", fit.exponent);
  s.add("shortfall_slope", cost.slope);
  s.add("shortfall_slope_stderr", cost.slope_stderr);
  return {{"day_flows.csv", day_flows_to_csv(e.days)}, {"curve.csv", w.str()}, {"summary.csv", s.str()}};
}

}  // namespace detail

/// Computes every output of one replica in memory. Pure in (config, seed).
inline OutputFiles run_replica(const ExperimentConfig& c, std::uint64_t seed) {
  using Runner = OutputFiles (*)(const ExperimentConfig&, std::uint64_t);
  static const std::map<std::string, Runner> runners{
      {"simulate-flow", detail::run_simulate_flow}, {"simulate-book", detail::run_simulate_book},
      {"stats", detail::run_stats},                 {"calibrate", detail::run_calibrate},
      {"impact", detail::run_impact},               {"llob", detail::run_llob},
      {"metaorder", detail::run_metaorder},         {"coimpact", detail::run_coimpact}};
  const auto it = runners.find(c.kind);
  if (it == runners.end()) throw InvalidArgument("unknown experiment kind '" + c.kind + "'");
  return it->second(c, seed);
}

struct OutputRecord {
  std::string path;  ///< relative to the output directory
  std::string hash;  ///< FNV-1a of the bytes, hex
  std::size_t bytes = 0;
};

struct ReplicaStatus {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::vector<OutputRecord> files;
  double seconds = 0.0;
};

/// Everything about a run except the data. Timings are the only
/// non-reproducible fields.
struct RunManifest {
  std::string kind;
  std::string config_hash;
  std::string version = std::string(version_string);
  std::uint64_t master_seed = 0;
  std::vector<ReplicaStatus> replicas;
  double seconds = 0.0;

  bool ok() const {
    return std::all_of(replicas.begin(), replicas.end(), [](const ReplicaStatus& r) { return r.ok; });
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["config_hash"] = config_hash;
    j["version"] = version;
    j["master_seed"] = master_seed;
    j["ok"] = ok();
    j["replicas"] = nlohmann::ordered_json::array();
    for (const auto& r : replicas) {
      nlohmann::ordered_json x;
      x["index"] = r.index;
      x["seed"] = r.seed;
      x["status"] = r.ok ? "ok" : "failed";
      if (!r.ok) x["error"] = r.error;
      x["files"] = nlohmann::ordered_json::array();
      for (const auto& f : r.files) x["files"].push_back({{"path", f.path}, {"fnv1a", f.hash}, {"bytes", f.bytes}});
      x["seconds"] = r.seconds;
      j["replicas"].push_back(std::move(x));
    }
    j["seconds"] = seconds;
    return j;
  }
};

inline std::string replica_directory(std::size_t i) {
  std::string n = std::to_string(i);
  return "replica_" + std::string(n.size() < 3 ? 3 - n.size() : 0, '0') + n;
}

/// Runs every replica with seed derive_seed(master, i) into
/// `<output>/replica_NNN/`, then writes `config.ini` and `manifest.json`.
/// Each file is written via temp-file rename; a failing replica writes no
/// files and is recorded in the manifest.
inline RunManifest run_experiment(const ExperimentConfig& c) {
  using clock = std::chrono::steady_clock;
  if (c.replicas < 1) throw InvalidArgument("replica count must be >= 1");
  const auto start = clock::now();
  const fs::path root(c.output);
  fs::create_directories(root);
  RunManifest m;
  m.kind = c.kind;
  m.config_hash = hex64(config_hash(c));
  m.master_seed = c.seed;
  for (std::size_t i = 0; i < static_cast<std::size_t>(c.replicas); ++i) {
    const auto t0 = clock::now();
    ReplicaStatus r;
    r.index = i;
    r.seed = derive_seed(c.seed, i);
    try {
      const OutputFiles files = run_replica(c, r.seed);
      const fs::path dir = root / replica_directory(i);
      fs::create_directories(dir);
      for (const auto& [name, body] : files) {
        write_file_atomic(dir / name, body);
        r.files.push_back({(fs::path(replica_directory(i)) / name).generic_string(), hex64(fnv1a(body)), body.size()});
      }
      r.ok = true;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    m.replicas.push_back(std::move(r));
  }
  write_file_atomic(root / "config.ini", serialize_config(c));
  m.seconds = std::chrono::duration<double>(clock::now() - start).count();
  write_file_atomic(root / "manifest.json", m.to_json().dump(2) + "\n");
  return m;
}

enum class ReportKind { ImpactCurve, Surface, Response, Decay, CoImpact };

inline ReportKind parse_report_kind(std::string_view s) {
  if (s == "impact-curve") return ReportKind::ImpactCurve;
  if (s == "surface") return ReportKind::Surface;
  if (s == "response") return ReportKind::Response;
  if (s == "decay") return ReportKind::Decay;
  if (s == "coimpact") return ReportKind::CoImpact;
  throw InvalidArgument("unknown report kind '" + std::string(s) +
                        "' (expected impact-curve, surface, response, decay or coimpact)");
}

inline const char* report_name(ReportKind k) {
  switch (k) {
    case ReportKind::ImpactCurve: return "impact-curve";
    case ReportKind::Surface: return "surface";
    case ReportKind::Response: return "response";
    case ReportKind::Decay: return "decay";
    case ReportKind::CoImpact: return "coimpact";
  }
  return "";
}

namespace detail {

/// One panel of a report: x/y columns for a gnuplot data file.
struct Panel {
  std::string name;
  std::string x_label, y_label;
  std::vector<double> x, y;
};

inline std::string panel_to_dat(const Panel& p) {
  std::string s = "# " + p.x_label + " " + p.y_label + "\n";
  for (std::size_t i = 0; i < p.x.size(); ++i) s += format_double(p.x[i]) + " " + format_double(p.y[i]) + "\n";
  return s;
}

/// Rows of one input as cells after the optional source column.
struct ReportRows {
  std::vector<std::vector<std::string>> cells;
  std::vector<Panel> panels;
};

inline ReportRows read_report_input(ReportKind kind, const std::string& text, const std::string& tag) {
  ReportRows out;
  switch (kind) {
    case ReportKind::ImpactCurve: {
      const ImpactCurve c = impact_curve_from_csv(text);
      Panel p{"impact_curve_" + tag, "phi", "impact", {}, {}};
      for (const auto& b : c.bins) {
        out.cells.push_back({format_double(b.phi), format_double(b.impact), format_double(b.std_error), std::to_string(b.count)});
        p.x.push_back(b.phi);
        p.y.push_back(b.impact);
      }
      out.panels.push_back(std::move(p));
      break;
    }
    case ReportKind::Surface: {
      const ImpactSurface s = impact_surface_from_csv(text);
      std::map<std::pair<double, double>, Panel> by_duration;
      for (const auto& cell : s.cells) {
        out.cells.push_back({format_double(cell.duration), format_double(cell.participation), format_double(cell.impact),
                             format_double(cell.std_error), std::to_string(cell.count)});
        auto& p = by_duration[{cell.duration_lower, cell.duration_upper}];
        p.x.push_back(cell.participation);
        p.y.push_back(cell.impact);
      }
      std::size_t k = 0;
      for (auto& [bin, p] : by_duration) {
        p.name = "surface_" + tag + "_T" + std::to_string(k++);
        p.x_label = "eta";
        p.y_label = "impact";
        out.panels.push_back(std::move(p));
      }
      break;
    }
    case ReportKind::Response: {
      const Curve c = curve_from_csv(text);
      Panel p{"response_" + tag, "tau", "response", c.x, c.value};
      for (std::size_t i = 0; i < c.size(); ++i)
        out.cells.push_back({format_double(c.x[i]), format_double(c.value[i]), format_double(c.std_error[i]),
                             std::to_string(c.count[i])});
      out.panels.push_back(std::move(p));
      break;
    }
    case ReportKind::Decay: {
      const Table t = parse_csv(text);
      const auto ch = t.column("h"), cr = t.column("ratio"), cs = t.column("stderr");
      Panel p{"decay_" + tag, "h", "ratio", {}, {}};
      for (const auto& r : t.rows) {
        out.cells.push_back({format_double(parse_double(r[ch], "h")), format_double(parse_double(r[cr], "ratio")),
                             format_double(parse_double(r[cs], "stderr"))});
        p.x.push_back(parse_double(r[ch]));
        p.y.push_back(parse_double(r[cr]));
      }
      out.panels.push_back(std::move(p));
      break;
    }
    case ReportKind::CoImpact: {
      const Table t = parse_csv(text);
      const auto cp = t.column("phi"), ci = t.column("impact"), cs = t.column("stderr"), cn = t.column("n");
      Panel p{"coimpact_" + tag, "phi", "impact", {}, {}};
      for (const auto& r : t.rows) {
        out.cells.push_back({format_double(parse_double(r[cp], "phi")), format_double(parse_double(r[ci], "impact")),
                             format_double(parse_double(r[cs], "stderr")), std::to_string(parse_int(r[cn], "n"))});
        p.x.push_back(parse_double(r[cp]));
        p.y.push_back(parse_double(r[ci]));
      }
      out.panels.push_back(std::move(p));
      break;
    }
  }
  return out;
}

inline std::vector<std::string> report_header(ReportKind kind) {
  switch (kind) {
    case ReportKind::ImpactCurve:
    case ReportKind::CoImpact: return {"phi", "impact", "stderr", "n"};
    case ReportKind::Surface: return {"T", "eta", "impact", "stderr", "n"};
    case ReportKind::Response: return {"tau", "response", "stderr", "n"};
    case ReportKind::Decay: return {"h", "ratio", "stderr"};
  }
  return {};
}

}  // namespace detail

/// Tidy CSV `<kind>.csv` plus one gnuplot two-column `.dat` per panel in
/// `out_dir`. With several inputs a leading `source` column holds the input
/// index. Returns the written paths.
inline std::vector<fs::path> emit_report(std::span<const fs::path> inputs, ReportKind kind, const fs::path& out_dir) {
  if (inputs.empty()) throw InvalidArgument("report needs at least one input file");
  std::vector<std::string> missing;
  for (const auto& p : inputs)
    if (!fs::is_regular_file(p)) missing.push_back(p.string());
  if (!missing.empty()) {
    std::string msg = "missing report input(s):";
    for (const auto& m : missing) msg += " " + m;
    throw InvalidArgument(msg);
  }
  const bool tagged = inputs.size() > 1;
  std::vector<std::string> header = detail::report_header(kind);
  if (tagged) header.insert(header.begin(), "source");
  std::string csv;
  for (std::size_t i = 0; i < header.size(); ++i) csv += (i ? "," : "") + header[i];
  csv += "\n";
  std::vector<detail::Panel> panels;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    detail::ReportRows rows = detail::read_report_input(kind, read_file(inputs[i]), std::to_string(i));
    for (const auto& r : rows.cells) {
      std::string line = tagged ? std::to_string(i) : std::string{};
      for (std::size_t k = 0; k < r.size(); ++k) line += (k || tagged ? "," : "") + r[k];
      csv += line + "\n";
    }
    for (auto& p : rows.panels) panels.push_back(std::move(p));
  }
  fs::create_directories(out_dir);
  std::vector<fs::path> written{out_dir / (std::string(report_name(kind)) + ".csv")};
  write_file_atomic(written.back(), csv);
  for (const auto& p : panels) {
    written.push_back(out_dir / (p.name + ".dat"));
    write_file_atomic(written.back(), detail::panel_to_dat(p));
  }
  return written;
}

}  // namespace lobkit::io
