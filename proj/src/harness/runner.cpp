#include "fmopto/harness/runner.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "fmopto/errors.hpp"
#include "fmopto/harness/csv.hpp"
#include "fmopto/parallel.hpp"

#ifndef FMOPTO_VERSION
#define FMOPTO_VERSION "dev"
#endif

namespace fmopto::harness {

namespace fs = std::filesystem;

std::string version() { return FMOPTO_VERSION; }

ObservableSeries phonon_series(const SimulationTrace& trace, bool raw) {
  ObservableSeries s;
  s.label = raw ? "phonon_number_raw" : "phonon_number";
  s.times = trace.times;
  s.values.reserve(trace.covariances.size());
  for (const auto& V : trace.covariances) s.values.push_back(raw ? phonon_number_raw(V) : phonon_number(V));
  return s;
}

ObservableSeries entanglement_series(const SimulationTrace& trace) {
  ObservableSeries s;
  s.label = "log_negativity";
  s.times = trace.times;
  s.values.reserve(trace.covariances.size());
  for (const auto& V : trace.covariances) s.values.push_back(log_negativity(V));
  return s;
}

ObservableSeries stroboscopic(const ObservableSeries& series, double nu) {
  ObservableSeries out;
  out.label = series.label;
  if (series.times.empty()) return out;
  const double period = kTwoPi / nu;
  const double t0 = series.times.front();
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double phase = (series.times[i] - t0) / period;
    if (std::abs(phase - std::round(phase)) < 1e-6) {
      out.times.push_back(series.times[i]);
      out.values.push_back(series.values[i]);
    }
  }
  return out;
}

namespace {

ObservableSeries tail(const ObservableSeries& s, std::size_t begin) {
  ObservableSeries out;
  out.label = s.label;
  out.times.assign(s.times.begin() + static_cast<long>(begin), s.times.end());
  out.values.assign(s.values.begin() + static_cast<long>(begin), s.values.end());
  return out;
}

struct Averaged {
  Cutoff cutoff;
  double value = kNaN;
  bool settled = false;
};

// Mean of an observable over full-trace samples [first, last], both ends on
// period boundaries.
using WindowMean = std::function<double(std::size_t, std::size_t)>;

// Cutoff from the stroboscopic series; the value is the mean over the last
// `window` complete periods of the dense tail, settled or not.
Averaged settle_and_average(const ObservableSeries& full, std::size_t dense_begin, double nu, int window,
                            const WindowMean& mean) {
  Averaged out;
  out.cutoff = transient_cutoff(stroboscopic(full, nu), nu);
  const PeriodMeans pm = period_means(tail(full, dense_begin), nu);
  if (pm.means.empty()) return out;
  const std::size_t w = std::min<std::size_t>(pm.means.size(), static_cast<std::size_t>(window));
  const std::size_t first = dense_begin + pm.first_index[pm.means.size() - w];
  const std::size_t last = dense_begin + pm.first_index.back() + pm.counts.back();
  out.value = mean(first, last);
  out.settled = out.cutoff.settled && w == static_cast<std::size_t>(window) &&
                full.times[first] >= out.cutoff.t_ss - 1e-9 * (kTwoPi / nu);
  return out;
}

// Rectangle rule over whole periods: spectrally accurate for smooth periodic data.
WindowMean sample_mean(const ObservableSeries& s) {
  return [&s](std::size_t first, std::size_t last) {
    double sum = 0.0;
    for (std::size_t i = first; i < last; ++i) sum += s.values[i];
    return sum / static_cast<double>(last - first);
  };
}

}  // namespace

PointResult simulate_point(const ReducedParams& params, const SimulationSettings& settings,
                           const PointOptions& options) {
  PointResult res;
  res.params = params;
  try {
    params.validate();
    if (options.with_floquet) res.floquet = floquet_multipliers(params, settings.step).verdict;

    CovarianceIntegration span;
    span.t0 = 0.0;
    span.t1 = settings.t_max_periods * kTwoPi;
    span.step = settings.step;
    span.stride = settings.stride;
    span.dense_tail_periods = std::max(settings.dense_tail_periods, settings.average_periods);
    span.divergence_factor = settings.divergence_factor;
    span.method = settings.integrator;

    const CovarianceMatrix V0 = initial_covariance(params.n_th);
    SimulationTrace trace;
    if (settings.coupling == CouplingMode::mean_field) {
      MeanFieldState start;
      start.alpha = -std::complex<double>(0.0, 1.0) * params.E / std::complex<double>(0.5 * params.kappa, params.delta_c_prime);
      start.beta = std::complex<double>(0.0, params.g * std::norm(start.alpha)) / std::complex<double>(0.5 * params.gamma, 1.0);
      trace = integrate_covariance_tracking(params, V0, start, span);
    } else {
      trace = integrate_covariance(params, V0, span);
    }

    for (const auto& V : trace.covariances) {
      res.max_asymmetry = std::max(res.max_asymmetry, asymmetry(V));
      if (V.allFinite()) res.min_physicality = std::min(res.min_physicality, physicality_margin(V));
    }

    res.diverged = trace.diverged;
    if (trace.diverged) {
      res.divergence_time = trace.divergence_time;
      if (options.keep_trace) res.trace = std::move(trace);
      return res;
    }

    const double nu = params.nu;
    const int window = settings.average_periods;
    const ObservableSeries ns = phonon_series(trace, false);
    const ObservableSeries ns_raw = phonon_series(trace, true);
    const Averaged n = settle_and_average(ns, trace.dense_begin, nu, window, sample_mean(ns));
    const Averaged n_raw = settle_and_average(ns_raw, trace.dense_begin, nu, window, sample_mean(ns_raw));
    res.phonon_cutoff = n.cutoff;
    res.phonon_avg = n.value;
    res.phonon_avg_raw = n_raw.value;

    // E_N is clipped at zero, so its average integrates the interpolated state.
    const ObservableSeries es = entanglement_series(trace);
    const WindowMean plain = sample_mean(es);
    const Averaged en = settle_and_average(es, trace.dense_begin, nu, window, [&](std::size_t first, std::size_t last) {
      if (last < first + 5) return plain(first, last);
      return log_negativity_mean(trace.times, trace.covariances, first, last);
    });
    res.entanglement_cutoff = en.cutoff;
    res.entanglement_avg = en.value;
    res.settled = n.settled && en.settled;

    if (options.keep_trace) res.trace = std::move(trace);
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  return res;
}

bool SweepResult::partial_failure() const {
  for (const auto& row : rows)
    if (!row.result.error.empty()) return true;
  return false;
}

SweepResult sweep(const RunConfig& config, const SweepSpec& spec, int parallel) {
  SweepResult out;
  out.spec = spec;
  const std::vector<double> values = spec.values();
  {
    // Fail fast on names that can never apply.
    RunConfig probe = config;
    apply_parameter(probe, spec.parameter, values.front());
  }
  out.rows.resize(values.size());
  parallel_for(values.size(), parallel, [&](std::size_t i) {
    SweepRow& row = out.rows[i];
    row.value = values[i];
    try {
      RunConfig local = config;
      apply_parameter(local, spec.parameter, values[i]);
      row.result = simulate_point(resolve(local), local.simulation, {.keep_trace = false, .with_floquet = true});
    } catch (const std::exception& e) {
      row.result.error = e.what();
    }
  });
  return out;
}

std::vector<RwaComparison> rwa_compare(const RunConfig& config, int parallel) {
  const auto& nus = config.task.nu_list;
  std::vector<RwaComparison> out(nus.size());
  const auto gap = [](double full, double reference) {
    const double scale = std::max(std::abs(reference), std::abs(full));
    return scale > 0.0 ? std::abs(full - reference) / std::max(std::abs(reference), 1e-12) : 0.0;
  };
  parallel_for(nus.size(), parallel, [&](std::size_t i) {
    RwaComparison& cmp = out[i];
    cmp.nu = nus[i];
    try {
      RunConfig local = config;
      apply_parameter(local, "nu", nus[i]);
      const ReducedParams r = resolve(local);
      const RwaModel rwa = rwa_reduce(r);
      cmp.k0 = rwa.k0;
      cmp.validity = rwa.validity;
      cmp.full = simulate_point(r, local.simulation, {.keep_trace = false, .with_floquet = true});
      const CovarianceMatrix V =
          lyapunov_steady(build_drift(rwa.params, 0.0), build_diffusion(rwa.params));
      cmp.phonon_rwa = phonon_number(V);
      cmp.entanglement_rwa = log_negativity(V);
      cmp.phonon_gap = gap(cmp.full.phonon_avg, cmp.phonon_rwa);
      cmp.entanglement_gap = gap(cmp.full.entanglement_avg, cmp.entanglement_rwa);
      if (!cmp.full.error.empty()) cmp.error = cmp.full.error;
    } catch (const std::exception& e) {
      cmp.error = e.what();
    }
  });
  return out;
}

StabilityMap config_stability_map(const RunConfig& config, const SweepSpec& rows, const SweepSpec& cols,
                                  int parallel) {
  if (rows.parameter == cols.parameter) throw ConfigError("sweep", "stability map needs two distinct parameters");
  {
    RunConfig probe = config;
    apply_parameter(probe, rows.parameter, rows.start);
    apply_parameter(probe, cols.parameter, cols.start);
  }
  const PointBuilder build = [&config, &rows, &cols](double a, double b) {
    RunConfig local = config;
    apply_parameter(local, rows.parameter, a);
    apply_parameter(local, cols.parameter, b);
    return resolve(local);
  };
  MapOptions options;
  options.step = config.simulation.step;
  options.parallel = parallel;
  return stability_map({rows.parameter, rows.values()}, {cols.parameter, cols.values()}, build, options);
}

namespace {

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

json cutoff_json(const Cutoff& c) { return {{"t_ss", c.t_ss}, {"settled", c.settled}}; }

json point_json(const PointResult& p) {
  json j;
  j["diverged"] = p.diverged;
  if (p.diverged) j["divergence_time"] = p.divergence_time;
  j["settled"] = p.settled;
  j["phonon_cutoff"] = cutoff_json(p.phonon_cutoff);
  j["entanglement_cutoff"] = cutoff_json(p.entanglement_cutoff);
  j["phonon_avg"] = p.phonon_avg;
  j["phonon_avg_raw"] = p.phonon_avg_raw;
  j["entanglement_avg"] = p.entanglement_avg;
  j["min_physicality"] = p.min_physicality;
  j["max_asymmetry"] = p.max_asymmetry;
  if (p.floquet) j["floquet"] = {{"verdict", std::string(to_string(p.floquet->verdict))}, {"margin", p.floquet->margin}};
  if (!p.error.empty()) j["error"] = p.error;
  return j;
}

json base_metadata(const RunConfig& config, const std::string& command) {
  json meta;
  meta["tool"] = "fmopto";
  meta["version"] = version();
  meta["command"] = command;
  meta["created"] = timestamp();
  meta["config"] = to_json(config);
  meta["averaging_window_periods"] = config.simulation.average_periods;
  meta["probe_horizon_lifetimes"] = config.simulation.probe_horizon_lifetimes;
  return meta;
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

void stamp(CsvWriter& w, const RunConfig& config, const std::string& command, const json& extra = {}) {
  w.comment("fmopto " + version() + " " + command);
  w.comment("config: " + to_json(config).dump());
  if (!extra.is_null()) w.comment("resolved: " + extra.dump());
}

json step_json(const SimulationTrace& trace) {
  return {{"method", trace.method}, {"dt", trace.dt}, {"steps_per_period", trace.steps_per_period}, {"steps", trace.steps}};
}

}  // namespace

int run_simulate(const RunConfig& config, const fs::path& out) {
  fs::create_directories(out);
  const ReducedParams r = resolve(config);
  const PointResult p = simulate_point(r, config.simulation, {.keep_trace = true, .with_floquet = true});
  if (!p.error.empty()) throw Error(p.error);
  const json resolved = to_json(r);
  const std::string cmd = "simulate";

  {
    CsvWriter w(out / "trace.csv");
    stamp(w, config, cmd, resolved);
    w.header({"t", "V11", "V12", "V13", "V14", "V22", "V23", "V24", "V33", "V34", "V44"});
    for (std::size_t i = 0; i < p.trace.times.size(); ++i) {
      const auto& V = p.trace.covariances[i];
      w.cell(p.trace.times[i]);
      for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) w.cell(V(a, b));
      w.end_row();
    }
  }
  {
    CsvWriter w(out / "phonon.csv");
    stamp(w, config, cmd, resolved);
    w.header({"t", "n", "n_raw"});
    for (std::size_t i = 0; i < p.trace.times.size(); ++i) {
      const auto& V = p.trace.covariances[i];
      w.cell(p.trace.times[i]).cell(phonon_number(V)).cell(phonon_number_raw(V));
      w.end_row();
    }
  }
  {
    CsvWriter w(out / "entanglement.csv");
    stamp(w, config, cmd, resolved);
    w.header({"t", "E_N", "eta_minus"});
    for (std::size_t i = 0; i < p.trace.times.size(); ++i) {
      const auto& V = p.trace.covariances[i];
      double eta = kNaN;
      double en = kNaN;
      try {
        eta = eta_minus(V);
        en = log_negativity(V);
      } catch (const UnphysicalError&) {
      }
      w.cell(p.trace.times[i]).cell(en).cell(eta);
      w.end_row();
    }
  }

  json meta = base_metadata(config, cmd);
  meta["reduced"] = resolved;
  meta["step"] = step_json(p.trace);
  meta["result"] = point_json(p);
  write_json(out / "metadata.json", meta);
  return p.unstable() ? kExitDivergence : kExitOk;
}

int run_sweep(const RunConfig& config, const SweepSpec& spec, const fs::path& out, int parallel) {
  fs::create_directories(out);
  const SweepResult result = sweep(config, spec, parallel);
  {
    CsvWriter w(out / "summary.csv");
    stamp(w, config, "sweep " + spec.to_string());
    w.header({"index", spec.parameter, "phonon_avg", "phonon_avg_raw", "entanglement_avg", "settled", "diverged",
              "unstable", "floquet_verdict", "floquet_margin", "t_ss", "error"});
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
      const auto& row = result.rows[i];
      const auto& p = row.result;
      w.cell(static_cast<long>(i)).cell(row.value).cell(p.phonon_avg).cell(p.phonon_avg_raw).cell(p.entanglement_avg);
      w.cell(p.settled).cell(p.diverged).cell(p.unstable());
      w.cell(p.floquet ? std::string(to_string(p.floquet->verdict)) : std::string("none"));
      w.cell(p.floquet ? p.floquet->margin : kNaN);
      w.cell(p.phonon_cutoff.t_ss).cell(p.error);
      w.end_row();
    }
  }
  json meta = base_metadata(config, "sweep");
  meta["sweep"] = spec.to_string();
  meta["points"] = json::array();
  for (const auto& row : result.rows) {
    json j = point_json(row.result);
    j["value"] = row.value;
    j["reduced"] = to_json(row.result.params);
    meta["points"].push_back(j);
  }
  write_json(out / "metadata.json", meta);
  return result.partial_failure() ? kExitPartial : kExitOk;
}

int run_stability_map(const RunConfig& config, const SweepSpec& rows, const SweepSpec& cols, const fs::path& out,
                      int parallel) {
  fs::create_directories(out);
  const StabilityMap map = config_stability_map(config, rows, cols, parallel);
  bool failures = false;
  {
    CsvWriter w(out / "map.csv");
    stamp(w, config, "stability-map " + rows.to_string() + " " + cols.to_string());
    w.header({rows.parameter, cols.parameter, "verdict", "margin", "method", "coupling", "error"});
    for (const auto& pt : map.points) {
      failures = failures || !pt.error.empty();
      w.cell(pt.row_value).cell(pt.col_value).cell(std::string(to_string(pt.verdict.verdict)));
      w.cell(pt.verdict.margin).cell(std::string(to_string(pt.verdict.method))).cell(pt.coupling).cell(pt.error);
      w.end_row();
    }
  }
  {
    CsvWriter w(out / "boundary.csv");
    stamp(w, config, "stability-map boundary");
    w.header({rows.parameter, cols.parameter});
    for (const auto& b : map.boundary) {
      w.cell(b.row_value).cell(b.col_value);
      w.end_row();
    }
  }
  json meta = base_metadata(config, "stability-map");
  meta["rows"] = rows.to_string();
  meta["cols"] = cols.to_string();
  meta["boundary_points"] = map.boundary.size();
  write_json(out / "metadata.json", meta);
  return failures ? kExitPartial : kExitOk;
}

int run_rwa_compare(const RunConfig& config, const fs::path& out, int parallel) {
  fs::create_directories(out);
  const auto rows = rwa_compare(config, parallel);
  bool failures = false;
  {
    CsvWriter w(out / "compare.csv");
    stamp(w, config, "rwa-compare");
    w.header({"nu", "phonon_full", "phonon_rwa", "phonon_gap", "entanglement_full", "entanglement_rwa",
              "entanglement_gap", "settled", "diverged", "k0", "nu_over_max_coupling", "error"});
    for (const auto& c : rows) {
      failures = failures || !c.error.empty();
      w.cell(c.nu).cell(c.full.phonon_avg).cell(c.phonon_rwa).cell(c.phonon_gap);
      w.cell(c.full.entanglement_avg).cell(c.entanglement_rwa).cell(c.entanglement_gap);
      w.cell(c.full.settled).cell(c.full.diverged).cell(static_cast<long>(c.k0));
      w.cell(c.validity.nu_over_max_coupling).cell(c.error);
      w.end_row();
    }
  }
  {
    CsvWriter w(out / "sidebands.csv");
    stamp(w, config, "rwa-compare sidebands");
    w.header({"nu", "k", "weight", "bs_detuning", "tms_detuning"});
    for (const double nu : config.task.nu_list) {
      RunConfig local = config;
      apply_parameter(local, "nu", nu);
      const SidebandTable table = sideband_table(resolve(local));
      for (const auto& e : table.entries) {
        w.cell(nu).cell(e.k).cell(e.weight).cell(e.bs_detuning).cell(e.tms_detuning);
        w.end_row();
      }
    }
  }
  json meta = base_metadata(config, "rwa-compare");
  meta["comparisons"] = json::array();
  for (const auto& c : rows) {
    json j = point_json(c.full);
    j["nu"] = c.nu;
    j["phonon_rwa"] = c.phonon_rwa;
    j["entanglement_rwa"] = c.entanglement_rwa;
    j["k0"] = c.k0;
    meta["comparisons"].push_back(j);
  }
  write_json(out / "metadata.json", meta);
  return failures ? kExitPartial : kExitOk;
}

}  // namespace fmopto::harness
