// Copyright 2026 The qdsaw Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qdsaw/calibration.hpp"
#include "qdsaw/cli/config.hpp"
#include "qdsaw/cli/output.hpp"
#include "qdsaw/experiments.hpp"
#include "qdsaw/io/table.hpp"
#include "qdsaw/parallel.hpp"
#include "qdsaw/spectroscopy.hpp"

namespace qdsaw::cli {

struct RunOptions {
  std::size_t workers = 1;
  std::uint64_t seed = 1;
};

namespace detail {

inline void require_kind(const RunConfig& c, std::initializer_list<const char*> kinds, const std::string& command) {
  for (const char* k : kinds)
    if (c.experiment.kind == k) return;
  std::string list;
  for (const char* k : kinds) list += (list.empty() ? "" : ", ") + std::string(k);
  throw ConfigError("field experiment.kind: '" + c.experiment.kind + "' is not valid for " + command + " (expected " +
                    list + ")");
}

inline std::vector<double> axis_from(const Reader& r, const std::string& key, const std::vector<double>& fallback) {
  if (!r.has(key)) return fallback;
  const auto a = r.object(key);
  const double from = a.number("from_ghz"), to = a.number("to_ghz"), step = a.number("step_ghz");
  a.finish();
  if (!(step > 0.0) || !(to > from)) throw ConfigError("field " + r.field(key) + ": need to_ghz > from_ghz and step_ghz > 0");
  const auto n = static_cast<std::size_t>(std::llround((to - from) / step));
  std::vector<double> out;
  for (std::size_t i = 0; i <= n; ++i) out.push_back(units::ghz_to_rad(from + static_cast<double>(i) * step));
  return out;
}

inline std::size_t count_option(const Reader& r, const std::string& key, long long fallback) {
  const auto v = r.integer(key, fallback);
  if (v < 1) throw ConfigError("field " + r.field(key) + ": must be >= 1");
  return static_cast<std::size_t>(v);
}

inline json trajectory_summary(const Trajectory& tr) {
  const auto it = std::max_element(tr.occupancy.begin(), tr.occupancy.end());
  const auto i = static_cast<std::size_t>(it - tr.occupancy.begin());
  return {{"peak_occupancy", *it},
          {"peak_time_ns", units::s_to_ns(tr.grid.time(i))},
          {"final_occupancy", tr.occupancy.back()},
          {"max_trace_error", *std::max_element(tr.trace_error.begin(), tr.trace_error.end())},
          {"min_eigenvalue", *std::min_element(tr.min_eigenvalue.begin(), tr.min_eigenvalue.end())}};
}

inline json fit_json(const CalibrationFit& f) {
  return {{"model", f.model},
          {"parameters", f.parameters},
          {"errors", f.errors},
          {"residual_norm", f.residual_norm},
          {"implied", f.implied}};
}

}  // namespace detail

/// Trajectory for the configured system and pulse, averaged over
/// experiment.n_phases mechanical phases.
inline Trajectory simulate_trajectory(const RunConfig& c, std::size_t workers) {
  const auto p = c.system.params();
  const auto cfg = c.solver.config();
  const auto n_phases = static_cast<std::size_t>(c.experiment.n_phases);
  if (c.pulse.shape == "cw") {
    const TimeGrid g = c.pulse.grid.grid();
    const TimeGrid out = TimeGrid::span(g.t0, g.end(), cfg.output_dt);
    return phase_averaged_trajectory(p, ConstantDrive{c.pulse.peak_rabi()}, cfg, out, n_phases, workers);
  }
  const auto env = c.pulse.envelope();
  return phase_averaged_trajectory(p, env, cfg, output_grid_for(env, cfg), n_phases, workers);
}

inline RunResult run_simulate(const RunConfig& c, const RunOptions& o) {
  detail::require_kind(c, {"trajectory"}, "simulate");
  options_reader(c).finish();
  const auto tr = simulate_trajectory(c, o.workers);
  RunResult r;
  r.add_csv("trajectory.csv", trajectory_table(tr));
  r.summary = detail::trajectory_summary(tr);
  return r;
}

/// Copy of c with the numeric field at a dotted path (e.g. system.g_ghz) set to v.
inline RunConfig with_field(const RunConfig& c, const std::string& path, double v) {
  json j = to_json(c);
  json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty() || !node->is_object() || !node->contains(key))
      throw ConfigError("sweep axis '" + path + "' does not resolve to a config field");
    node = &(*node)[key];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  if (!node->is_number()) throw ConfigError("sweep axis '" + path + "' is not a numeric field");
  if (node->is_number_integer()) {
    if (v != std::floor(v)) throw ConfigError("sweep axis '" + path + "' takes integer values");
    *node = static_cast<long long>(v);
  } else {
    *node = v;
  }
  return config_from_json(j);
}

/// One trajectory per axis value, a summary table and a time x value matrix.
/// options: axis (dotted path), values, optional reference_value for an
/// enhancement matrix relative to that value.
inline RunResult run_sweep(const RunConfig& c, const RunOptions& o) {
  detail::require_kind(c, {"sweep"}, "sweep");
  const auto opt = options_reader(c);
  const std::string axis = opt.text("axis");
  const auto values = number_list(opt, "values");
  const auto reference = opt.optional_number("reference_value");
  opt.finish();
  std::vector<RunConfig> configs;
  for (double v : values) {
    auto cv = with_field(c, axis, v);
    cv.experiment.kind = "trajectory";
    configs.push_back(std::move(cv));
  }
  const auto runs = parallel_map(configs.size(), o.workers, [&](std::size_t i) {
    return simulate_trajectory(configs[i], 1);
  });

  RunResult r;
  const std::string leaf = axis.substr(axis.rfind('.') + 1);
  CsvTable matrix, summary;
  matrix.add("time_ns", times_ns(runs.front().grid));
  std::vector<double> peak, peak_t, final_occ;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "trajectory_%03zu.csv", i);
    r.add_csv(name, trajectory_table(runs[i]));
    if (!(runs[i].grid == runs.front().grid)) throw ConfigError("sweep axis changes the time grid");
    matrix.add(leaf + "=" + format_number(values[i]), runs[i].occupancy);
    const auto s = detail::trajectory_summary(runs[i]);
    peak.push_back(s["peak_occupancy"].get<double>());
    peak_t.push_back(s["peak_time_ns"].get<double>());
    final_occ.push_back(s["final_occupancy"].get<double>());
  }
  summary.add(leaf, values);
  summary.add("peak_occupancy", peak);
  summary.add("peak_time_ns", peak_t);
  summary.add("final_occupancy", final_occ);
  r.add_csv("summary.csv", summary);
  r.add_csv("matrix.csv", matrix);
  if (reference) {
    const auto it = std::find(values.begin(), values.end(), *reference);
    if (it == values.end()) throw ConfigError("field experiment.options.reference_value: not among the sweep values");
    const auto& ref = runs[static_cast<std::size_t>(it - values.begin())];
    CsvTable enh;
    enh.add("time_ns", times_ns(ref.grid));
    json peaks = json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto e = enhancement(runs[i], ref);
      enh.add(leaf + "=" + format_number(values[i]), e.c);
      const auto pk = e.peak();
      peaks.push_back({{leaf, values[i]}, {"peak_enhancement", pk.value}, {"peak_time_ns", units::s_to_ns(pk.time)}});
    }
    r.add_csv("enhancement.csv", enh);
    r.summary["enhancement"] = peaks;
  }
  r.summary["axis"] = axis;
  r.summary["values"] = values;
  return r;
}

inline json lines_json(const SpectrumData& s) {
  json lines = json::array();
  for (const auto& l : s.lines)
    lines.push_back({{"order", l.order}, {"detuning_GHz", units::rad_to_ghz(l.detuning)}, {"power", l.power}});
  return lines;
}

/// kind cw: CW scattering spectrum at pulse.peak_rabi_ghz.
/// kind excitation: total scattered rate versus pump detuning.
/// kind pulsed: two-time correlation of the configured pulse, integrated
/// filtered spectrum and filtered time traces.
inline RunResult run_spectrum(const RunConfig& c, const RunOptions& o) {
  detail::require_kind(c, {"cw", "excitation", "pulsed"}, "spectrum");
  const auto p = c.system.params();
  const auto cfg = c.solver.config();
  const auto opt = options_reader(c);
  RunResult r;
  if (c.experiment.kind == "cw") {
    CwSpectrumOptions so;
    so.window = units::ns_to_s(opt.number("window_ns", units::s_to_ns(so.window)));
    so.tau_step = units::ns_to_s(opt.number("tau_step_ns", units::s_to_ns(so.tau_step)));
    so.n_period_samples = detail::count_option(opt, "n_period_samples", static_cast<long long>(so.n_period_samples));
    if (const auto a = opt.optional_number("apodization_ghz")) so.apodization = units::ghz_to_rad(*a);
    so.bin = units::ghz_to_rad(opt.number("bin_ghz", units::rad_to_ghz(so.bin)));
    so.max_order = static_cast<int>(opt.integer("max_order", so.max_order));
    so.detuning_axis = detail::axis_from(opt, "axis", {});
    so.solver = cfg;
    so.workers = o.workers;
    opt.finish();
    const auto s = cw_scattering_spectrum(p, c.pulse.peak_rabi(), so);
    r.add_csv("spectrum.csv", spectrum_table(s));
    r.summary["lines"] = lines_json(s);
    r.summary["clipped"] = s.clipped;
    return r;
  }
  if (c.experiment.kind == "excitation") {
    const auto axis = detail::axis_from(opt, "axis", {});
    if (axis.empty()) throw ConfigError("missing required field: experiment.options.axis");
    const auto n = detail::count_option(opt, "n_period_samples", 32);
    opt.finish();
    const auto s = excitation_spectrum(p, c.pulse.peak_rabi(), axis, n, cfg, o.workers);
    r.add_csv("spectrum.csv", spectrum_table(s));
    return r;
  }
  const auto env = c.pulse.envelope();
  TimeGrid grid = env.grid();
  if (opt.has("correlation_grid")) {
    const auto g = opt.object("correlation_grid");
    GridSpec gs{g.number("t0_ns"), g.number("t_end_ns"), g.number("dt_ns")};
    g.finish();
    grid = gs.grid();
  }
  const double bw = opt.number("filter_bandwidth_ghz") * 1e9;
  const auto axis = detail::axis_from(opt, "axis", {});
  if (axis.empty()) throw ConfigError("missing required field: experiment.options.axis");
  std::vector<FilterSpec> filters;
  if (opt.has("time_filters")) {
    const auto& list = opt.at("time_filters");
    if (!list.is_array()) throw ConfigError("field experiment.options.time_filters: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const detail::Reader f(list[i], "experiment.options.time_filters[" + std::to_string(i) + "]");
      filters.push_back({units::ghz_to_rad(f.number("center_ghz")), f.number("bandwidth_ghz") * 1e9});
      f.finish();
    }
  }
  const bool emission = opt.has("emission") && opt.at("emission").get<bool>();
  opt.finish();
  const auto corr =
      two_time_correlation(p, env, grid, cfg, static_cast<std::size_t>(c.experiment.n_phases), o.workers);
  const auto s = integrated_filtered_spectrum(corr, bw, axis, p.delta, p.gamma_qd);
  r.add_csv("spectrum.csv", spectrum_table(s));
  if (emission) r.add_csv("emission.csv", spectrum_table(emission_spectrum(corr, axis, p.delta, p.gamma_qd)));
  if (!filters.empty()) {
    CsvTable t;
    t.add("time_ns", times_ns(grid));
    json warnings = json::array();
    for (std::size_t i = 0; i < filters.size(); ++i) {
      const auto sig = filtered_time_signal(corr, filters[i], p.delta, p.gamma_qd);
      t.add("filter_" + std::to_string(i), sig.intensity);
      for (const auto& w : sig.warnings) warnings.push_back("filter_" + std::to_string(i) + ": " + w);
    }
    r.add_csv("filtered_time.csv", t);
    r.summary["warnings"] = warnings;
  }
  r.summary["clipped"] = s.clipped;
  return r;
}

namespace detail {

inline CalibrationPoints read_points_or_throw(const Reader& opt) {
  return read_calibration_points(opt.text("data"));
}

}  // namespace detail

/// kind modulation_index: data is a two-column (detuning_GHz, intensity)
/// spectrum; without data the spectrum is simulated at the configured system
/// and pulse.peak_rabi_ghz.
/// kind g_vs_power: data is (dBm, g_GHz[, sigma_GHz]); synthetic data with
/// relative Gaussian noise is drawn from --seed when options.synthetic is set.
/// kind occupancy_scale: data is (power_W, counts).
inline RunResult run_calibrate(const RunConfig& c, const RunOptions& o) {
  detail::require_kind(c, {"modulation_index", "g_vs_power", "occupancy_scale"}, "calibrate");
  const auto opt = options_reader(c);
  RunResult r;
  if (c.experiment.kind == "modulation_index") {
    const auto p = c.system.params();
    SpectrumData s;
    if (opt.has("data")) {
      const auto rows = io::read_table(opt.text("data"), 2, 2);
      for (const auto& row : rows) {
        s.detuning_axis.push_back(units::ghz_to_rad(row[0]));
        s.intensity.push_back(row[1]);
      }
    } else {
      CwSpectrumOptions so;
      so.solver = c.solver.config();
      so.workers = o.workers;
      s = cw_scattering_spectrum(p, c.pulse.peak_rabi(), so);
      r.add_csv("spectrum.csv", spectrum_table(s));
    }
    opt.finish();
    const auto fit = fit_modulation_index(s, p.omega_saw);
    auto j = detail::fit_json(fit);
    j["g_GHz"] = units::rad_to_ghz(fit["g"]);
    r.add_json("fit.json", j);
    r.summary = {{"chi", fit["chi"]}, {"g_GHz", units::rad_to_ghz(fit["g"])}};
    return r;
  }
  if (c.experiment.kind == "g_vs_power") {
    CalibrationPoints pts;
    if (opt.has("synthetic")) {
      const auto syn = opt.object("synthetic");
      const double a = syn.number("a_ghz_per_sqrt_w");
      const double noise = syn.number("relative_noise", 0.0);
      const double lo = syn.number("dbm_from"), hi = syn.number("dbm_to");
      const auto n = detail::count_option(syn, "n_points", 16);
      syn.finish();
      if (!(hi > lo) || n < 2) throw ConfigError("field experiment.options.synthetic: need dbm_to > dbm_from and n_points >= 2");
      std::mt19937_64 rng(o.seed);
      std::normal_distribution<double> gauss(0.0, 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double dbm = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
        pts.x.push_back(dbm);
        pts.y.push_back(a * std::sqrt(dbm_to_watts(dbm)) * (1.0 + noise * gauss(rng)));
      }
      CsvTable t;
      t.add("power_dBm", pts.x);
      t.add("g_GHz", pts.y);
      r.add_csv("data.csv", t);
    } else {
      pts = detail::read_points_or_throw(opt);
    }
    opt.finish();
    const auto fit = fit_g_vs_power(pts.x, pts.y, pts.sigma);
    r.add_json("fit.json", detail::fit_json(fit));
    r.summary = {{"a_ghz_per_sqrt_w", fit["a"]}, {"residual_norm", fit.residual_norm}};
    return r;
  }
  const auto p = c.system.params();
  const auto cal = PowerCalibration(units::ghz_to_rad(opt.number("rabi_ghz_per_sqrt_w")));
  PowerSweepOptions so{.readout_time = 140e-12, .bin = 16e-12};
  so.readout_time = units::ns_to_s(opt.number("readout_time_ns", units::s_to_ns(so.readout_time)));
  so.bin = units::ns_to_s(opt.number("bin_ns", units::s_to_ns(so.bin)));
  so.pulse_start = units::ns_to_s(c.pulse.start_ns);
  so.pulse_duration = units::ns_to_s(c.pulse.duration_ns);
  so.rise = units::ns_to_s(c.pulse.rise_ns);
  so.fall = units::ns_to_s(c.pulse.fall_ns);
  so.grid = c.pulse.grid.grid();
  const auto pts = detail::read_points_or_throw(opt);
  opt.finish();
  const auto fit = fit_occupancy_scale(pts.x, pts.y, p, cal, so, c.solver.config(), o.workers);
  r.add_json("fit.json", detail::fit_json(fit));
  r.summary = {{"eta", fit["eta"]}, {"residual_norm", fit.residual_norm}};
  return r;
}

/// Pulse durations that minimize bare occupancy or maximize enhancement at
/// readout, for the square pulse family of the configured start, edges and peak.
inline RunResult run_optimize(const RunConfig& c, const RunOptions& o) {
  detail::require_kind(c, {"pulse_duration"}, "optimize");
  if (c.pulse.shape != "square") throw ConfigError("field pulse.shape: optimize supports the square family only");
  const auto opt = options_reader(c);
  DurationObjective obj;
  const auto kind = opt.text("objective", "min_bare_occupancy");
  if (kind == "min_bare_occupancy") obj.kind = DurationObjective::Kind::min_bare_occupancy;
  else if (kind == "max_enhancement") obj.kind = DurationObjective::Kind::max_enhancement;
  else throw ConfigError("field experiment.options.objective: unknown objective '" + kind + "'");
  if (const auto t = opt.optional_number("readout_time_ns")) obj.readout_time = units::ns_to_s(*t);
  obj.n_phases = static_cast<std::size_t>(c.experiment.n_phases);
  obj.floor = opt.number("floor", obj.floor);
  const double lo = units::ns_to_s(opt.number("duration_min_ns"));
  const double hi = units::ns_to_s(opt.number("duration_max_ns"));
  opt.finish();
  const auto family = square_family(c.pulse.grid.grid(), units::ns_to_s(c.pulse.start_ns), units::ns_to_s(c.pulse.rise_ns),
                                    units::ns_to_s(c.pulse.fall_ns), c.pulse.peak_rabi());
  const auto best = optimize_pulse_duration(c.system.params(), family, obj, lo, hi, c.solver.config(), o.workers);
  RunResult r;
  CsvTable t;
  std::vector<double> d, v;
  for (const auto& b : best) {
    d.push_back(units::s_to_ns(b.duration));
    v.push_back(b.objective);
  }
  t.add("duration_ns", d);
  t.add("objective", v);
  r.add_csv("optima.csv", t);
  r.summary = {{"objective", kind}, {"n_optima", best.size()}};
  if (!best.empty()) r.summary["best"] = {{"duration_ns", d.front()}, {"objective", v.front()}};
  return r;
}

}  // namespace qdsaw::cli
