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

#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdsaw/errors.hpp"
#include "qdsaw/model.hpp"
#include "qdsaw/pulses.hpp"
#include "qdsaw/solver.hpp"
#include "qdsaw/units.hpp"

// Run configuration as stored on disk. Every frequency in the file is
// omega / 2pi in GHz and every time is in ns; conversion to rad/s and seconds
// happens only in the accessors, so parse(serialize(c)) == c exactly.
namespace qdsaw::cli {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

/// Typed access to one JSON object with path-qualified error messages.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + "expected an object");
  }

  double number(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw ConfigError("field " + field(key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError("field " + field(key) + ": must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }
  std::optional<double> optional_number(const std::string& key) const {
    return has(key) ? std::optional<double>(number(key)) : std::nullopt;
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    const auto& v = at(key);
    if (!v.is_number_integer()) throw ConfigError("field " + field(key) + ": expected an integer");
    return v.get<long long>();
  }

  std::string text(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw ConfigError("field " + field(key) + ": expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  Reader object(const std::string& key) const { return Reader(at(key), field(key)); }
  bool has(const std::string& key) const {
    seen_.insert(key);
    return node_.contains(key);
  }
  const json& at(const std::string& key) const {
    seen_.insert(key);
    if (!node_.contains(key)) throw ConfigError("missing required field: " + field(key));
    return node_.at(key);
  }
  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  /// Rejects keys that were never looked up (typos, stale fields).
  void finish() const {
    for (const auto& item : node_.items())
      if (!seen_.count(item.key())) throw ConfigError("unknown field: " + field(item.key()));
  }

 private:
  std::string where() const { return path_.empty() ? "" : "field " + path_ + ": "; }

  const json& node_;
  std::string path_;
  mutable std::set<std::string> seen_;
};

inline void put_optional(json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

}  // namespace detail

struct GridSpec {
  double t0_ns = 0.0;
  double t_end_ns = 3.0;
  double dt_ns = 0.001;

  TimeGrid grid() const {
    try {
      return TimeGrid::span(units::ns_to_s(t0_ns), units::ns_to_s(t_end_ns), units::ns_to_s(dt_ns));
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("grid: ") + e.what());
    }
  }
  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct SystemSpec {
  double delta_ghz = 0.0;
  double omega_saw_ghz = 0.0;
  double g_ghz = 0.0;
  double phi_rad = 0.0;
  double gamma_qd_ghz = 0.0;
  double gamma_z_ghz = 0.0;
  std::optional<double> g0_ghz;
  std::optional<double> n_phonons;

  SystemParams params() const {
    SystemParams p;
    p.delta = units::ghz_to_rad(delta_ghz);
    p.omega_saw = units::ghz_to_rad(omega_saw_ghz);
    p.phi = phi_rad;
    p.gamma_qd = units::ghz_to_rad(gamma_qd_ghz);
    p.gamma_z = units::ghz_to_rad(gamma_z_ghz);
    if (g0_ghz && n_phonons) {
      p = p.with_phonons(units::ghz_to_rad(*g0_ghz), *n_phonons);
    } else if (g0_ghz || n_phonons) {
      throw ConfigError("system: g0_ghz and n_phonons must be given together");
    } else {
      p.g = units::ghz_to_rad(g_ghz);
    }
    try {
      p.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("system: ") + e.what());
    }
    return p;
  }
  friend bool operator==(const SystemSpec&, const SystemSpec&) = default;
};

/// Optical pulse. shape is one of square, gradual (square through an etalon),
/// measured (two-column intensity file) or cw (constant drive at peak_rabi_ghz).
struct PulseSpec {
  std::string shape = "square";
  double peak_rabi_ghz = 0.0;
  double start_ns = 0.0;
  double duration_ns = 0.13;
  double rise_ns = 0.0;
  double fall_ns = 0.0;
  std::optional<double> filter_bandwidth_ghz;
  std::string path;
  GridSpec grid;

  double peak_rabi() const { return units::ghz_to_rad(peak_rabi_ghz); }

  PulseEnvelope envelope() const {
    const TimeGrid g = grid.grid();
    try {
      if (shape == "square" || shape == "gradual") {
        auto env = square_pulse(g, units::ns_to_s(start_ns), units::ns_to_s(duration_ns), units::ns_to_s(rise_ns),
                                units::ns_to_s(fall_ns), peak_rabi());
        if (shape == "square") return env;
        if (!filter_bandwidth_ghz) throw ConfigError("missing required field: pulse.filter_bandwidth_ghz");
        return etalon_filtered_pulse(env, *filter_bandwidth_ghz * 1e9);
      }
      if (shape == "measured") {
        if (path.empty()) throw ConfigError("missing required field: pulse.path");
        return load_envelope(read_envelope_file(path), g, peak_rabi());
      }
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("pulse: ") + e.what());
    }
    throw ConfigError("pulse.shape '" + shape + "' has no envelope");
  }
  friend bool operator==(const PulseSpec&, const PulseSpec&) = default;
};

struct SolverSpec {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step_ns = 0.001;
  double output_dt_ns = 0.001;

  SolverConfig config() const {
    SolverConfig c;
    c.rel_tol = rel_tol;
    c.abs_tol = abs_tol;
    c.max_step = units::ns_to_s(max_step_ns);
    c.output_dt = units::ns_to_s(output_dt_ns);
    try {
      c.validate();
    } catch (const ParameterError& e) {
      throw ConfigError(std::string("solver: ") + e.what());
    }
    return c;
  }
  friend bool operator==(const SolverSpec&, const SolverSpec&) = default;
};

/// Experiment selector plus kind-specific options, kept as a JSON object and
/// read by the command that owns the kind.
struct ExperimentSpec {
  std::string kind = "trajectory";
  long long n_phases = 1;
  json options = json::object();

  friend bool operator==(const ExperimentSpec& a, const ExperimentSpec& b) {
    return a.kind == b.kind && a.n_phases == b.n_phases && a.options == b.options;
  }
};

struct OutputSpec {
  std::string directory = "out";
  std::string format = "csv";
  friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  SystemSpec system;
  PulseSpec pulse;
  SolverSpec solver;
  ExperimentSpec experiment;
  OutputSpec output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

inline json to_json(const RunConfig& c) {
  json j;
  j["schema_version"] = c.schema_version;
  auto& s = j["system"];
  s["delta_ghz"] = c.system.delta_ghz;
  s["omega_saw_ghz"] = c.system.omega_saw_ghz;
  s["g_ghz"] = c.system.g_ghz;
  s["phi_rad"] = c.system.phi_rad;
  s["gamma_qd_ghz"] = c.system.gamma_qd_ghz;
  s["gamma_z_ghz"] = c.system.gamma_z_ghz;
  detail::put_optional(s, "g0_ghz", c.system.g0_ghz);
  detail::put_optional(s, "n_phonons", c.system.n_phonons);
  auto& p = j["pulse"];
  p["shape"] = c.pulse.shape;
  p["peak_rabi_ghz"] = c.pulse.peak_rabi_ghz;
  p["start_ns"] = c.pulse.start_ns;
  p["duration_ns"] = c.pulse.duration_ns;
  p["rise_ns"] = c.pulse.rise_ns;
  p["fall_ns"] = c.pulse.fall_ns;
  detail::put_optional(p, "filter_bandwidth_ghz", c.pulse.filter_bandwidth_ghz);
  if (!c.pulse.path.empty()) p["path"] = c.pulse.path;
  p["grid"] = {{"t0_ns", c.pulse.grid.t0_ns}, {"t_end_ns", c.pulse.grid.t_end_ns}, {"dt_ns", c.pulse.grid.dt_ns}};
  j["solver"] = {{"rel_tol", c.solver.rel_tol},
                 {"abs_tol", c.solver.abs_tol},
                 {"max_step_ns", c.solver.max_step_ns},
                 {"output_dt_ns", c.solver.output_dt_ns}};
  j["experiment"] = {{"kind", c.experiment.kind}, {"n_phases", c.experiment.n_phases},
                     {"options", c.experiment.options}};
  j["output"] = {{"directory", c.output.directory}, {"format", c.output.format}};
  return j;
}

inline RunConfig config_from_json(const json& j) {
  const detail::Reader root(j, "");
  RunConfig c;
  if (!root.has("schema_version")) throw ConfigError("missing required field: schema_version");
  const auto version = root.integer("schema_version", -1);
  if (version != kSchemaVersion)
    throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(kSchemaVersion) + ")");
  c.schema_version = static_cast<int>(version);

  const auto s = root.object("system");
  c.system.delta_ghz = s.number("delta_ghz", 0.0);
  c.system.omega_saw_ghz = s.number("omega_saw_ghz");
  c.system.g_ghz = s.number("g_ghz", 0.0);
  c.system.phi_rad = s.number("phi_rad", 0.0);
  c.system.gamma_qd_ghz = s.number("gamma_qd_ghz");
  c.system.gamma_z_ghz = s.number("gamma_z_ghz", 0.0);
  c.system.g0_ghz = s.optional_number("g0_ghz");
  c.system.n_phonons = s.optional_number("n_phonons");
  s.finish();

  const auto p = root.object("pulse");
  c.pulse.shape = p.text("shape");
  static const std::set<std::string> shapes = {"square", "gradual", "measured", "cw"};
  if (!shapes.count(c.pulse.shape)) throw ConfigError("field pulse.shape: unknown shape '" + c.pulse.shape + "'");
  c.pulse.peak_rabi_ghz = p.number("peak_rabi_ghz");
  c.pulse.start_ns = p.number("start_ns", c.pulse.start_ns);
  c.pulse.duration_ns = p.number("duration_ns", c.pulse.duration_ns);
  c.pulse.rise_ns = p.number("rise_ns", c.pulse.rise_ns);
  c.pulse.fall_ns = p.number("fall_ns", c.pulse.fall_ns);
  c.pulse.filter_bandwidth_ghz = p.optional_number("filter_bandwidth_ghz");
  c.pulse.path = p.text("path", "");
  if (p.has("grid")) {
    const auto g = p.object("grid");
    c.pulse.grid.t0_ns = g.number("t0_ns", c.pulse.grid.t0_ns);
    c.pulse.grid.t_end_ns = g.number("t_end_ns", c.pulse.grid.t_end_ns);
    c.pulse.grid.dt_ns = g.number("dt_ns", c.pulse.grid.dt_ns);
    g.finish();
  }
  p.finish();

  if (root.has("solver")) {
    const auto v = root.object("solver");
    c.solver.rel_tol = v.number("rel_tol", c.solver.rel_tol);
    c.solver.abs_tol = v.number("abs_tol", c.solver.abs_tol);
    c.solver.max_step_ns = v.number("max_step_ns", c.solver.max_step_ns);
    c.solver.output_dt_ns = v.number("output_dt_ns", c.solver.output_dt_ns);
    v.finish();
  }

  if (root.has("experiment")) {
    const auto e = root.object("experiment");
    c.experiment.kind = e.text("kind", c.experiment.kind);
    c.experiment.n_phases = e.integer("n_phases", c.experiment.n_phases);
    if (c.experiment.n_phases < 1) throw ConfigError("field experiment.n_phases: must be >= 1");
    if (e.has("options")) {
      c.experiment.options = e.at("options");
      if (!c.experiment.options.is_object()) throw ConfigError("field experiment.options: expected an object");
    }
    e.finish();
  }

  if (root.has("output")) {
    const auto o = root.object("output");
    c.output.directory = o.text("directory", c.output.directory);
    c.output.format = o.text("format", c.output.format);
    if (c.output.format != "csv") throw ConfigError("field output.format: only 'csv' is supported");
    o.finish();
  }
  root.finish();
  return c;
}

inline RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Canonical text: sorted keys, two-space indent, shortest round-trip numbers.
inline std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

/// Typed view of experiment.options.
inline detail::Reader options_reader(const RunConfig& c) {
  return detail::Reader(c.experiment.options, "experiment.options");
}

/// Reads a numeric array option.
inline std::vector<double> number_list(const detail::Reader& r, const std::string& key) {
  const auto& v = r.at(key);
  if (!v.is_array() || v.empty()) throw ConfigError("field " + r.field(key) + ": expected a non-empty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError("field " + r.field(key) + ": expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace qdsaw::cli
