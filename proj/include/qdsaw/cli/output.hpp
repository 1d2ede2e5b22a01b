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
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qdsaw/errors.hpp"
#include "qdsaw/solver.hpp"
#include "qdsaw/spectroscopy.hpp"
#include "qdsaw/units.hpp"

namespace qdsaw::cli {

using json = nlohmann::json;

#ifdef QDSAW_VERSION
inline constexpr const char* kToolVersion = QDSAW_VERSION;
#else
inline constexpr const char* kToolVersion = "0.0.0";
#endif

/// Fixed, locale-independent rendering with 10 significant digits.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

/// FNV-1a, 64 bit.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Column-major numeric table rendered as CSV with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  void add(std::string name, std::vector<double> values) {
    if (!columns.empty() && values.size() != columns.front().size())
      throw ShapeError("CsvTable: column '" + name + "' has a different length");
    header.push_back(std::move(name));
    columns.push_back(std::move(values));
  }

  std::string render() const {
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
    out += "\n";
    const std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < columns.size(); ++c) {
        if (c) out += ",";
        out += format_number(columns[c][r]);
      }
      out += "\n";
    }
    return out;
  }
};

inline std::vector<double> times_ns(const TimeGrid& g) {
  std::vector<double> t(g.n);
  for (std::size_t i = 0; i < g.n; ++i) t[i] = units::s_to_ns(g.time(i));
  return t;
}

inline std::vector<double> to_ghz(const std::vector<double>& w) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = units::rad_to_ghz(w[i]);
  return out;
}

/// time_ns, occupancy, sx, sy, sz.
inline CsvTable trajectory_table(const Trajectory& tr) {
  CsvTable t;
  std::vector<double> sx, sy, sz;
  for (const auto& b : tr.bloch) {
    sx.push_back(b.sx);
    sy.push_back(b.sy);
    sz.push_back(b.sz);
  }
  t.add("time_ns", times_ns(tr.grid));
  t.add("occupancy", tr.occupancy);
  t.add("sx", std::move(sx));
  t.add("sy", std::move(sy));
  t.add("sz", std::move(sz));
  return t;
}

/// detuning_GHz, intensity and, when present, coherent and incoherent.
inline CsvTable spectrum_table(const SpectrumData& s) {
  CsvTable t;
  t.add("detuning_GHz", to_ghz(s.detuning_axis));
  t.add("intensity", s.intensity);
  if (s.coherent) t.add("coherent", *s.coherent);
  if (s.incoherent) t.add("incoherent", *s.incoherent);
  return t;
}

/// One quantitative target with its measured value.
struct AcceptanceCheck {
  std::string name;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

inline AcceptanceCheck check_abs(std::string name, double value, double target, double tol, std::string detail = "") {
  return {std::move(name), value, target, tol, std::abs(value - target) <= tol, std::move(detail)};
}

inline AcceptanceCheck check_rel(std::string name, double value, double target, double rel, std::string detail = "") {
  return {std::move(name), value, target, rel, std::abs(value - target) <= rel * std::abs(target), std::move(detail)};
}

inline json to_json(const AcceptanceCheck& c) {
  return {{"name", c.name},         {"value", c.value},   {"target", c.target},
          {"tolerance", c.tolerance}, {"passed", c.passed}, {"detail", c.detail}};
}

struct OutputFile {
  std::string name;
  std::string content;
};

/// Everything a command produces, held in memory until written.
struct RunResult {
  std::vector<OutputFile> files;
  json summary = json::object();
  std::vector<AcceptanceCheck> checks;

  void add_csv(std::string name, const CsvTable& table) { files.push_back({std::move(name), table.render()}); }
  void add_json(std::string name, const json& j) { files.push_back({std::move(name), j.dump(2) + "\n"}); }
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Manifest: the only output that carries run-dependent values (wall time).
inline json manifest(const std::string& command, const std::string& config_text, double wall_time_s,
                     const RunResult& r) {
  json files = json::array();
  for (const auto& f : r.files)
    files.push_back({{"path", f.name}, {"bytes", f.content.size()}, {"fnv1a64", hex64(fnv1a64(f.content))}});
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(to_json(c));
  return {{"tool", "qdsaw"},
          {"tool_version", kToolVersion},
          {"command", command},
          {"config_hash", "fnv1a64:" + hex64(fnv1a64(config_text))},
          {"wall_time_s", wall_time_s},
          {"outputs", files},
          {"acceptance", checks},
          {"summary", r.summary}};
}

/// Writes every file of r plus manifest.json into dir. All writes go through
/// here so concurrent producers never touch the filesystem.
inline void write_outputs(const std::filesystem::path& dir, const RunResult& r, const json& manifest_json) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed: " + path.string());
  };
  for (const auto& f : r.files) write(f.name, f.content);
  write("manifest.json", manifest_json.dump(2) + "\n");
}

}  // namespace qdsaw::cli
