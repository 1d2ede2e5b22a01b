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

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "qdsaw/cli/commands.hpp"
#include "qdsaw/cli/config.hpp"
#include "qdsaw/cli/output.hpp"
#include "qdsaw/cli/recipes.hpp"

namespace {

using namespace qdsaw;
using namespace qdsaw::cli;

enum ExitCode : int { kOk = 0, kIoError = 1, kConfigError = 2, kFormatError = 3, kNumericalError = 4 };

struct Flags {
  std::string config;
  std::string out;
  std::size_t workers = 0;
  bool dry_run = false;
  std::uint64_t seed = 1;
  std::string figure;
};

void print_checks(const RunResult& r) {
  for (const auto& c : r.checks)
    std::printf("%s  %s: %s (target %s, tolerance %s)%s%s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                format_number(c.value).c_str(), format_number(c.target).c_str(), format_number(c.tolerance).c_str(),
                c.detail.empty() ? "" : "  ", c.detail.c_str());
}

int finish(const std::string& command, const std::string& config_text, const std::string& out_dir,
           const RunResult& r, double wall) {
  write_outputs(out_dir, r, manifest(command, config_text, wall, r));
  for (const auto& f : r.files) std::printf("wrote %s\n", (std::filesystem::path(out_dir) / f.name).string().c_str());
  std::printf("wrote %s\n", (std::filesystem::path(out_dir) / "manifest.json").string().c_str());
  print_checks(r);
  return kOk;
}

int run_config_command(const std::string& command, const Flags& f) {
  if (f.config.empty()) throw ConfigError("--config is required for " + command);
  const RunConfig cfg = load_config(f.config);
  const std::string text = serialize_config(cfg);
  if (f.dry_run) {
    // Resolve everything that can fail before any numerical work.
    cfg.system.params();
    cfg.solver.config();
    if (cfg.pulse.shape != "cw") cfg.pulse.envelope();
    std::cout << text;
    return kOk;
  }
  const RunOptions opt{f.workers == 0 ? default_workers() : f.workers, f.seed};
  const auto start = std::chrono::steady_clock::now();
  RunResult r;
  if (command == "simulate") r = run_simulate(cfg, opt);
  else if (command == "sweep") r = run_sweep(cfg, opt);
  else if (command == "spectrum") r = run_spectrum(cfg, opt);
  else if (command == "calibrate") r = run_calibrate(cfg, opt);
  else r = run_optimize(cfg, opt);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return finish(command, text, f.out.empty() ? cfg.output.directory : f.out, r, wall);
}

int run_reproduce(const Flags& f) {
  const auto ids = recipe_ids();
  if (std::find(ids.begin(), ids.end(), f.figure) == ids.end()) reproduce(f.figure, 1);  // throws with the id list
  const std::string descriptor = json{{"recipe", f.figure}, {"tool_version", kToolVersion}}.dump() + "\n";
  if (f.dry_run) {
    std::cout << descriptor;
    return kOk;
  }
  const auto start = std::chrono::steady_clock::now();
  const RunResult r = reproduce(f.figure, f.workers == 0 ? default_workers() : f.workers);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return finish("reproduce " + f.figure, descriptor, f.out.empty() ? "out/" + f.figure : f.out, r, wall);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Driven quantum-dot / surface-acoustic-wave simulator"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", f.config, "run configuration (JSON, schema_version 1)");
    if (needs_config) c->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--workers", f.workers, "worker threads (0 = logical cores)");
    sub->add_flag("--dry-run", f.dry_run, "validate and print the resolved configuration, write nothing");
    sub->add_option("--seed", f.seed, "seed for synthetic noisy fixtures");
  };
  for (const char* name : {"simulate", "sweep", "spectrum", "calibrate", "optimize"}) {
    auto* sub = app.add_subcommand(name, std::string(name) + " from a configuration file");
    common(sub, true);
  }
  auto* rep = app.add_subcommand("reproduce", "regenerate the data behind one figure");
  common(rep, false);
  std::string ids;
  for (const auto& id : recipe_ids()) ids += (ids.empty() ? "" : ", ") + id;
  rep->add_option("figure", f.figure, "figure id: " + ids)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (command == "reproduce") return run_reproduce(f);
    return run_config_command(command, f);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const ParameterError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "data format error: %s\n", e.what());
    return kFormatError;
  } catch (const ShapeError& e) {
    std::fprintf(stderr, "data format error: %s\n", e.what());
    return kFormatError;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumericalError;
  } catch (const AnalysisError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumericalError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIoError;
  }
}
