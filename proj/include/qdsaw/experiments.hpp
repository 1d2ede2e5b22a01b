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
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdsaw/errors.hpp"
#include "qdsaw/model.hpp"
#include "qdsaw/numerics.hpp"
#include "qdsaw/parallel.hpp"
#include "qdsaw/pulses.hpp"
#include "qdsaw/solver.hpp"
#include "qdsaw/units.hpp"

namespace qdsaw {

/// Mean over uniformly spaced mechanical phases phi_k = 2 pi k / n_phases.
/// Summation runs in k order so the result does not depend on scheduling.
template <DriveEnvelope Drive>
Trajectory phase_averaged_trajectory(const SystemParams& p, const Drive& drive, const SolverConfig& cfg,
                                     const TimeGrid& out_grid, std::size_t n_phases, std::size_t workers = 1,
                                     const DensityState& init = DensityState::ground()) {
  if (n_phases < 1) throw ParameterError("phase_averaged_trajectory: n_phases must be >= 1");
  if (p.g == 0.0) {
    SystemParams q = p;
    q.phi = 0.0;
    return propagate(q, drive, cfg, init, out_grid);
  }
  auto runs = parallel_map(n_phases, workers, [&](std::size_t k) {
    SystemParams q = p;
    q.phi = units::kTwoPi * static_cast<double>(k) / static_cast<double>(n_phases);
    return propagate(q, drive, cfg, init, out_grid);
  });
  if (n_phases == 1) return std::move(runs.front());
  Trajectory avg = runs.front();
  avg.params.phi = 0.0;
  const double w = 1.0 / static_cast<double>(n_phases);
  for (std::size_t i = 0; i < avg.size(); ++i) {
    double occ = 0.0, te = 0.0;
    BlochVector b;
    Mat2 s;
    for (const auto& r : runs) {
      occ += r.occupancy[i];
      b.sx += r.bloch[i].sx;
      b.sy += r.bloch[i].sy;
      b.sz += r.bloch[i].sz;
      te = std::max(te, r.trace_error[i]);
      s += r.states[i];
    }
    avg.occupancy[i] = occ * w;
    avg.bloch[i] = {b.sx * w, b.sy * w, b.sz * w};
    avg.trace_error[i] = te;
    avg.states[i] = w * s;
    avg.min_eigenvalue[i] = min_eigenvalue_hermitian(avg.states[i]);
  }
  return avg;
}

inline Trajectory phase_averaged_trajectory(const SystemParams& p, const PulseEnvelope& env, std::size_t n_phases,
                                            const SolverConfig& cfg = {}, std::size_t workers = 1) {
  return phase_averaged_trajectory(p, env, cfg, output_grid_for(env, cfg), n_phases, workers);
}

/// c(t) = s_g(t) / s_0(t) - 1, defined where s_0 >= floor.
struct EnhancementSeries {
  TimeGrid grid;
  std::vector<double> c;  // NaN where masked
  std::vector<bool> valid_mask;
  double floor = 1e-4;

  struct Peak {
    double value = std::numeric_limits<double>::quiet_NaN();
    double time = std::numeric_limits<double>::quiet_NaN();
    std::size_t index = 0;
  };

  /// Largest valid value, optionally restricted to [t_min, t_max].
  Peak peak(double t_min = -std::numeric_limits<double>::infinity(),
            double t_max = std::numeric_limits<double>::infinity()) const {
    Peak best;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const double t = grid.time(i);
      if (!valid_mask[i] || t < t_min || t > t_max) continue;
      if (std::isnan(best.value) || c[i] > best.value) best = {c[i], t, i};
    }
    return best;
  }
};

inline constexpr double kDefaultEnhancementFloor = 1e-4;

inline EnhancementSeries enhancement(const std::vector<double>& s_g, const std::vector<double>& s_0,
                                     const TimeGrid& grid, double floor = kDefaultEnhancementFloor) {
  if (s_g.size() != s_0.size() || s_g.size() != grid.n) throw ShapeError("enhancement: series length mismatch");
  if (!(floor > 0.0)) throw ParameterError("enhancement: floor must be > 0");
  EnhancementSeries out{grid, std::vector<double>(grid.n), std::vector<bool>(grid.n), floor};
  for (std::size_t i = 0; i < grid.n; ++i) {
    const bool ok = s_0[i] >= floor;
    out.valid_mask[i] = ok;
    out.c[i] = ok ? s_g[i] / s_0[i] - 1.0 : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

inline EnhancementSeries enhancement(const Trajectory& traj_g, const Trajectory& traj_0,
                                     double floor = kDefaultEnhancementFloor) {
  if (!(traj_g.grid == traj_0.grid)) throw ShapeError("enhancement: trajectories on different grids");
  return enhancement(traj_g.occupancy, traj_0.occupancy, traj_g.grid, floor);
}

struct LadderTrajectories {
  Trajectory direct;
  Trajectory sideband;
  LadderModels models;
};

/// The two reduced two-level computations of the ladder picture, both from |g>:
/// the zero-phonon transition at (Omega_0(t), delta) and the phonon-assisted
/// transition at (Gamma(t), 0) with Gamma(t) = g0 sqrt(n) Omega_0(t) / omega_saw.
/// The mechanical modulation itself is not part of either computation.
inline LadderTrajectories ladder_occupancies(const SystemParams& p, const PulseEnvelope& env,
                                             const SolverConfig& cfg = {}) {
  const double peak = env.meta().peak_rabi;
  LadderTrajectories out;
  out.models = ladder_models(p, peak);
  const double ratio = *p.g0 * std::sqrt(*p.n_phonons) / p.omega_saw;

  SystemParams direct = p;
  direct.g = 0.0;
  direct.g0.reset();
  direct.n_phonons.reset();
  direct.delta = out.models.direct.detuning;
  SystemParams side = direct;
  side.delta = out.models.sideband.detuning;

  out.direct = propagate(direct, env, cfg);
  out.sideband = propagate(side, env.rescaled(peak * ratio), cfg);
  return out;
}

struct SidebandOracleResult {
  double gamma_eff = 0.0;         // rad/s, effective sideband Rabi coupling
  double slow_frequency = 0.0;    // rad/s, fitted envelope oscillation frequency
  double amplitude = 0.0;         // fitted sin^2 amplitude
  double offset = 0.0;            // fitted constant background
  double residual_rms = 0.0;      // rms fit residual
  double gamma_printed = 0.0;     // g rabi0 / omega_saw
  double gamma_bessel = 0.0;      // rabi0 J1(g / omega_saw)
};

/// Extracts the phonon-assisted Rabi coupling from the full modulated model.
/// The phase-averaged occupancy under a constant drive at delta = -omega_saw is
/// smoothed over one generalized Rabi period and fitted to
/// offset + A sin^2(W t / 2); a residual detuning d of the sideband transition
/// gives A = G^2 / W^2 with W = sqrt(G^2 + d^2), so G = W sqrt(A).
inline SidebandOracleResult sideband_rabi_oracle(const SystemParams& p, double rabi0, std::size_t n_phases = 8,
                                                 std::size_t workers = 1) {
  p.validate();
  if (!(rabi0 > 0.0)) throw ParameterError("sideband_rabi_oracle: rabi0 must be > 0");
  if (p.g / p.omega_saw >= 0.5) throw ParameterError("sideband_rabi_oracle: g / omega_saw must be < 0.5");
  if (std::abs(p.delta + p.omega_saw) > 1e-9 * p.omega_saw)
    throw ParameterError("sideband_rabi_oracle: requires delta = -omega_saw");
  if (p.gamma_qd != 0.0 || p.gamma_z != 0.0) throw ParameterError("sideband_rabi_oracle: requires no damping");

  SidebandOracleResult res;
  res.gamma_printed = p.g * rabi0 / p.omega_saw;
  res.gamma_bessel = rabi0 * std::cyl_bessel_j(1.0, p.g / p.omega_saw);
  if (p.g == 0.0) return res;

  // Window sized from the printed rate; the measured one lies within a factor ~2.
  const double window = 2.5 * units::kTwoPi / res.gamma_printed;
  // Sample so that one generalized Rabi period spans exactly 65 points; the
  // running mean then cancels the fast oscillation.
  const double fast_period = units::kTwoPi / generalized_rabi(rabi0, p.delta);
  const std::size_t width = 65;
  SolverConfig cfg;
  cfg.output_dt = fast_period / static_cast<double>(width - 1);
  cfg.max_step = 5e-12;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-11;
  const TimeGrid grid = TimeGrid::span(0.0, window, cfg.output_dt);
  const auto tr = phase_averaged_trajectory(p, ConstantDrive{rabi0}, cfg, grid, n_phases, workers);
  // Trapezoid-weighted mean over exactly one period.
  std::vector<double> smooth(grid.n, 0.0);
  const std::size_t half = width / 2;
  for (std::size_t i = half; i + half < grid.n; ++i) {
    double acc = 0.5 * (tr.occupancy[i - half] + tr.occupancy[i + half]);
    for (std::size_t k = i - half + 1; k < i + half; ++k) acc += tr.occupancy[k];
    smooth[i] = acc / static_cast<double>(width - 1);
  }

  // Drop the half-window edges where the running mean is biased.
  const std::size_t lo = width, hi = grid.n - width;
  // Variable projection: for fixed W the model is linear in (offset, A).
  auto fit_at = [&](double w, double& offset, double& amp) {
    double s1 = 0, sb = 0, sbb = 0, sy = 0, sby = 0, syy = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double s = std::sin(0.5 * w * grid.time(i));
      const double b = s * s;
      const double y = smooth[i];
      s1 += 1;
      sb += b;
      sbb += b * b;
      sy += y;
      sby += b * y;
      syy += y * y;
    }
    const double den = s1 * sbb - sb * sb;
    amp = (s1 * sby - sb * sy) / den;
    offset = (sy - amp * sb) / s1;
    // residual sum of squares
    return syy - offset * sy - amp * sby;
  };
  double best_w = 0.0, best_r = std::numeric_limits<double>::infinity();
  // The AC Stark shift of the sideband transition raises W above G.
  const double stark = generalized_rabi(rabi0, p.delta) - std::abs(p.delta);
  const double w_lo = 0.2 * res.gamma_bessel, w_hi = 3.0 * (res.gamma_printed + stark);
  const int scan = 2000;
  for (int k = 0; k <= scan; ++k) {
    const double w = w_lo + (w_hi - w_lo) * k / scan;
    double o, a;
    const double r = fit_at(w, o, a);
    if (a > 0.0 && r < best_r) {
      best_r = r;
      best_w = w;
    }
  }
  const double step = (w_hi - w_lo) / scan;
  const auto [w_opt, r_opt] = numerics::golden_section_min(
      [&](double w) {
        double o, a;
        return fit_at(w, o, a);
      },
      std::max(w_lo, best_w - step), best_w + step, 1e-9 * best_w);
  double offset = 0.0, amp = 0.0;
  fit_at(w_opt, offset, amp);
  res.slow_frequency = w_opt;
  res.amplitude = amp;
  res.offset = offset;
  res.residual_rms = std::sqrt(std::max(r_opt, 0.0) / static_cast<double>(hi - lo));
  if (!(amp > 0.0) || res.residual_rms > 0.05 * amp)
    throw AnalysisError("sideband_rabi_oracle: sin^2 fit residual exceeds 5% of amplitude");
  res.gamma_eff = w_opt * std::sqrt(std::min(amp, 1.0));
  return res;
}

/// Pulse shapes parameterized by their duration.
struct PulseFamily {
  std::function<PulseEnvelope(double)> make;
  /// Time at which the pulse has ended for a given duration.
  std::function<double(double)> end_time;
};

inline PulseFamily square_family(const TimeGrid& grid, double start, double rise, double fall, double peak) {
  return {[=](double d) { return square_pulse(grid, start, d, rise, fall, peak); },
          [=](double d) { return start + 0.5 * rise + d + 0.5 * fall; }};
}

struct DurationObjective {
  enum class Kind { min_bare_occupancy, max_enhancement };
  Kind kind = Kind::min_bare_occupancy;
  /// Readout time; defaults to the end of each pulse.
  std::optional<double> readout_time;
  std::size_t n_phases = 1;
  double floor = kDefaultEnhancementFloor;
};

struct DurationOptimum {
  double duration = 0.0;
  double objective = 0.0;
};

namespace detail {

inline double occupancy_at(const SystemParams& p, const PulseEnvelope& env, const SolverConfig& cfg,
                           std::size_t n_phases, double t) {
  const double t_stop = std::min(env.grid().end(), env.grid().t0 + cfg.output_dt * std::ceil((t - env.grid().t0) / cfg.output_dt + 1.0));
  const TimeGrid g = TimeGrid::span(env.grid().t0, std::max(t_stop, env.grid().t0 + 2 * cfg.output_dt), cfg.output_dt);
  const auto tr = phase_averaged_trajectory(p, env, cfg, g, n_phases);
  return numerics::interpolate(tr.occupancy, g.t0, g.dt, t);
}

}  // namespace detail

/// Scans durations in [lo, hi] at 5 ps resolution, refines every interior
/// local optimum by golden-section search to 0.5 ps and returns them best first.
inline std::vector<DurationOptimum> optimize_pulse_duration(const SystemParams& p, const PulseFamily& family,
                                                            const DurationObjective& objective, double lo,
                                                            double hi, const SolverConfig& cfg = {},
                                                            std::size_t workers = 1) {
  if (!(hi > lo) || !(lo > 0.0)) throw ParameterError("optimize_pulse_duration: empty or invalid search range");
  const double scan_step = 5e-12, tol = 0.5e-12;
  SystemParams bare = p;
  bare.g = 0.0;
  bare.g0.reset();
  bare.n_phonons.reset();
  const bool maximize = objective.kind == DurationObjective::Kind::max_enhancement;

  // Internally always minimized.
  auto cost = [&](double d) {
    const PulseEnvelope env = family.make(d);
    const double t = objective.readout_time.value_or(family.end_time(d));
    const double s0 = detail::occupancy_at(bare, env, cfg, 1, t);
    if (!maximize) return s0;
    const double sg = detail::occupancy_at(p, env, cfg, objective.n_phases, t);
    if (s0 < objective.floor) return std::numeric_limits<double>::infinity();
    return -(sg / s0 - 1.0);
  };

  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / scan_step + 1e-9)) + 1;
  std::vector<double> durations(n);
  for (std::size_t i = 0; i < n; ++i) durations[i] = lo + scan_step * static_cast<double>(i);
  const std::vector<double> values = parallel_map(n, workers, [&](std::size_t i) { return cost(durations[i]); });

  std::vector<std::size_t> minima;
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (std::isfinite(values[i]) && values[i] <= values[i - 1] && values[i] < values[i + 1]) minima.push_back(i);

  auto refined = parallel_map(minima.size(), workers, [&](std::size_t k) {
    const std::size_t i = minima[k];
    const auto [d, v] = numerics::golden_section_min(cost, durations[i - 1], durations[i + 1], tol);
    return DurationOptimum{d, maximize ? -v : v};
  });
  std::sort(refined.begin(), refined.end(), [&](const DurationOptimum& a, const DurationOptimum& b) {
    return maximize ? a.objective > b.objective : a.objective < b.objective;
  });
  return refined;
}

/// Parameter scan: one scalar summary (or more) per axis value.
struct SweepResult {
  std::string axis;
  std::vector<double> values;
  std::map<std::string, std::vector<double>> summaries;
  std::vector<Trajectory> trajectories;
  std::string provenance;

  void validate() const {
    for (std::size_t i = 1; i < values.size(); ++i)
      if (!(values[i] > values[i - 1])) throw ParameterError("SweepResult: axis values must be strictly increasing");
  }
};

struct PowerSweepOptions {
  double readout_time = 140e-12;
  double bin = 0.0;  // readout bin width; 0 reads a single instant
  double pulse_start = 0.0;
  double pulse_duration = 130e-12;
  double rise = 0.0;
  double fall = 0.0;
  TimeGrid grid = TimeGrid::span(0.0, 0.5e-9, 1e-12);
};

/// Occupancy read out after a square pulse versus average optical power.
inline SweepResult rabi_power_sweep(const SystemParams& p, const std::vector<double>& powers,
                                    const PowerCalibration& cal, const PowerSweepOptions& opt = {},
                                    const SolverConfig& cfg = {}, std::size_t workers = 1) {
  const double pulse_end = opt.pulse_start + 0.5 * opt.rise + opt.pulse_duration + 0.5 * opt.fall;
  if (opt.readout_time < pulse_end - 1e-15) throw ParameterError("rabi_power_sweep: readout inside the pulse window");
  if (opt.readout_time + opt.bin > opt.grid.end()) throw ParameterError("rabi_power_sweep: readout outside grid");
  SweepResult res;
  res.axis = "power_W";
  res.values = powers;
  res.validate();
  res.summaries["occupancy"] = parallel_map(powers.size(), workers, [&](std::size_t i) {
    const double rabi = power_to_rabi(powers[i], cal);
    const auto env = square_pulse(opt.grid, opt.pulse_start, opt.pulse_duration, opt.rise, opt.fall, rabi);
    const auto tr = propagate(p, env, cfg, DensityState::ground(), opt.grid);
    if (opt.bin <= 0.0) return numerics::interpolate(tr.occupancy, tr.grid.t0, tr.grid.dt, opt.readout_time);
    // bin average by trapezoid on the output grid
    const int m = std::max(2, static_cast<int>(std::llround(opt.bin / tr.grid.dt)));
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) {
      const double t = opt.readout_time + opt.bin * k / m;
      const double w = (k == 0 || k == m) ? 0.5 : 1.0;
      acc += w * numerics::interpolate(tr.occupancy, tr.grid.t0, tr.grid.dt, t);
    }
    return acc / m;
  });
  return res;
}

/// Index ranges of local extrema (interior) of a series.
inline std::vector<std::size_t> local_minima(const std::vector<double>& y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] <= y[i - 1] && y[i] < y[i + 1]) out.push_back(i);
  return out;
}

inline std::vector<std::size_t> local_maxima(const std::vector<double>& y) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i)
    if (y[i] >= y[i - 1] && y[i] > y[i + 1]) out.push_back(i);
  return out;
}

/// Sub-sample position of an extremum at index i by parabolic interpolation.
inline double refine_extremum(const std::vector<double>& y, const TimeGrid& grid, std::size_t i) {
  if (i == 0 || i + 1 >= y.size()) return grid.time(i);
  const double a = y[i - 1], b = y[i], c = y[i + 1];
  const double den = a - 2.0 * b + c;
  const double shift = den == 0.0 ? 0.0 : 0.5 * (a - c) / den;
  return grid.time(i) + shift * grid.dt;
}

}  // namespace qdsaw
