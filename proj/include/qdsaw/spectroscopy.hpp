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
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qdsaw/errors.hpp"
#include "qdsaw/linalg.hpp"
#include "qdsaw/model.hpp"
#include "qdsaw/numerics.hpp"
#include "qdsaw/parallel.hpp"
#include "qdsaw/pulses.hpp"
#include "qdsaw/solver.hpp"
#include "qdsaw/units.hpp"

// Frequency axes below are detunings x = omega - omega_QD (rad/s), so the QD
// line sits at x = 0 and the pump at x = p.delta. The solver works in the
// frame rotating at the pump, where a field component at x oscillates as
// exp(-i (x - delta) t).

namespace qdsaw {

/// Single-pole Lorentzian spectral filter.
struct FilterSpec {
  double center_detuning = 0.0;  // rad/s, on the x axis
  double bandwidth_fwhm = 1e9;   // Hz

  void validate() const {
    if (!(bandwidth_fwhm > 0.0) || !std::isfinite(bandwidth_fwhm))
      throw ParameterError("FilterSpec: bandwidth_fwhm must be > 0");
    if (!std::isfinite(center_detuning)) throw ParameterError("FilterSpec: center_detuning must be finite");
  }
};

struct CoherentLine {
  int order = 0;          // k in x = delta - k omega_saw
  double detuning = 0.0;  // rad/s
  double power = 0.0;     // photon rate, gamma |c_k|^2
};

struct SpectrumData {
  std::vector<double> detuning_axis;  // rad/s
  std::vector<double> intensity;
  std::optional<std::vector<double>> coherent;
  std::optional<std::vector<double>> incoherent;
  std::vector<CoherentLine> lines;
  std::size_t clipped = 0;      // negative samples set to zero
  double most_negative = 0.0;   // before clipping
};

namespace detail {
inline void clip_negative(std::vector<double>& v, SpectrumData& out) {
  for (auto& x : v) {
    if (x < 0.0) {
      out.most_negative = std::min(out.most_negative, x);
      ++out.clipped;
      x = 0.0;
    }
  }
}
}  // namespace detail

/// G(t_i, t_j) = <sigma+(t_j) sigma-(t_i)>, stored for j >= i; the lower
/// triangle follows from G(t_j, t_i) = conj G(t_i, t_j).
class CorrelationGrid {
 public:
  CorrelationGrid() = default;
  explicit CorrelationGrid(TimeGrid grid) : grid_(grid), data_(grid.n * (grid.n + 1) / 2) {}

  const TimeGrid& grid() const { return grid_; }
  std::size_t size() const { return grid_.n; }

  cplx operator()(std::size_t i, std::size_t j) const {
    return j >= i ? data_[offset(i) + (j - i)] : std::conj(data_[offset(j) + (i - j)]);
  }
  cplx& upper(std::size_t i, std::size_t j) { return data_[offset(i) + (j - i)]; }

  /// <sigma+(t_a) sigma-(t_b)>, the ordering that enters emission spectra.
  cplx forward(std::size_t a, std::size_t b) const { return (*this)(b, a); }

  std::vector<double> diagonal() const {
    std::vector<double> d(grid_.n);
    for (std::size_t i = 0; i < grid_.n; ++i) d[i] = (*this)(i, i).real();
    return d;
  }

 private:
  // Row i starts after rows 0..i-1 of lengths n, n-1, ...
  std::size_t offset(std::size_t i) const { return i * grid_.n - i * (i - 1) / 2; }

  TimeGrid grid_;
  std::vector<cplx> data_;
};

/// Two-time correlation over `grid` via the quantum regression theorem:
/// Lambda = sigma- rho(t_i) is evolved with the full Liouvillian and
/// Tr[sigma+ Lambda(t_j)] recorded. With n_phases > 1 and g > 0 the grid is
/// averaged over uniformly spaced mechanical phases.
template <DriveEnvelope Drive>
CorrelationGrid two_time_correlation(const SystemParams& p, const Drive& drive, const TimeGrid& grid,
                                     const SolverConfig& cfg = {}, std::size_t n_phases = 1,
                                     std::size_t workers = 1, double t_init = 0.0,
                                     const DensityState& init = DensityState::ground()) {
  if (n_phases < 1) throw ParameterError("two_time_correlation: n_phases must be >= 1");
  if (grid.t0 < t_init) throw ParameterError("two_time_correlation: grid starts before the initial time");
  const std::size_t phases = p.g == 0.0 ? 1 : n_phases;
  const std::size_t n = grid.n;
  CorrelationGrid out(grid);
  for (std::size_t k = 0; k < phases; ++k) {
    SystemParams q = p;
    q.phi = p.g == 0.0 ? p.phi : units::kTwoPi * static_cast<double>(k) / static_cast<double>(phases);
    const LindbladPropagator<Drive> prop(q, drive, cfg);
    std::vector<Mat2> rho(n);
    Mat2 x = init.matrix();
    double h = cfg.max_step;
    if (grid.t0 > t_init) prop.advance(x, t_init, grid.t0, h);
    rho[0] = x;
    for (std::size_t i = 1; i < n; ++i) {
      prop.advance(x, grid.time(i - 1), grid.time(i), h);
      rho[i] = x;
    }
    const Mat2 sm = pauli::sm(), sp = pauli::sp();
    auto rows = parallel_map(n, workers, [&](std::size_t i) {
      std::vector<cplx> row(n - i);
      Mat2 lam = sm * rho[i];
      row[0] = trace_product(sp, lam);
      double hh = cfg.max_step;
      for (std::size_t j = i + 1; j < n; ++j) {
        prop.advance(lam, grid.time(j - 1), grid.time(j), hh);
        row[j - i] = trace_product(sp, lam);
      }
      return row;
    });
    const double w = 1.0 / static_cast<double>(phases);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) out.upper(i, j) += w * rows[i][j - i];
  }
  for (std::size_t i = 0; i < n; ++i) out.upper(i, i) = out.upper(i, i).real();
  return out;
}

inline CorrelationGrid two_time_correlation(const SystemParams& p, const PulseEnvelope& env, const TimeGrid& grid,
                                            const SolverConfig& cfg = {}, std::size_t n_phases = 1,
                                            std::size_t workers = 1) {
  const double eps = 1e-9 * env.grid().dt;
  if (grid.t0 < env.grid().t0 - eps || grid.end() > env.grid().end() + eps)
    throw ParameterError("two_time_correlation: grid outside the envelope window");
  return two_time_correlation(p, env, grid, cfg, n_phases, workers, env.grid().t0);
}

struct FilteredSignal {
  TimeGrid grid;
  std::vector<double> intensity;  // photon rate through the filter
  std::vector<std::string> warnings;
};

namespace detail {
// Filtered field E(t) = int h(t - s) sigma-(s) ds with
// h(s) = theta(s) k exp(-(k + i nu) s), k = pi df, nu = x_f - delta.
inline cplx filter_kappa(const FilterSpec& f, double pump_detuning) {
  return {std::numbers::pi * f.bandwidth_fwhm, f.center_detuning - pump_detuning};
}

inline void check_band(const FilterSpec& f, double pump_detuning, double dt, std::vector<std::string>& warnings) {
  const double nyquist = std::numbers::pi / dt;
  if (std::abs(f.center_detuning - pump_detuning) > 0.5 * nyquist)
    warnings.push_back("filter center lies outside the well-resolved band of the time grid");
}
}  // namespace detail

/// Photon rate behind the filter, gamma_qd <E^dag(t) E(t)>, with the double
/// time integral done by trapezoid weights and an O(N^2) recursion.
inline FilteredSignal filtered_time_signal(const CorrelationGrid& corr, const FilterSpec& filter,
                                           double pump_detuning, double gamma_qd) {
  filter.validate();
  const TimeGrid& g = corr.grid();
  const std::size_t n = g.n;
  FilteredSignal out{g, std::vector<double>(n, 0.0), {}};
  detail::check_band(filter, pump_detuning, g.dt, out.warnings);
  const cplx kappa = detail::filter_kappa(filter, pump_detuning);
  const double k = kappa.real();
  const double damp = std::exp(-2.0 * k * g.dt);
  // step[m] = exp(-conj(kappa) m dt)
  std::vector<cplx> step(n);
  for (std::size_t m = 0; m < n; ++m) step[m] = std::exp(-std::conj(kappa) * (static_cast<double>(m) * g.dt));
  const double scale = gamma_qd * k * k * g.dt * g.dt;
  double u_prev = 0.25 * corr(0, 0).real();
  for (std::size_t i = 1; i < n; ++i) {
    cplx r = 0.0;
    for (std::size_t a = 0; a < i; ++a) r += (a == 0 ? 0.5 : 1.0) * step[i - a] * corr.forward(a, i);
    const double p = damp * u_prev;
    const double diag = corr(i, i).real();
    out.intensity[i] = scale * (p + r.real() + 0.25 * diag);
    u_prev = p + 2.0 * r.real() + diag;
  }
  for (auto& v : out.intensity) v = std::max(v, 0.0);
  return out;
}

namespace detail {
// D[m] = sum_a w_a w_{a+m} <sigma+(t_a) sigma-(t_{a+m})>, trapezoid weights.
inline std::vector<cplx> lag_sums(const CorrelationGrid& corr) {
  const std::size_t n = corr.size();
  std::vector<cplx> d(n, 0.0);
  auto w = [n](std::size_t i) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; };
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a; b < n; ++b) d[b - a] += w(a) * w(b) * corr.forward(a, b);
  return d;
}
}  // namespace detail

/// Photons collected behind a filter of the given bandwidth as its center is
/// stepped along `detuning_axis`; the filter ring-down after the last grid
/// time is included in closed form.
inline SpectrumData integrated_filtered_spectrum(const CorrelationGrid& corr, double bandwidth_fwhm,
                                                 const std::vector<double>& detuning_axis, double pump_detuning,
                                                 double gamma_qd) {
  FilterSpec{0.0, bandwidth_fwhm}.validate();
  const auto d = detail::lag_sums(corr);
  const double dt = corr.grid().dt;
  const double k = std::numbers::pi * bandwidth_fwhm;
  SpectrumData out;
  out.detuning_axis = detuning_axis;
  out.intensity.resize(detuning_axis.size());
  for (std::size_t i = 0; i < detuning_axis.size(); ++i) {
    const cplx kappa(k, detuning_axis[i] - pump_detuning);
    const cplx e1 = std::exp(-std::conj(kappa) * dt);
    cplx acc = 0.0, ph = 1.0;
    for (std::size_t m = 1; m < d.size(); ++m) {
      ph *= e1;
      acc += d[m] * ph;
    }
    out.intensity[i] = gamma_qd * 0.5 * k * dt * dt * (d[0].real() + 2.0 * acc.real());
  }
  detail::clip_negative(out.intensity, out);
  return out;
}

/// Unfiltered emission spectrum (photon rate per unit angular frequency),
/// normalized so that its integral over x equals gamma_qd times the
/// time-integrated occupancy.
inline SpectrumData emission_spectrum(const CorrelationGrid& corr, const std::vector<double>& detuning_axis,
                                      double pump_detuning, double gamma_qd) {
  const auto d = detail::lag_sums(corr);
  const double dt = corr.grid().dt;
  SpectrumData out;
  out.detuning_axis = detuning_axis;
  out.intensity.resize(detuning_axis.size());
  for (std::size_t i = 0; i < detuning_axis.size(); ++i) {
    const cplx e1 = std::exp(cplx(0.0, (detuning_axis[i] - pump_detuning) * dt));
    cplx acc = 0.0, ph = 1.0;
    for (std::size_t m = 1; m < d.size(); ++m) {
      ph *= e1;
      acc += d[m] * ph;
    }
    out.intensity[i] = gamma_qd / (2.0 * std::numbers::pi) * dt * dt * (d[0].real() + 2.0 * acc.real());
  }
  detail::clip_negative(out.intensity, out);
  return out;
}

/// Periodic steady state under constant drive, sampled over one SAW period.
struct PeriodicSteadyState {
  double period = 0.0;
  std::vector<double> times;  // one period, n samples, endpoint excluded
  std::vector<Mat2> states;
  double drift = 0.0;  // |rho_ee(t + T) - rho_ee(t)| after propagation
  double mean_occupancy = 0.0;
};

/// Fixed point of the one-period propagator (built from the images of the
/// four basis operators), checked by propagating it once more.
inline PeriodicSteadyState periodic_steady_state(const SystemParams& p, double rabi0, std::size_t n_samples,
                                                 const SolverConfig& cfg = {}) {
  p.validate();
  if (!(rabi0 >= 0.0)) throw ParameterError("periodic_steady_state: rabi0 must be >= 0");
  if (n_samples < 1) throw ParameterError("periodic_steady_state: n_samples must be >= 1");
  if (p.gamma_qd == 0.0 && p.gamma_z == 0.0)
    throw NumericalError("periodic_steady_state: no unique steady state without damping");
  const ConstantDrive drive{rabi0};
  const LindbladPropagator<ConstantDrive> prop(p, drive, cfg);
  const double period = units::kTwoPi / p.omega_saw;

  std::array<Mat2, 4> images;
  for (std::size_t j = 0; j < 4; ++j) {
    std::array<cplx, 4> e{};
    e[j] = 1.0;
    Mat2 x = unvec(e);
    double h = cfg.max_step;
    prop.advance(x, 0.0, period, h);
    images[j] = x;
  }
  Mat4 a = Mat4::from_columns(images);
  for (std::size_t i = 0; i < 4; ++i) a(i, i) -= 1.0;
  // Replace the first equation by the trace condition.
  for (std::size_t j = 0; j < 4; ++j) a(0, j) = 0.0;
  a(0, 0) = 1.0;
  a(0, 3) = 1.0;
  const auto v = solve(a, {1.0, 0.0, 0.0, 0.0});
  Mat2 rho = unvec(v);
  rho = 0.5 * (rho + rho.adjoint());

  PeriodicSteadyState out;
  out.period = period;
  const double rho0_ee = rho(1, 1).real();
  Mat2 x = rho;
  double h = cfg.max_step;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = period * static_cast<double>(k) / static_cast<double>(n_samples);
    if (k > 0) prop.advance(x, out.times.back(), t, h);
    out.times.push_back(t);
    out.states.push_back(x);
    out.mean_occupancy += x(1, 1).real() / static_cast<double>(n_samples);
  }
  prop.advance(x, out.times.back(), period, h);
  out.drift = std::abs(x(1, 1).real() - rho0_ee);
  if (out.drift > 1e-4) throw NumericalError("periodic_steady_state: occupancy drift exceeds 1e-4 per period", period);
  return out;
}

struct CwSpectrumOptions {
  double window = 20e-9;           // tau range, s
  double tau_step = 10e-12;        // s
  std::size_t n_period_samples = 32;
  std::optional<double> apodization;  // rad/s, default gamma_qd / 2
  double bin = units::kTwoPi * 50e6;  // rad/s
  int max_order = 4;  // coherent lines |k| <= max_order, limited to (n_period_samples - 1) / 2
  std::vector<double> detuning_axis;  // optional explicit axis
  SolverConfig solver;
  std::size_t workers = 1;
};

/// Spectrum of light scattered under CW drive. The coherent part follows from
/// the Fourier coefficients of <sigma->(t) over one period and is drawn as
/// Lorentzians of half-width equal to the apodization rate; the incoherent
/// part is the Fourier transform of the period-averaged fluctuation
/// correlation <delta sigma+(t) delta sigma-(t + tau)>.
inline SpectrumData cw_scattering_spectrum(const SystemParams& p, double rabi0, const CwSpectrumOptions& opt = {}) {
  if (!(opt.window > 0.0) || !(opt.tau_step > 0.0) || !(opt.bin > 0.0))
    throw ParameterError("cw_scattering_spectrum: window, tau_step and bin must be > 0");
  const auto ss = periodic_steady_state(p, rabi0, opt.n_period_samples, opt.solver);
  const std::size_t n = ss.states.size();
  const double omega = p.omega_saw;

  SpectrumData out;
  if (!opt.detuning_axis.empty()) {
    out.detuning_axis = opt.detuning_axis;
  } else {
    const double half = (opt.max_order + 0.5) * omega;
    const auto m = static_cast<long>(std::ceil(half / opt.bin));
    for (long i = -m; i <= m; ++i) out.detuning_axis.push_back(p.delta + static_cast<double>(i) * opt.bin);
  }
  const std::size_t nx = out.detuning_axis.size();

  // Coherent amplitudes c_k of <sigma->(t) = sum_k c_k exp(i k omega t);
  // orders beyond the sampling limit would alias and are dropped.
  const int max_order = std::min(opt.max_order, static_cast<int>((n - 1) / 2));
  for (int k = -max_order; k <= max_order; ++k) {
    cplx c = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      c += ss.states[j](1, 0) * std::exp(cplx(0.0, -k * omega * ss.times[j]));
    c /= static_cast<double>(n);
    out.lines.push_back({k, p.delta - k * omega, p.gamma_qd * std::norm(c)});
  }

  // Fluctuation correlation averaged over the period.
  const auto ntau = static_cast<std::size_t>(std::llround(opt.window / opt.tau_step)) + 1;
  const ConstantDrive drive{rabi0};
  const LindbladPropagator<ConstantDrive> prop(p, drive, opt.solver);
  auto rows = parallel_map(n, opt.workers, [&](std::size_t j) {
    const Mat2& rho = ss.states[j];
    const cplx sp_mean = trace_product(pauli::sp(), rho);
    Mat2 y = rho * pauli::sp() - sp_mean * rho;
    std::vector<cplx> row(ntau);
    row[0] = trace_product(pauli::sm(), y);
    double h = opt.solver.max_step;
    const double t0 = ss.times[j];
    for (std::size_t m = 1; m < ntau; ++m) {
      prop.advance(y, t0 + (m - 1) * opt.tau_step, t0 + m * opt.tau_step, h);
      row[m] = trace_product(pauli::sm(), y);
    }
    return row;
  });
  std::vector<cplx> g(ntau, 0.0);
  for (const auto& row : rows)
    for (std::size_t m = 0; m < ntau; ++m) g[m] += row[m] / static_cast<double>(n);

  std::vector<double> coh(nx, 0.0), inc(nx, 0.0);
  const double a = opt.apodization.value_or(p.gamma_qd > 0.0 ? 0.5 * p.gamma_qd : opt.bin);
  for (std::size_t i = 0; i < nx; ++i) {
    const double x = out.detuning_axis[i];
    const cplx e1 = std::exp(cplx(0.0, (x - p.delta) * opt.tau_step));
    cplx acc = 0.5 * g[0], ph = 1.0;
    for (std::size_t m = 1; m < ntau; ++m) {
      ph *= e1;
      acc += (m + 1 == ntau ? 0.5 : 1.0) * g[m] * ph;
    }
    inc[i] = p.gamma_qd / std::numbers::pi * opt.tau_step * acc.real();
    for (const auto& line : out.lines) {
      const double dx = x - line.detuning;
      coh[i] += line.power / std::numbers::pi * a / (a * a + dx * dx);
    }
  }
  out.intensity.resize(nx);
  for (std::size_t i = 0; i < nx; ++i) out.intensity[i] = coh[i] + inc[i];
  detail::clip_negative(out.intensity, out);
  detail::clip_negative(inc, out);
  out.coherent = std::move(coh);
  out.incoherent = std::move(inc);
  return out;
}

/// Total scattered photon rate versus CW pump detuning:
/// gamma_qd times the period-averaged steady-state occupancy.
inline SpectrumData excitation_spectrum(const SystemParams& p, double rabi0, const std::vector<double>& delta_axis,
                                        std::size_t n_period_samples = 32, const SolverConfig& cfg = {},
                                        std::size_t workers = 1) {
  for (double d : delta_axis)
    if (!std::isfinite(d)) throw ParameterError("excitation_spectrum: detuning axis must be finite");
  SpectrumData out;
  out.detuning_axis = delta_axis;
  out.intensity = parallel_map(delta_axis.size(), workers, [&](std::size_t i) {
    if (rabi0 == 0.0) return 0.0;
    SystemParams q = p;
    q.delta = delta_axis[i];
    return p.gamma_qd * periodic_steady_state(q, rabi0, p.g == 0.0 ? 1 : n_period_samples, cfg).mean_occupancy;
  });
  detail::clip_negative(out.intensity, out);
  return out;
}

/// Post-pulse exponential decay rate of a positive series by a log-linear fit
/// over [t_from, t_to].
inline double fitted_decay_rate(const std::vector<double>& y, const TimeGrid& grid, double t_from, double t_to) {
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = grid.time(i);
    if (t < t_from || t > t_to || !(y[i] > 0.0)) continue;
    xs.push_back(t);
    ls.push_back(std::log(y[i]));
  }
  if (xs.size() < 3) throw InsufficientDataError("fitted_decay_rate: fewer than 3 positive samples in window");
  return -numerics::linear_fit(xs, ls).first;
}

}  // namespace qdsaw
