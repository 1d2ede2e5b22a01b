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
#include <concepts>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qdsaw/errors.hpp"
#include "qdsaw/io/table.hpp"

namespace qdsaw {

/// Uniform time grid t_i = t0 + i dt, i = 0..n-1.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1e-12;
  std::size_t n = 2;

  TimeGrid() = default;
  TimeGrid(double t0_, double dt_, std::size_t n_) : t0(t0_), dt(dt_), n(n_) {
    if (!(dt > 0.0)) throw ParameterError("TimeGrid: dt must be > 0");
    if (n < 2) throw ParameterError("TimeGrid: need at least two points");
  }
  /// Grid covering [t0, t_end] with spacing dt (t_end rounded to the nearest step).
  static TimeGrid span(double t0, double t_end, double dt) {
    if (!(t_end > t0)) throw ParameterError("TimeGrid: empty interval");
    const auto steps = static_cast<std::size_t>(std::llround((t_end - t0) / dt));
    return TimeGrid(t0, dt, steps + 1);
  }

  double time(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double end() const { return time(n - 1); }
  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Default simulation grid: 1 ps steps over 0-3 ns.
inline TimeGrid default_grid() { return TimeGrid::span(0.0, 3e-9, 1e-12); }

/// Anything that provides a Rabi rate (rad/s) as a function of time.
template <class E>
concept DriveEnvelope = requires(const E& e, double t) {
  { e.rabi_at(t) } -> std::convertible_to<double>;
};

/// Constant (CW) drive.
struct ConstantDrive {
  double rabi = 0.0;
  double rabi_at(double) const { return rabi; }
};

struct PulseMeta {
  std::string shape = "none";
  double peak_rabi = 0.0;
  double duration = 0.0;
  double rise = 0.0;
  double fall = 0.0;
  std::optional<double> filter_bandwidth;  // Hz
};

/// Sampled real envelope Omega_0(t) in rad/s; linear interpolation between
/// samples and zero outside the grid.
class PulseEnvelope {
 public:
  PulseEnvelope(TimeGrid grid, std::vector<double> values, PulseMeta meta)
      : grid_(grid), values_(std::move(values)), meta_(std::move(meta)) {
    if (values_.size() != grid_.n) throw ShapeError("PulseEnvelope: values/grid size mismatch");
    for (double v : values_)
      if (!std::isfinite(v) || v < 0.0) throw ParameterError("PulseEnvelope: values must be finite and >= 0");
  }

  const TimeGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  const PulseMeta& meta() const { return meta_; }

  double rabi_at(double t) const {
    const double x = (t - grid_.t0) / grid_.dt;
    if (x < 0.0 || x > static_cast<double>(grid_.n - 1)) return 0.0;
    auto i = static_cast<std::size_t>(x);
    if (i >= grid_.n - 1) return values_.back();
    const double f = x - static_cast<double>(i);
    return values_[i] + f * (values_[i + 1] - values_[i]);
  }

  double max_value() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

  /// Copy scaled so that the maximum equals peak.
  PulseEnvelope rescaled(double peak) const {
    if (!(peak >= 0.0)) throw ParameterError("peak must be >= 0");
    const double m = max_value();
    std::vector<double> v(values_);
    if (m > 0.0)
      for (auto& x : v) x *= peak / m;
    PulseMeta meta = meta_;
    meta.peak_rabi = m > 0.0 ? peak : 0.0;
    return {grid_, std::move(v), std::move(meta)};
  }

 private:
  TimeGrid grid_;
  std::vector<double> values_;
  PulseMeta meta_;
};

namespace detail {
inline double raised_cosine(double x) { return 0.5 * (1.0 - std::cos(std::numbers::pi * x)); }
inline double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }
}  // namespace detail

/// Flat-top pulse with raised-cosine ramps. The rising edge spans
/// [start, start + rise] and the full width at half maximum equals duration.
/// Ramps narrower than one grid step are sampled by cell coverage, so the
/// envelope area varies continuously with start and duration.
inline PulseEnvelope square_pulse(const TimeGrid& grid, double start, double duration, double rise, double fall,
                                  double peak) {
  if (!(rise >= 0.0) || !(fall >= 0.0)) throw ParameterError("square_pulse: rise/fall must be >= 0");
  if (!(duration > 0.0)) throw ParameterError("square_pulse: duration must be > 0");
  if (!(peak >= 0.0)) throw ParameterError("square_pulse: peak must be >= 0");
  if (duration < 0.5 * (rise + fall)) throw ParameterError("square_pulse: ramps longer than the pulse");
  const double dt = grid.dt;
  const double t_on = start + 0.5 * rise;
  const double t_off = t_on + duration;
  const double t_end = t_off + 0.5 * fall;
  const bool sharp_rise = rise < dt;
  const bool sharp_fall = fall < dt;
  const double lead = sharp_rise ? t_on : start;
  const double tail = sharp_fall ? t_off : t_end;
  if (lead < grid.t0 - 1e-9 * dt || tail > grid.end() + 1e-9 * dt)
    throw ParameterError("square_pulse: pulse extends outside the time grid");

  std::vector<double> v(grid.n, 0.0);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double t = grid.time(i);
    // Sample cell, halved at the grid ends.
    const double lo = std::max(t - 0.5 * dt, grid.t0);
    const double hi = std::min(t + 0.5 * dt, grid.end());
    double up = 0.0;
    if (sharp_rise)
      up = detail::clamp01((hi - t_on) / (hi - lo));
    else
      up = detail::raised_cosine(detail::clamp01((t - start) / rise));
    double down = 0.0;
    if (sharp_fall)
      down = detail::clamp01((t_off - lo) / (hi - lo));
    else
      down = 1.0 - detail::raised_cosine(detail::clamp01((t - (t_off - 0.5 * fall)) / fall));
    v[i] = peak * up * down;
  }
  PulseMeta meta{"square", 0.0, duration, rise, fall, std::nullopt};
  meta.peak_rabi = v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
  return {grid, std::move(v), std::move(meta)};
}

/// Passes the field amplitude through a causal single-pole Lorentzian filter
/// h(t) = theta(t) k exp(-k t), k = pi * bandwidth_fwhm, then rescales to the
/// input peak. The convolution is exact for the piecewise-linear input.
inline PulseEnvelope etalon_filtered_pulse(const PulseEnvelope& input, double bandwidth_fwhm) {
  if (!(bandwidth_fwhm > 0.0)) throw ParameterError("etalon_filtered_pulse: bandwidth must be > 0");
  const auto& x = input.values();
  const double kh = std::numbers::pi * bandwidth_fwhm * input.grid().dt;
  const double decay = std::exp(-kh);
  // (1 - e^{-kh}) / kh, with a series for tiny kh
  const double avg = kh < 1e-8 ? 1.0 - 0.5 * kh : -std::expm1(-kh) / kh;
  std::vector<double> y(x.size(), 0.0);
  y[0] = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i)
    y[i + 1] = decay * y[i] + x[i] * (avg - decay) + x[i + 1] * (1.0 - avg);
  for (auto& v : y) v = std::max(v, 0.0);
  PulseMeta meta = input.meta();
  meta.shape = "etalon";
  meta.filter_bandwidth = bandwidth_fwhm;
  PulseEnvelope filtered(input.grid(), std::move(y), std::move(meta));
  return filtered.rescaled(input.meta().peak_rabi);
}

/// Optical power to resonant Rabi rate, rabi = coefficient * sqrt(P).
struct PowerCalibration {
  double coefficient = 1.0;  // rad/s per sqrt(W)

  explicit PowerCalibration(double c = 1.0) : coefficient(c) {
    if (!(c > 0.0)) throw ParameterError("PowerCalibration: coefficient must be > 0");
  }
};

inline double power_to_rabi(double power_w, const PowerCalibration& cal) {
  if (!(power_w >= 0.0)) throw ParameterError("power_to_rabi: power must be >= 0");
  return cal.coefficient * std::sqrt(power_w);
}

struct IntensitySample {
  double t = 0.0;          // s
  double intensity = 0.0;  // arbitrary units
};

/// Measured intensity trace to envelope: linear resampling of the intensity
/// onto grid, square root to amplitude, maximum scaled to peak.
inline PulseEnvelope load_envelope(const std::vector<IntensitySample>& samples, const TimeGrid& grid,
                                   double peak) {
  if (samples.empty()) throw FormatError("load_envelope: no samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].t) || !std::isfinite(samples[i].intensity))
      throw FormatError("load_envelope: non-finite sample");
    if (samples[i].intensity < 0.0) throw FormatError("load_envelope: negative intensity");
    if (i > 0 && !(samples[i].t > samples[i - 1].t)) throw FormatError("load_envelope: time column not increasing");
  }
  if (!(peak >= 0.0)) throw ParameterError("load_envelope: peak must be >= 0");
  std::vector<double> v(grid.n, 0.0);
  std::size_t k = 0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double t = grid.time(i);
    if (samples.size() == 1) {
      v[i] = (t == samples[0].t) ? samples[0].intensity : 0.0;
      continue;
    }
    if (t < samples.front().t || t > samples.back().t) continue;
    while (k + 2 < samples.size() && samples[k + 1].t < t) ++k;
    const auto& a = samples[k];
    const auto& b = samples[k + 1];
    const double f = (t - a.t) / (b.t - a.t);
    v[i] = a.intensity + std::clamp(f, 0.0, 1.0) * (b.intensity - a.intensity);
  }
  for (auto& x : v) x = std::sqrt(std::max(x, 0.0));
  if (v.front() != 0.0) throw ParameterError("load_envelope: envelope is non-zero at the grid start");
  PulseMeta meta{"measured", 0.0, 0.0, 0.0, 0.0, std::nullopt};
  PulseEnvelope raw(grid, std::move(v), std::move(meta));
  return raw.rescaled(peak);
}

/// Parses the two-column (time_ns, relative_intensity) envelope format.
inline std::vector<IntensitySample> parse_envelope_text(const std::string& text) {
  const auto rows = io::parse_table(text, 2, 2);
  std::vector<IntensitySample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r[0] * 1e-9, r[1]});
  return out;
}

inline std::vector<IntensitySample> read_envelope_file(const std::string& path) {
  const auto rows = io::read_table(path, 2, 2);
  std::vector<IntensitySample> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back({r[0] * 1e-9, r[1]});
  return out;
}

}  // namespace qdsaw
