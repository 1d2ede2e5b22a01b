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
#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "qdsaw/errors.hpp"
#include "qdsaw/linalg.hpp"
#include "qdsaw/model.hpp"
#include "qdsaw/pulses.hpp"

namespace qdsaw {

struct SolverConfig {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  double max_step = 1e-12;   // s
  double output_dt = 1e-12;  // s

  /// Smallest step the integrator may take before giving up.
  double min_step() const { return 1e-9 * output_dt; }

  void validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ParameterError("SolverConfig: tolerances must be > 0");
    if (!(max_step > 0.0)) throw ParameterError("SolverConfig: max_step must be > 0");
    if (!(output_dt > 0.0) || output_dt < min_step()) throw ParameterError("SolverConfig: bad output_dt");
  }
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// Time series from one propagation.
struct Trajectory {
  TimeGrid grid;
  std::vector<double> occupancy;
  std::vector<BlochVector> bloch;
  std::vector<double> trace_error;
  std::vector<double> min_eigenvalue;
  std::vector<Mat2> states;
  SystemParams params;
  PulseMeta envelope_meta;

  std::size_t size() const { return occupancy.size(); }
};

/// Operator-valued solution of the Lindblad equation started from an
/// arbitrary (not necessarily physical) operator.
struct OperatorTrajectory {
  TimeGrid grid;
  std::vector<Mat2> ops;
};

inline std::array<CollapseChannel, 2> standard_channels(const SystemParams& p) {
  return {CollapseChannel{p.gamma_qd, pauli::sm()}, CollapseChannel{p.gamma_z, pauli::sz()}};
}

/// Adaptive Dormand-Prince 5(4) integrator for the driven two-level Lindblad
/// equation. Holds no mutable state between calls except the suggested step,
/// which the caller owns.
template <DriveEnvelope Drive>
class LindbladPropagator {
 public:
  LindbladPropagator(const SystemParams& p, const Drive& drive, const SolverConfig& cfg)
      : p_(p), drive_(drive), cfg_(cfg), channels_(standard_channels(p)) {
    p_.validate();
    cfg_.validate();
    validate_channels(channels_);
  }

  Mat2 rhs(double t, const Mat2& x) const {
    return lindblad_apply(rotating_frame_hamiltonian(p_, drive_.rabi_at(t), t), channels_, x);
  }

  /// Advances x from t_a to t_b exactly. h is the step-size hint, updated in place.
  void advance(Mat2& x, double t_a, double t_b, double& h) const {
    double t = t_a;
    if (!(h > 0.0)) h = cfg_.max_step;
    Mat2 k1 = rhs(t, x);
    while (t < t_b) {
      double step = std::min({h, cfg_.max_step, t_b - t});
      const bool last = step >= t_b - t;
      Mat2 next, k7;
      const double err = try_step(x, t, step, k1, next, k7);
      if (err <= 1.0) {
        t = last ? t_b : t + step;
        x = next;
        k1 = k7;
        const double grow = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (!last || step == h) h = std::min(step * grow, cfg_.max_step);
      } else {
        const double shrink = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.9) : 0.1;
        h = step * shrink;
        if (h < cfg_.min_step()) throw NumericalError("step size underflow; tolerance cannot be met", t);
      }
    }
  }

  const SystemParams& params() const { return p_; }
  const SolverConfig& config() const { return cfg_; }

 private:
  double try_step(const Mat2& y, double t, double h, const Mat2& k1, Mat2& out, Mat2& k7) const {
    // Dormand-Prince coefficients
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;

    const Mat2 k2 = rhs(t + c2 * h, y + (h * a21) * k1);
    const Mat2 k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Mat2 k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Mat2 k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Mat2 k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    out = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    k7 = rhs(t + h, out);
    const Mat2 e = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double acc = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
      const cplx yi = y.data()[i], oi = out.data()[i], ei = e.data()[i];
      const double sr = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(yi.real()), std::abs(oi.real()));
      const double si = cfg_.abs_tol + cfg_.rel_tol * std::max(std::abs(yi.imag()), std::abs(oi.imag()));
      acc += (ei.real() / sr) * (ei.real() / sr) + (ei.imag() / si) * (ei.imag() / si);
    }
    return std::sqrt(acc / 8.0);
  }

  SystemParams p_;
  Drive drive_;
  SolverConfig cfg_;
  std::array<CollapseChannel, 2> channels_;
};

namespace detail {
inline void record_state(Trajectory& tr, const Mat2& rho) {
  const Mat2 herm = 0.5 * (rho + rho.adjoint());
  tr.occupancy.push_back(herm(1, 1).real());
  tr.bloch.push_back(bloch_components(herm));
  tr.trace_error.push_back(std::abs(rho.trace() - 1.0));
  tr.min_eigenvalue.push_back(min_eigenvalue_hermitian(herm));
  tr.states.push_back(rho);
}
}  // namespace detail

/// Propagates init over out_grid under drive.
template <DriveEnvelope Drive>
Trajectory propagate(const SystemParams& p, const Drive& drive, const SolverConfig& cfg, const DensityState& init,
                     const TimeGrid& out_grid) {
  const LindbladPropagator<Drive> prop(p, drive, cfg);
  Trajectory tr;
  tr.grid = out_grid;
  tr.params = p;
  if constexpr (std::same_as<Drive, PulseEnvelope>) tr.envelope_meta = drive.meta();
  else tr.envelope_meta.shape = "cw";
  tr.occupancy.reserve(out_grid.n);
  tr.bloch.reserve(out_grid.n);
  tr.states.reserve(out_grid.n);
  Mat2 rho = init.matrix();
  detail::record_state(tr, rho);
  double h = cfg.max_step;
  for (std::size_t i = 1; i < out_grid.n; ++i) {
    prop.advance(rho, out_grid.time(i - 1), out_grid.time(i), h);
    detail::record_state(tr, rho);
  }
  return tr;
}

/// Output grid spanning the envelope window at cfg.output_dt.
inline TimeGrid output_grid_for(const PulseEnvelope& env, const SolverConfig& cfg) {
  return TimeGrid::span(env.grid().t0, env.grid().end(), cfg.output_dt);
}

inline Trajectory propagate(const SystemParams& p, const PulseEnvelope& env, const SolverConfig& cfg = {},
                            const DensityState& init = DensityState::ground()) {
  return propagate(p, env, cfg, init, output_grid_for(env, cfg));
}

/// Evolves an arbitrary operator from t_start over out_grid (out_grid.t0 is t_start).
template <DriveEnvelope Drive>
OperatorTrajectory propagate_conditional(const SystemParams& p, const Drive& drive, const SolverConfig& cfg,
                                         const Mat2& init_operator, const TimeGrid& out_grid) {
  const LindbladPropagator<Drive> prop(p, drive, cfg);
  OperatorTrajectory out{out_grid, {}};
  out.ops.reserve(out_grid.n);
  Mat2 x = init_operator;
  out.ops.push_back(x);
  double h = cfg.max_step;
  for (std::size_t i = 1; i < out_grid.n; ++i) {
    prop.advance(x, out_grid.time(i - 1), out_grid.time(i), h);
    out.ops.push_back(x);
  }
  return out;
}

/// Conditional propagation from t_start to the end of the envelope window.
inline OperatorTrajectory propagate_conditional(const SystemParams& p, const PulseEnvelope& env,
                                                const SolverConfig& cfg, const Mat2& init_operator,
                                                double t_start) {
  const double t_end = env.grid().end();
  if (t_start < env.grid().t0 || t_start >= t_end) throw ParameterError("propagate_conditional: t_start outside window");
  return propagate_conditional(p, env, cfg, init_operator, TimeGrid::span(t_start, t_end, cfg.output_dt));
}

}  // namespace qdsaw
