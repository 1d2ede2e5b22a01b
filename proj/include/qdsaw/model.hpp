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
#include <optional>
#include <string>

#include "qdsaw/errors.hpp"
#include "qdsaw/linalg.hpp"

namespace qdsaw {

/// Physical parameters. All rates and frequencies are angular (rad/s).
struct SystemParams {
  double delta = 0.0;      // pump - QD detuning
  double omega_saw = 0.0;  // mechanical frequency
  double g = 0.0;          // semiclassical optomechanical coupling g0 * sqrt(n)
  double phi = 0.0;        // mechanical phase (rad)
  double gamma_qd = 0.0;   // radiative decay
  double gamma_z = 0.0;    // pure dephasing
  std::optional<double> g0;         // single-phonon coupling
  std::optional<double> n_phonons;  // mean phonon number

  void validate() const {
    if (!(omega_saw > 0.0)) throw ParameterError("omega_saw must be > 0");
    if (!(gamma_qd >= 0.0)) throw ParameterError("gamma_qd must be >= 0");
    if (!(gamma_z >= 0.0)) throw ParameterError("gamma_z must be >= 0");
    if (!(g >= 0.0)) throw ParameterError("g must be >= 0");
    if (!std::isfinite(delta) || !std::isfinite(phi)) throw ParameterError("delta and phi must be finite");
    if (g0 && n_phonons) {
      if (*g0 < 0.0 || *n_phonons < 0.0) throw ParameterError("g0 and n_phonons must be >= 0");
      const double implied = *g0 * std::sqrt(*n_phonons);
      const double scale = g > 0.0 ? g : 1.0;
      if (std::abs(g - implied) / scale > 1e-9) throw ParameterError("g inconsistent with g0 * sqrt(n_phonons)");
    }
  }

  /// Copy with g derived from g0 * sqrt(n).
  SystemParams with_phonons(double g0_value, double n) const {
    SystemParams out = *this;
    out.g0 = g0_value;
    out.n_phonons = n;
    out.g = g0_value * std::sqrt(n);
    return out;
  }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Rotating-frame (RWA) Hamiltonian over hbar:
/// 1/2 [-delta + g cos(omega_saw t + phi)] sigma_z + rabi/2 sigma_x.
inline Mat2 rotating_frame_hamiltonian(const SystemParams& p, double rabi_at_t, double t) {
  const double z = 0.5 * (-p.delta + p.g * std::cos(p.omega_saw * t + p.phi));
  const double x = 0.5 * rabi_at_t;
  // sigma_z = diag(-1, +1)
  return {-z, x, x, z};
}

/// Lab-frame Hamiltonian over hbar with a classical optical field at omega_pump.
/// Only used to check the frame transformation; propagation uses the rotating frame.
inline Mat2 lab_frame_hamiltonian(const SystemParams& p, double omega_qd, double omega_pump, double rabi,
                                  double t) {
  const double z = 0.5 * (omega_qd + p.g * std::cos(p.omega_saw * t + p.phi));
  const double x = rabi * std::cos(omega_pump * t);
  return {-z, x, x, z};
}

/// sqrt(rabi0^2 + delta^2).
inline double generalized_rabi(double rabi0, double delta) {
  if (!(rabi0 >= 0.0)) throw ParameterError("rabi0 must be >= 0");
  return std::hypot(rabi0, delta);
}

enum class LadderLabel { direct, sideband };

inline std::string to_string(LadderLabel l) { return l == LadderLabel::direct ? "direct" : "sideband"; }

/// Effective two-level model of one ladder transition.
struct LadderParams {
  double rabi = 0.0;
  double detuning = 0.0;
  LadderLabel label = LadderLabel::direct;
};

struct LadderModels {
  LadderParams direct;
  LadderParams sideband;
  double gamma_minus = 0.0;  // g0 rabi sqrt(n+1) / omega_saw
  double gamma_plus = 0.0;   // g0 rabi sqrt(n) / omega_saw
};

/// Reduced ladder picture: the zero-phonon transition driven at (rabi0, delta)
/// and the phonon-assisted diagonal transition driven resonantly at
/// Gamma = g0 rabi0 sqrt(n) / omega_saw.
///
/// gamma_minus carries sqrt(n + 1) and is labelled the phonon-removing
/// channel, as in the source model, even though a standard ladder-operator
/// reading would attach sqrt(n + 1) to phonon addition.
inline LadderModels ladder_models(const SystemParams& p, double rabi0) {
  if (!p.g0 || !p.n_phonons) throw ConfigError("ladder_models requires g0 and n_phonons");
  if (!(p.omega_saw > 0.0)) throw ParameterError("omega_saw must be > 0");
  if (!(rabi0 >= 0.0)) throw ParameterError("rabi0 must be >= 0");
  const double g0 = *p.g0;
  const double n = *p.n_phonons;
  LadderModels out;
  out.direct = {rabi0, p.delta, LadderLabel::direct};
  out.gamma_plus = g0 * rabi0 * std::sqrt(n) / p.omega_saw;
  out.gamma_minus = g0 * rabi0 * std::sqrt(n + 1.0) / p.omega_saw;
  out.sideband = {out.gamma_plus, 0.0, LadderLabel::sideband};
  return out;
}

}  // namespace qdsaw
