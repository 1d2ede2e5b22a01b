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

#include <numbers>

// Internally every frequency is angular (rad/s) and every time is in seconds.
// Files and the CLI speak GHz (omega / 2pi) and ns.
namespace qdsaw::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double ghz_to_rad(double f_ghz) { return kTwoPi * f_ghz * 1e9; }
constexpr double rad_to_ghz(double w) { return w / (kTwoPi * 1e9); }
constexpr double ns_to_s(double t_ns) { return t_ns * 1e-9; }
constexpr double s_to_ns(double t_s) { return t_s * 1e9; }
constexpr double ps_to_s(double t_ps) { return t_ps * 1e-12; }

namespace literals {
constexpr double operator""_GHz(long double f) { return ghz_to_rad(static_cast<double>(f)); }
constexpr double operator""_MHz(long double f) { return ghz_to_rad(static_cast<double>(f) * 1e-3); }
constexpr double operator""_ns(long double t) { return static_cast<double>(t) * 1e-9; }
constexpr double operator""_ps(long double t) { return static_cast<double>(t) * 1e-12; }
}  // namespace literals

}  // namespace qdsaw::units
