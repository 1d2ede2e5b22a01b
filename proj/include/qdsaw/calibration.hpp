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
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qdsaw/errors.hpp"
#include "qdsaw/experiments.hpp"
#include "qdsaw/io/table.hpp"
#include "qdsaw/model.hpp"
#include "qdsaw/pulses.hpp"
#include "qdsaw/spectroscopy.hpp"

namespace qdsaw {

struct CalibrationFit {
  std::string model;  // "bessel_index", "sqrt_power" or "occupancy_scale"
  std::map<std::string, double> parameters;
  std::map<std::string, double> errors;  // one standard error per parameter
  double residual_norm = 0.0;
  std::vector<double> implied;  // model-specific derived series

  double operator[](const std::string& name) const {
    const auto it = parameters.find(name);
    if (it == parameters.end()) throw ParameterError("CalibrationFit: no parameter '" + name + "'");
    return it->second;
  }
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

/// Imported calibration points: (x, y) with optional per-point sigma.
struct CalibrationPoints {
  std::vector<double> x;
  std::vector<double> y;
  std::optional<std::vector<double>> sigma;
};

inline CalibrationPoints parse_calibration_points(const std::string& text) {
  const auto rows = io::parse_table(text, 2, 3);
  CalibrationPoints out;
  if (rows.front().size() == 3) out.sigma.emplace();
  for (const auto& r : rows) {
    out.x.push_back(r[0]);
    out.y.push_back(r[1]);
    if (out.sigma) {
      if (!(r[2] > 0.0)) throw FormatError("calibration points: sigma must be > 0");
      out.sigma->push_back(r[2]);
    }
  }
  return out;
}

inline CalibrationPoints read_calibration_points(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_calibration_points(ss.str());
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

namespace detail {

inline double bessel_ratio(int k, double chi) {
  const double jk = std::cyl_bessel_j(static_cast<double>(k), chi);
  const double j0 = std::cyl_bessel_j(0.0, chi);
  return jk * jk / (j0 * j0);
}

// d/dchi of J_k^2 / J_0^2, using J_k' = (J_{k-1} - J_{k+1}) / 2 and J_0' = -J_1.
inline double bessel_ratio_derivative(int k, double chi) {
  const double kk = static_cast<double>(k);
  const double jk = std::cyl_bessel_j(kk, chi);
  const double j0 = std::cyl_bessel_j(0.0, chi);
  const double djk = 0.5 * (std::cyl_bessel_j(kk - 1.0, chi) - std::cyl_bessel_j(kk + 1.0, chi));
  const double dj0 = -std::cyl_bessel_j(1.0, chi);
  return 2.0 * jk * (djk * j0 - jk * dj0) / (j0 * j0 * j0);
}

struct LineWeight {
  double weight = 0.0;
  bool resolved = false;
};

// Weight of the feature near x0 within +-half_width: area above the chord
// joining the window edges. Resolved when the window maximum is interior and
// at least twice the chord there.
inline LineWeight window_weight(const SpectrumData& s, double x0, double half_width) {
  const auto& x = s.detuning_axis;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - x0) <= half_width) idx.push_back(i);
  if (idx.size() < 3) return {};
  const std::size_t a = idx.front(), b = idx.back();
  auto chord = [&](std::size_t i) {
    return s.intensity[a] + (s.intensity[b] - s.intensity[a]) * (x[i] - x[a]) / (x[b] - x[a]);
  };
  LineWeight out;
  std::size_t peak = a;
  for (std::size_t k = 1; k + 1 < idx.size(); ++k) {
    const std::size_t i = idx[k];
    const double dx = 0.5 * (x[i + 1] - x[i - 1]);
    out.weight += std::max(0.0, s.intensity[i] - chord(i)) * dx;
    if (s.intensity[i] > s.intensity[peak]) peak = i;
  }
  out.resolved = peak != a && peak != b && s.intensity[peak] > 2.0 * chord(peak);
  return out;
}

}  // namespace detail

/// Fits chi to sideband/carrier weight ratios J_k(chi)^2 / J_0(chi)^2, k = 1, 2
/// (each ratio from the mean of the +k and -k weights). Uses the coherent
/// line list when present; otherwise the strongest spectral point is taken as
/// the carrier and weights are integrated over windows of +-omega_saw / 4.
inline CalibrationFit fit_modulation_index(const SpectrumData& spectrum, double omega_saw) {
  if (!(omega_saw > 0.0)) throw ParameterError("fit_modulation_index: omega_saw must be > 0");
  std::map<int, double> weight;
  if (!spectrum.lines.empty()) {
    double carrier = 0.0;
    for (const auto& l : spectrum.lines)
      if (l.order == 0) carrier = l.power;
    for (const auto& l : spectrum.lines)
      if (carrier > 0.0 && l.power > 1e-10 * carrier) weight[l.order] = l.power;
  } else {
    if (spectrum.intensity.empty()) throw InsufficientDataError("fit_modulation_index: empty spectrum");
    const auto top = std::max_element(spectrum.intensity.begin(), spectrum.intensity.end());
    const double x0 = spectrum.detuning_axis[static_cast<std::size_t>(top - spectrum.intensity.begin())];
    for (int k = -2; k <= 2; ++k) {
      const auto w = detail::window_weight(spectrum, x0 - k * omega_saw, 0.25 * omega_saw);
      if (w.resolved) weight[k] = w.weight;
    }
  }
  if (!weight.count(0) || !(weight[0] > 0.0)) throw InsufficientDataError("fit_modulation_index: no carrier");

  std::vector<std::pair<int, double>> ratios;
  for (int k = 1; k <= 2; ++k) {
    const bool plus = weight.count(k) > 0, minus = weight.count(-k) > 0;
    if (!plus && !minus) continue;
    const double w = plus && minus ? 0.5 * (weight[k] + weight[-k]) : (plus ? weight[k] : weight[-k]);
    ratios.emplace_back(k, w / weight[0]);
  }
  if (ratios.empty() || ratios.front().first != 1)
    throw InsufficientDataError("fit_modulation_index: no resolvable first sideband");

  // Damped Gauss-Newton on the residuals r_k - J_k^2/J_0^2.
  double chi = 2.0 * std::sqrt(ratios.front().second);
  auto rss = [&](double c) {
    double s = 0.0;
    for (const auto& [k, r] : ratios) s += std::pow(r - detail::bessel_ratio(k, c), 2);
    return s;
  };
  double lambda = 1e-3;
  for (int it = 0; it < 100; ++it) {
    double jtj = 0.0, jtr = 0.0;
    for (const auto& [k, r] : ratios) {
      const double d = detail::bessel_ratio_derivative(k, chi);
      jtj += d * d;
      jtr += d * (r - detail::bessel_ratio(k, chi));
    }
    const double before = rss(chi);
    double next = chi + jtr / (jtj * (1.0 + lambda));
    while (rss(next) > before && lambda < 1e12) {
      lambda *= 10.0;
      next = chi + jtr / (jtj * (1.0 + lambda));
    }
    lambda = std::max(lambda * 0.1, 1e-12);
    const bool done = std::abs(next - chi) <= 1e-13 * std::max(1.0, std::abs(chi));
    if (rss(next) <= before) chi = next;
    if (done) break;
  }
  if (!(chi > 0.0) || !std::isfinite(chi)) throw AnalysisError("fit_modulation_index: fit did not converge");

  CalibrationFit fit;
  fit.model = "bessel_index";
  const double res = rss(chi);
  fit.residual_norm = std::sqrt(res);
  double jtj = 0.0;
  for (const auto& [k, r] : ratios) jtj += std::pow(detail::bessel_ratio_derivative(k, chi), 2);
  const double dof = static_cast<double>(ratios.size()) - 1.0;
  const double se = dof > 0.0 ? std::sqrt(res / dof / jtj) : 0.0;
  fit.parameters = {{"chi", chi}, {"g", omega_saw * chi}};
  fit.errors = {{"chi", se}, {"g", omega_saw * se}};
  for (const auto& [k, r] : ratios) fit.implied.push_back(r);
  return fit;
}

/// g = a sqrt(P) with P in watts converted from dBm; weighted least squares
/// when sigmas are given.
inline CalibrationFit fit_g_vs_power(const std::vector<double>& power_dbm, const std::vector<double>& g,
                                     const std::optional<std::vector<double>>& sigma = std::nullopt) {
  if (power_dbm.size() != g.size()) throw ShapeError("fit_g_vs_power: length mismatch");
  if (sigma && sigma->size() != g.size()) throw ShapeError("fit_g_vs_power: sigma length mismatch");
  if (g.size() < 2) throw InsufficientDataError("fit_g_vs_power: need at least 2 points");
  double sw_p = 0.0, sw_gp = 0.0;
  std::vector<double> root(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double w = sigma ? 1.0 / ((*sigma)[i] * (*sigma)[i]) : 1.0;
    const double p = dbm_to_watts(power_dbm[i]);
    root[i] = std::sqrt(p);
    sw_p += w * p;
    sw_gp += w * g[i] * root[i];
  }
  const double a = sw_gp / sw_p;
  double rss = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) rss += std::pow(g[i] - a * root[i], 2);
  CalibrationFit fit;
  fit.model = "sqrt_power";
  fit.residual_norm = std::sqrt(rss);
  const double se = sigma ? 1.0 / std::sqrt(sw_p) : std::sqrt(rss / static_cast<double>(g.size() - 1) / sw_p);
  fit.parameters = {{"a", a}};
  fit.errors = {{"a", se}};
  for (double r : root) fit.implied.push_back(a * r);
  return fit;
}

/// Scale eta between measured counts per bin and simulated occupancy at the
/// readout bin after a square pulse, counts = eta * occupancy.
inline CalibrationFit fit_occupancy_scale(const std::vector<double>& power_w, const std::vector<double>& counts,
                                          const SystemParams& p, const PowerCalibration& cal,
                                          const PowerSweepOptions& opt = {.readout_time = 140e-12, .bin = 16e-12},
                                          const SolverConfig& cfg = {}, std::size_t workers = 1) {
  if (power_w.size() != counts.size()) throw ShapeError("fit_occupancy_scale: length mismatch");
  if (power_w.size() < 3) throw InsufficientDataError("fit_occupancy_scale: need at least 3 points");
  const auto sweep = rabi_power_sweep(p, power_w, cal, opt, cfg, workers);
  const auto& s = sweep.summaries.at("occupancy");
  if (local_maxima(s).empty())
    throw InsufficientDataError("fit_occupancy_scale: powers do not span a Rabi oscillation");
  const bool flat = std::all_of(counts.begin(), counts.end(), [&](double c) { return c == counts.front(); });
  if (flat) throw AnalysisError("fit_occupancy_scale: counts are flat");
  double scs = 0.0, sss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    scs += counts[i] * s[i];
    sss += s[i] * s[i];
  }
  const double eta = scs / sss;
  if (!(eta > 0.0)) throw AnalysisError("fit_occupancy_scale: non-positive scale");
  double rss = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) rss += std::pow(counts[i] - eta * s[i], 2);
  CalibrationFit fit;
  fit.model = "occupancy_scale";
  fit.residual_norm = std::sqrt(rss);
  fit.parameters = {{"eta", eta}};
  fit.errors = {{"eta", std::sqrt(rss / static_cast<double>(s.size() - 1) / sss)}};
  for (double c : counts) fit.implied.push_back(c / eta);
  return fit;
}

}  // namespace qdsaw
