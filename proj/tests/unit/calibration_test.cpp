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

#include "qdsaw/calibration.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "qdsaw/units.hpp"

namespace qdsaw {
namespace {

using namespace units::literals;

const double kOmegaSaw = 3.5881_GHz;

// Coherent lines with exact Jacobi-Anger weights.
SpectrumData bessel_lines(double chi, double carrier_power = 1.0) {
  SpectrumData s;
  const double j0 = std::cyl_bessel_j(0.0, chi);
  for (int k = -3; k <= 3; ++k) {
    const double jk = std::cyl_bessel_j(static_cast<double>(std::abs(k)), chi);
    s.lines.push_back({k, -k * kOmegaSaw, carrier_power * jk * jk / (j0 * j0)});
  }
  return s;
}

// Narrow Lorentzians on a grid, no line list.
SpectrumData bessel_profile(double chi, double width) {
  SpectrumData s;
  const double j0 = std::cyl_bessel_j(0.0, chi);
  for (int i = -1500; i <= 1500; ++i) s.detuning_axis.push_back(units::ghz_to_rad(0.01 * i));
  s.intensity.assign(s.detuning_axis.size(), 0.0);
  for (int k = -3; k <= 3; ++k) {
    const double jk = std::cyl_bessel_j(static_cast<double>(std::abs(k)), chi);
    for (std::size_t i = 0; i < s.intensity.size(); ++i) {
      const double dx = s.detuning_axis[i] - k * kOmegaSaw;
      s.intensity[i] += (jk * jk / (j0 * j0)) * width / std::numbers::pi / (width * width + dx * dx);
    }
  }
  return s;
}

TEST(ModulationIndex, ExactLinesRoundTrip) {
  const double chi = 0.2787;
  const auto fit = fit_modulation_index(bessel_lines(chi), kOmegaSaw);
  EXPECT_NEAR(fit["chi"], chi, 1e-9);
  EXPECT_NEAR(fit["g"], kOmegaSaw * chi, 1e-9 * kOmegaSaw);
  EXPECT_EQ(fit.model, "bessel_index");
  EXPECT_GE(fit.errors.at("chi"), 0.0);
  EXPECT_LT(fit.residual_norm, 1e-12);
}

TEST(ModulationIndex, ProfileWithoutLineListRoundTrip) {
  const double chi = 0.2787;
  const auto fit = fit_modulation_index(bessel_profile(chi, units::ghz_to_rad(0.02)), kOmegaSaw);
  EXPECT_NEAR(fit["chi"], chi, 1e-3 * 10);
}

TEST(ModulationIndex, LargerIndexRoundTrip) {
  for (double chi : {0.05, 0.4, 0.9, 1.5}) {
    const auto fit = fit_modulation_index(bessel_lines(chi), kOmegaSaw);
    EXPECT_NEAR(fit["chi"], chi, 1e-9 * std::max(1.0, chi)) << chi;
  }
}

TEST(ModulationIndex, ScaleInvariant) {
  const auto a = fit_modulation_index(bessel_lines(0.31, 1.0), kOmegaSaw);
  const auto b = fit_modulation_index(bessel_lines(0.31, 7.3e4), kOmegaSaw);
  EXPECT_NEAR(a["chi"], b["chi"], 1e-9);
  auto prof = bessel_profile(0.31, units::ghz_to_rad(0.02));
  const auto c = fit_modulation_index(prof, kOmegaSaw);
  for (auto& v : prof.intensity) v *= 123.0;
  const auto d = fit_modulation_index(prof, kOmegaSaw);
  EXPECT_NEAR(c["chi"], d["chi"], 1e-9);
}

TEST(ModulationIndex, SingleLineIsInsufficient) {
  EXPECT_THROW(fit_modulation_index(bessel_lines(0.0), kOmegaSaw), InsufficientDataError);
  EXPECT_THROW(fit_modulation_index(bessel_profile(0.0, units::ghz_to_rad(0.02)), kOmegaSaw),
               InsufficientDataError);
}

TEST(ModulationIndex, EndToEndThroughCwSpectrum) {
  SystemParams p;
  p.omega_saw = kOmegaSaw;
  p.g = 1.0_GHz;
  p.gamma_qd = 320.0_MHz;
  CwSpectrumOptions opt;
  opt.window = 5e-9;
  const auto s = cw_scattering_spectrum(p, 0.02_GHz, opt);
  const auto fit = fit_modulation_index(s, p.omega_saw);
  EXPECT_NEAR(fit["g"] / p.g, 1.0, 0.05);
}

TEST(GvsPower, ExactPointsZeroResidual) {
  const double a = 2.0e12;
  const std::vector<double> dbm = {-41.5, -36.5};
  std::vector<double> g;
  for (double d : dbm) g.push_back(a * std::sqrt(dbm_to_watts(d)));
  const auto fit = fit_g_vs_power(dbm, g);
  EXPECT_NEAR(fit["a"] / a, 1.0, 1e-12);
  EXPECT_LT(fit.residual_norm, 1e-9 * g.back());
}

TEST(GvsPower, SixDbDoublesCoupling) {
  EXPECT_NEAR(dbm_to_watts(0.0), 1e-3, 1e-18);
  const auto fit = fit_g_vs_power({-40.0, -40.0 + 6.02}, {1.0, 2.0});
  const double ratio = fit.implied[1] / fit.implied[0];
  EXPECT_NEAR(ratio, 2.0, 1e-3);
}

TEST(GvsPower, NoisyRoundTrip) {
  std::mt19937_64 rng(3141592);
  std::normal_distribution<double> noise(0.0, 0.05);
  const double a = units::ghz_to_rad(1.0) / std::sqrt(dbm_to_watts(-36.5));
  std::vector<double> dbm, g;
  for (int i = 0; i <= 30; ++i) {
    dbm.push_back(-50.0 + 0.5 * i);
    g.push_back(a * std::sqrt(dbm_to_watts(dbm.back())) * (1.0 + noise(rng)));
  }
  const auto fit = fit_g_vs_power(dbm, g);
  EXPECT_NEAR(fit["a"] / a, 1.0, 0.05);
  EXPECT_GT(fit.errors.at("a"), 0.0);
}

TEST(GvsPower, EquivariantUnderScaling) {
  const std::vector<double> dbm = {-45.0, -42.0, -39.0, -36.0};
  const std::vector<double> g = {1.1e9, 1.5e9, 2.3e9, 3.0e9};
  std::vector<double> g3(g);
  for (auto& v : g3) v *= 3.0;
  EXPECT_NEAR(fit_g_vs_power(dbm, g3)["a"], 3.0 * fit_g_vs_power(dbm, g)["a"], 1e-12 * fit_g_vs_power(dbm, g3)["a"]);
}

TEST(GvsPower, WeightedAndErrors) {
  const std::vector<double> dbm = {-45.0, -40.0};
  EXPECT_THROW(fit_g_vs_power({-40.0}, {1.0}), InsufficientDataError);
  EXPECT_THROW(fit_g_vs_power(dbm, {1.0}), ShapeError);
  const auto fit = fit_g_vs_power(dbm, {1.0, 2.0}, std::vector<double>{1e-9, 1.0});
  // The tightly weighted first point dominates.
  EXPECT_NEAR(fit["a"] * std::sqrt(dbm_to_watts(-45.0)), 1.0, 1e-9);
}

TEST(CalibrationPoints, ParsesTwoAndThreeColumns) {
  const auto two = parse_calibration_points("# dBm  g\n-41.5 1.0\n-36.5 1.8\n");
  EXPECT_EQ(two.x.size(), 2u);
  EXPECT_FALSE(two.sigma.has_value());
  const auto three = parse_calibration_points("-41.5 1.0 0.1\n-36.5 1.8 0.2\n");
  ASSERT_TRUE(three.sigma.has_value());
  EXPECT_DOUBLE_EQ((*three.sigma)[1], 0.2);
  EXPECT_THROW(parse_calibration_points("-41.5 1.0 0.0\n"), FormatError);
  EXPECT_THROW(parse_calibration_points("-41.5\n"), FormatError);
}

SystemParams rabi_reference() {
  SystemParams p;
  p.omega_saw = kOmegaSaw;
  p.gamma_qd = 320.0_MHz;
  return p;
}

std::vector<double> power_axis() {
  std::vector<double> w;
  for (int i = 0; i <= 60; ++i) w.push_back(i * 2.5e-9);
  return w;
}

TEST(OccupancyScale, SelfConsistentRoundTrip) {
  const PowerCalibration cal(1.0_GHz / std::sqrt(1e-9));
  const auto powers = power_axis();
  PowerSweepOptions opt;
  opt.bin = 16e-12;
  const auto sim = rabi_power_sweep(rabi_reference(), powers, cal, opt).summaries.at("occupancy");
  std::vector<double> counts;
  for (double s : sim) counts.push_back(3e4 * s);
  const auto fit = fit_occupancy_scale(powers, counts, rabi_reference(), cal);
  EXPECT_NEAR(fit["eta"] / 3e4, 1.0, 1e-3);
  for (std::size_t i = 0; i < sim.size(); ++i) EXPECT_NEAR(fit.implied[i], sim[i], 1e-6);
}

TEST(OccupancyScale, Failures) {
  const PowerCalibration cal(1.0_GHz / std::sqrt(1e-9));
  const auto powers = power_axis();
  EXPECT_THROW(fit_occupancy_scale(powers, std::vector<double>(powers.size(), 0.0), rabi_reference(), cal),
               AnalysisError);
  PowerSweepOptions inside;
  inside.readout_time = 100e-12;
  EXPECT_THROW(fit_occupancy_scale(powers, std::vector<double>(powers.size(), 1.0), rabi_reference(), cal, inside),
               ParameterError);
  EXPECT_THROW(fit_occupancy_scale({1e-9, 2e-9, 3e-9}, {1.0, 2.0, 3.0}, rabi_reference(), cal),
               InsufficientDataError);
}

}  // namespace
}  // namespace qdsaw
