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

#include "qdsaw/pulses.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"
#include "qdsaw/units.hpp"

namespace qdsaw {
namespace {

using namespace units::literals;

// Times where the envelope crosses half of its maximum, by linear interpolation.
std::pair<double, double> half_max_crossings(const PulseEnvelope& env) {
  const auto& v = env.values();
  const double half = 0.5 * env.max_value();
  double up = NAN, down = NAN;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double t = env.grid().time(i);
    if (std::isnan(up) && v[i] < half && v[i + 1] >= half) up = t + env.grid().dt * (half - v[i]) / (v[i + 1] - v[i]);
    if (!std::isnan(up) && v[i] >= half && v[i + 1] < half) down = t + env.grid().dt * (v[i] - half) / (v[i] - v[i + 1]);
  }
  return {up, down};
}

TEST(SquarePulse, IdealRectangle) {
  const TimeGrid grid = default_grid();
  const auto env = square_pulse(grid, 100.0_ps, 130.0_ps, 0.0, 0.0, 1.0_GHz);
  double area = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double t = grid.time(i);
    area += env.values()[i] * grid.dt;
    if (t > 101e-12 && t < 229e-12) {
      EXPECT_DOUBLE_EQ(env.values()[i], 1.0_GHz);
    }
    if (t < 99e-12 || t > 231e-12) {
      EXPECT_EQ(env.values()[i], 0.0);
    }
  }
  EXPECT_NEAR(area, 1.0_GHz * 130e-12, 1e-9 * area);
  EXPECT_DOUBLE_EQ(env.meta().peak_rabi, 1.0_GHz);
  EXPECT_EQ(env.values().front(), 0.0);
}

TEST(SquarePulse, FwhmEqualsDurationWithRamps) {
  const TimeGrid grid = default_grid();
  const auto env = square_pulse(grid, 50.0_ps, 130.0_ps, 15.0_ps, 15.0_ps, 1.0_GHz);
  const auto [up, down] = half_max_crossings(env);
  EXPECT_NEAR(down - up, 130e-12, grid.dt);
  EXPECT_NEAR(env.max_value(), env.meta().peak_rabi, 1e-9 * env.max_value());
}

TEST(SquarePulse, ZeroPeakIsZero) {
  const auto env = square_pulse(default_grid(), 100.0_ps, 130.0_ps, 15.0_ps, 15.0_ps, 0.0);
  for (double v : env.values()) EXPECT_EQ(v, 0.0);
}

TEST(SquarePulse, OutsideGridIsRangeError) {
  EXPECT_THROW(square_pulse(default_grid(), 2.9e-9, 500.0_ps, 0.0, 0.0, 1.0), ParameterError);
  EXPECT_THROW(square_pulse(default_grid(), -10.0_ps, 100.0_ps, 15.0_ps, 15.0_ps, 1.0), ParameterError);
  EXPECT_THROW(square_pulse(default_grid(), 10.0_ps, 0.0, 0.0, 0.0, 1.0), ParameterError);
}

TEST(SquarePulse, AreaContinuousInDuration) {
  // Sub-step changes of duration change the area proportionally.
  const TimeGrid grid = default_grid();
  auto area = [&](double d) {
    const auto env = square_pulse(grid, 100.0_ps, d, 0.0, 0.0, 1.0);
    double s = 0.0;
    for (double v : env.values()) s += v * grid.dt;
    return s;
  };
  EXPECT_NEAR(area(130.25e-12) - area(130.0e-12), 0.25e-12, 1e-18);
}

TEST(EtalonFilter, DecayTimeMatchesSinglePole) {
  const TimeGrid grid = default_grid();
  const auto rect = square_pulse(grid, 100.0_ps, 130.0_ps, 0.0, 0.0, 1.0_GHz);
  const auto env = etalon_filtered_pulse(rect, 600e6);
  // ln(amplitude) slope after the drive stops
  const std::size_t i1 = 500, i2 = 2000;
  const double slope = (std::log(env.values()[i2]) - std::log(env.values()[i1])) / (grid.time(i2) - grid.time(i1));
  const double tau = -1.0 / slope;
  EXPECT_NEAR(tau, 1.0 / (std::numbers::pi * 600e6), 1e-6 * tau);
  EXPECT_NEAR(tau * 1e12, 530.5, 0.05);
  EXPECT_NEAR(env.max_value(), 1.0_GHz, 1e-6);
  EXPECT_EQ(env.meta().shape, "etalon");
}

TEST(EtalonFilter, AllPassLimit) {
  const TimeGrid grid = default_grid();
  const auto rect = square_pulse(grid, 100.0_ps, 130.0_ps, 15.0_ps, 15.0_ps, 1.0_GHz);
  const auto env = etalon_filtered_pulse(rect, 1e15);
  for (std::size_t i = 0; i < grid.n; ++i) EXPECT_NEAR(env.values()[i], rect.values()[i], 0.01 * 1.0_GHz);
}

TEST(EtalonFilter, ZeroInZeroOut) {
  const auto zero = square_pulse(default_grid(), 100.0_ps, 130.0_ps, 0.0, 0.0, 0.0);
  for (double v : etalon_filtered_pulse(zero, 600e6).values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(etalon_filtered_pulse(zero, 0.0), ParameterError);
}

TEST(EtalonFilter, PropertyCausal) {
  const TimeGrid grid = default_grid();
  const auto rect = square_pulse(grid, 100.0_ps, 130.0_ps, 15.0_ps, 15.0_ps, 1.0);
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> pick(400, grid.n - 2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t k = pick(rng);
    std::vector<double> v = rect.values();
    for (std::size_t i = k; i < v.size(); ++i) v[i] += 0.05;
    const PulseEnvelope perturbed(grid, v, rect.meta());
    const auto a = etalon_filtered_pulse(rect, 600e6);
    const auto b = etalon_filtered_pulse(perturbed, 600e6);
    // The perturbation stays below the peak, so the normalization is unchanged.
    ASSERT_EQ(a.values().size(), b.values().size());
    for (std::size_t i = 0; i + 1 < k; ++i) EXPECT_EQ(a.values()[i], b.values()[i]);
    EXPECT_NE(a.values()[k + 1], b.values()[k + 1]);
  }
}

TEST(PowerToRabi, SquareRootLaw) {
  const PowerCalibration cal(2.0e9);
  EXPECT_EQ(power_to_rabi(0.0, cal), 0.0);
  EXPECT_NEAR(power_to_rabi(4e-9, cal), 2.0 * power_to_rabi(1e-9, cal), 1e-6);
  EXPECT_THROW(power_to_rabi(-1.0, cal), ParameterError);
  EXPECT_THROW(PowerCalibration(0.0), ParameterError);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double a = u(rng), p = u(rng) * 1e-9;
    EXPECT_NEAR(power_to_rabi(a * a * p, cal), a * power_to_rabi(p, cal), 1e-9 * (1.0 + a * power_to_rabi(p, cal)));
  }
}

TEST(LoadEnvelope, TwoSampleRectangle) {
  const TimeGrid grid = default_grid();
  const auto env = load_envelope({{100e-12, 1.0}, {230e-12, 1.0}}, grid, 1.0_GHz);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double t = grid.time(i);
    const bool inside = t >= 100e-12 - 1e-18 && t <= 230e-12 + 1e-18;
    EXPECT_DOUBLE_EQ(env.values()[i], inside ? 1.0_GHz : 0.0) << "t = " << t;
  }
}

TEST(LoadEnvelope, TriangleBecomesSquareRoot) {
  const TimeGrid grid = default_grid();
  const auto env = load_envelope({{0.1e-9, 0.0}, {0.6e-9, 1.0}, {1.1e-9, 0.0}}, grid, 2.0_GHz);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double t = grid.time(i);
    double tri = 0.0;
    if (t >= 0.1e-9 && t <= 1.1e-9) tri = 1.0 - std::abs(t - 0.6e-9) / 0.5e-9;
    EXPECT_NEAR(env.values()[i], 2.0_GHz * std::sqrt(std::max(tri, 0.0)), 1e-6 * 2.0_GHz);
  }
  EXPECT_NEAR(env.max_value(), 2.0_GHz, 1e-6);
}

TEST(LoadEnvelope, FormatErrors) {
  EXPECT_THROW(load_envelope({}, default_grid(), 1.0), FormatError);
  EXPECT_THROW(load_envelope({{1e-10, 1.0}, {0.5e-10, 1.0}}, default_grid(), 1.0), FormatError);
  EXPECT_THROW(load_envelope({{1e-10, -1.0}, {2e-10, 1.0}}, default_grid(), 1.0), FormatError);
  EXPECT_THROW(parse_envelope_text("# only a comment\n"), FormatError);
  EXPECT_THROW(parse_envelope_text("0.1 1.0 3.0\n"), FormatError);
  EXPECT_THROW(parse_envelope_text("0.1 abc\n"), FormatError);
}

TEST(LoadEnvelope, ParsesCommentedText) {
  const auto s = parse_envelope_text("# time_ns intensity\n\n0.1 0\n  0.2\t1.0\n# trailing\n0.3 0\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[1].t, 0.2e-9);
  EXPECT_DOUBLE_EQ(s[1].intensity, 1.0);
}

TEST(Envelopes, PropertyNonNegativeFinite) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const TimeGrid grid = default_grid();
  for (int trial = 0; trial < 30; ++trial) {
    const double rise = 40e-12 * u(rng), fall = 40e-12 * u(rng);
    const double dur = 50e-12 + 1e-9 * u(rng);
    const double start = 10e-12 + 0.5e-9 * u(rng);
    const auto sq = square_pulse(grid, start, dur, rise, fall, units::ghz_to_rad(2.0 * u(rng)));
    const auto et = etalon_filtered_pulse(sq, 1e8 + 2e9 * u(rng));
    for (const auto* e : {&sq, &et}) {
      for (double v : e->values()) {
        EXPECT_TRUE(std::isfinite(v));
        EXPECT_GE(v, 0.0);
      }
      EXPECT_EQ(e->values().front(), 0.0);
      EXPECT_NEAR(e->max_value(), e->meta().peak_rabi, 1e-9 * (1.0 + e->meta().peak_rabi));
    }
  }
}

}  // namespace
}  // namespace qdsaw
