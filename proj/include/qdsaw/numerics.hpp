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
#include <span>
#include <utility>
#include <vector>

#include "qdsaw/errors.hpp"

namespace qdsaw::numerics {

/// Golden-section minimization of a unimodal f on [a, b] down to bracket width tol.
/// Returns (argmin, f(argmin)).
inline std::pair<double, double> golden_section_min(const std::function<double(double)>& f, double a, double b,
                                                    double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
}

/// Value of a uniformly sampled series at time t by linear interpolation.
inline double interpolate(std::span<const double> y, double t0, double dt, double t) {
  if (y.empty()) throw ShapeError("interpolate: empty series");
  const double x = (t - t0) / dt;
  if (x <= 0.0) return y.front();
  const auto i = static_cast<std::size_t>(x);
  if (i + 1 >= y.size()) return y.back();
  const double f = x - static_cast<double>(i);
  return y[i] + f * (y[i + 1] - y[i]);
}

/// Centered running mean over `width` samples (odd width enforced); edges use
/// the available samples.
inline std::vector<double> running_mean(std::span<const double> y, std::size_t width) {
  if (width % 2 == 0) ++width;
  const std::size_t half = width / 2;
  std::vector<double> prefix(y.size() + 1, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) prefix[i + 1] = prefix[i] + y[i];
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(y.size(), i + half + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

/// Least-squares slope/intercept of y against x.
inline std::pair<double, double> linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InsufficientDataError("linear_fit: need >= 2 matched points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw AnalysisError("linear_fit: degenerate abscissa");
  const double slope = (n * sxy - sx * sy) / den;
  return {slope, (sy - slope * sx) / n};
}

}  // namespace qdsaw::numerics
