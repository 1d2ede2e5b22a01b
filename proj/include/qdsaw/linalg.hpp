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

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qdsaw/errors.hpp"

namespace qdsaw {

using cplx = std::complex<double>;

/// Dense 2x2 complex matrix, row-major. Basis ordering is (|g>, |e>).
class Mat2 {
 public:
  constexpr Mat2() = default;
  constexpr Mat2(cplx a00, cplx a01, cplx a10, cplx a11) : a_{a00, a01, a10, a11} {}

  static constexpr Mat2 zero() { return {}; }
  static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static constexpr Mat2 diag(cplx d0, cplx d1) { return {d0, 0.0, 0.0, d1}; }

  constexpr cplx& operator()(std::size_t r, std::size_t c) { return a_[2 * r + c]; }
  constexpr const cplx& operator()(std::size_t r, std::size_t c) const { return a_[2 * r + c]; }
  constexpr const std::array<cplx, 4>& data() const { return a_; }

  constexpr Mat2& operator+=(const Mat2& o) {
    for (std::size_t i = 0; i < 4; ++i) a_[i] += o.a_[i];
    return *this;
  }
  constexpr Mat2& operator-=(const Mat2& o) {
    for (std::size_t i = 0; i < 4; ++i) a_[i] -= o.a_[i];
    return *this;
  }
  constexpr Mat2& operator*=(cplx s) {
    for (auto& x : a_) x *= s;
    return *this;
  }

  friend constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
  friend constexpr Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
  friend constexpr Mat2 operator*(Mat2 a, cplx s) { return a *= s; }
  friend constexpr Mat2 operator*(cplx s, Mat2 a) { return a *= s; }
  friend constexpr Mat2 operator*(double s, Mat2 a) { return a *= cplx(s); }
  friend constexpr Mat2 operator*(const Mat2& x, const Mat2& y) {
    return {x(0, 0) * y(0, 0) + x(0, 1) * y(1, 0), x(0, 0) * y(0, 1) + x(0, 1) * y(1, 1),
            x(1, 0) * y(0, 0) + x(1, 1) * y(1, 0), x(1, 0) * y(0, 1) + x(1, 1) * y(1, 1)};
  }
  friend constexpr bool operator==(const Mat2&, const Mat2&) = default;

  constexpr Mat2 adjoint() const {
    return {std::conj(a_[0]), std::conj(a_[2]), std::conj(a_[1]), std::conj(a_[3])};
  }
  constexpr cplx trace() const { return a_[0] + a_[3]; }

  double max_abs_diff(const Mat2& o) const {
    double m = 0.0;
    for (std::size_t i = 0; i < 4; ++i) m = std::max(m, std::abs(a_[i] - o.a_[i]));
    return m;
  }
  bool is_hermitian(double tol = 1e-12) const { return max_abs_diff(adjoint()) <= tol; }

 private:
  std::array<cplx, 4> a_{};
};

inline cplx trace_product(const Mat2& a, const Mat2& b) {
  return a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0) + a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1);
}

inline Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

/// Pauli algebra in the (|g>, |e>) basis. sigma_z = |e><e| - |g><g| puts the
/// ground state at the south pole, and sigma_minus = (sigma_x + i sigma_y) / 2
/// is the lowering operator |g><e|.
namespace pauli {
inline constexpr Mat2 sx() { return {0.0, 1.0, 1.0, 0.0}; }
inline constexpr Mat2 sy() { return {0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0}; }
inline constexpr Mat2 sz() { return Mat2::diag(-1.0, 1.0); }
inline constexpr Mat2 sm() { return {0.0, 1.0, 0.0, 0.0}; }
inline constexpr Mat2 sp() { return {0.0, 0.0, 1.0, 0.0}; }
inline constexpr Mat2 proj_g() { return Mat2::diag(1.0, 0.0); }
inline constexpr Mat2 proj_e() { return Mat2::diag(0.0, 1.0); }
}  // namespace pauli

struct BlochVector {
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;

  double norm() const { return std::sqrt(sx * sx + sy * sy + sz * sz); }
  friend bool operator==(const BlochVector&, const BlochVector&) = default;
};

/// Bloch components of an arbitrary 2x2 operator (no validation).
inline BlochVector bloch_components(const Mat2& m) {
  return {trace_product(m, pauli::sx()).real(), trace_product(m, pauli::sy()).real(),
          trace_product(m, pauli::sz()).real()};
}

/// Smallest eigenvalue of the Hermitian part of m.
inline double min_eigenvalue_hermitian(const Mat2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const cplx b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  const double half_gap = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
  return 0.5 * (a + d) - half_gap;
}

/// Unit-trace, Hermitian, positive 2x2 density matrix.
class DensityState {
 public:
  static constexpr double kTraceTol = 1e-9;
  static constexpr double kHermitianTol = 1e-12;
  static constexpr double kPositivityTol = 1e-9;

  /// Validating constructor.
  explicit DensityState(const Mat2& m) : m_(m) {
    if (std::abs(m.trace() - 1.0) > kTraceTol) throw ParameterError("density matrix trace != 1");
    if (!m.is_hermitian(kHermitianTol)) throw ParameterError("density matrix is not Hermitian");
    if (min_eigenvalue_hermitian(m) < -kPositivityTol) throw ParameterError("density matrix is not positive");
  }

  /// Wraps an integrator output without checks; callers own the invariants.
  static DensityState unchecked(const Mat2& m) { return DensityState(m, Unchecked{}); }

  static DensityState ground() { return unchecked(pauli::proj_g()); }
  static DensityState excited() { return unchecked(pauli::proj_e()); }
  static DensityState maximally_mixed() { return unchecked(Mat2::diag(0.5, 0.5)); }
  /// Pure state a|g> + b|e>, normalized.
  static DensityState pure(cplx a, cplx b) {
    const double n = std::norm(a) + std::norm(b);
    if (n <= 0.0) throw ParameterError("zero state vector");
    a /= std::sqrt(n);
    b /= std::sqrt(n);
    return unchecked({a * std::conj(a), a * std::conj(b), b * std::conj(a), b * std::conj(b)});
  }

  const Mat2& matrix() const { return m_; }

 private:
  struct Unchecked {};
  DensityState(const Mat2& m, Unchecked) : m_(m) {}
  Mat2 m_;
};

/// Tr(op rho).
inline cplx expectation(const Mat2& op, const DensityState& rho) { return trace_product(op, rho.matrix()); }

/// (<sigma_x>, <sigma_y>, <sigma_z>). Rejects states whose trace is off by more than 1e-6.
inline BlochVector bloch_vector(const DensityState& rho) {
  if (std::abs(rho.matrix().trace() - 1.0) > 1e-6) throw ParameterError("bloch_vector: trace deviates from 1");
  return bloch_components(rho.matrix());
}

/// Excited-state population rho_ee = (1 + <sigma_z>) / 2.
inline double occupancy(const DensityState& rho) {
  if (std::abs(rho.matrix().trace() - 1.0) > 1e-6) throw ParameterError("occupancy: trace deviates from 1");
  return rho.matrix()(1, 1).real();
}

/// Collapse channel C = sqrt(rate) * op.
struct CollapseChannel {
  double rate = 0.0;  // rad/s
  Mat2 op;
};

inline void validate_channels(std::span<const CollapseChannel> channels) {
  for (const auto& c : channels) {
    if (!(c.rate >= 0.0)) throw ParameterError("collapse rate must be non-negative");
  }
}

/// Lindblad generator applied to any 2x2 operator (density matrix or not):
/// -i[H, x] + sum_n rate_n (L x L^+ - (L^+L x + x L^+L) / 2).
/// Rates are not validated here; the solver validates once per run.
inline Mat2 lindblad_apply(const Mat2& h, std::span<const CollapseChannel> channels, const Mat2& x) {
  Mat2 out = cplx(0.0, -1.0) * commutator(h, x);
  for (const auto& c : channels) {
    if (c.rate == 0.0) continue;
    const Mat2 ld = c.op.adjoint();
    const Mat2 ldl = ld * c.op;
    out += c.rate * (c.op * x * ld - 0.5 * (ldl * x + x * ldl));
  }
  return out;
}

/// d rho / dt of the Lindblad master equation. Output is traceless and Hermitian.
inline Mat2 lindblad_rhs(const Mat2& h, std::span<const CollapseChannel> channels, const DensityState& rho) {
  validate_channels(channels);
  return lindblad_apply(h, channels, rho.matrix());
}

/// 4x4 complex matrix acting on row-major-vectorized 2x2 operators.
/// Used for one-period propagators of the periodically driven system.
class Mat4 {
 public:
  cplx& operator()(std::size_t r, std::size_t c) { return a_[4 * r + c]; }
  const cplx& operator()(std::size_t r, std::size_t c) const { return a_[4 * r + c]; }

  static Mat4 identity() {
    Mat4 m;
    for (std::size_t i = 0; i < 4; ++i) m(i, i) = 1.0;
    return m;
  }

  /// Column j holds the image of the j-th basis operator E_j.
  static Mat4 from_columns(const std::array<Mat2, 4>& images) {
    Mat4 m;
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t i = 0; i < 4; ++i) m(i, j) = images[j].data()[i];
    return m;
  }

 private:
  std::array<cplx, 16> a_{};
};

inline std::array<cplx, 4> vec(const Mat2& m) { return m.data(); }
inline Mat2 unvec(const std::array<cplx, 4>& v) { return {v[0], v[1], v[2], v[3]}; }

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline std::array<cplx, 4> solve(Mat4 a, std::array<cplx, 4> b) {
  for (std::size_t k = 0; k < 4; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < 4; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) < 1e-300) throw NumericalError("singular 4x4 system");
    if (piv != k) {
      for (std::size_t j = 0; j < 4; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < 4; ++i) {
      const cplx f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < 4; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  std::array<cplx, 4> x{};
  for (std::size_t k = 4; k-- > 0;) {
    cplx s = b[k];
    for (std::size_t j = k + 1; j < 4; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

}  // namespace qdsaw
