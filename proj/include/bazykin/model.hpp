#pragma once

// Dimensional and nondimensional ratio-dependent Bazykin predator-prey model.
//
//   du/dt = u (1 - u) (u + v) - Q u v         = u W(u, v)
//   dv/dt = C u v - v (u + v) (M + N v)       = v R(u, v)
//
// Everything in this header is a pure function of its arguments.

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "bazykin/errors.hpp"

namespace bazykin {

// Seven rates of the original model: prey growth r, carrying capacity K,
// predation rate q, half-saturation prey level a, conversion efficiency c,
// predator death rates mu0 (per capita) and mu1 (density).
struct DimensionalParams {
  double r = 1, K = 1, q = 1, a = 1, c = 1, mu0 = 1, mu1 = 1;

  bool operator==(const DimensionalParams&) const = default;
};

struct Params {
  double C = 0;  // conversion efficiency
  double M = 0;  // scaled predator death rate
  double N = 0;  // scaled density-dependent death rate
  double Q = 0;  // scaled predation rate

  bool operator==(const Params&) const = default;

  // Throws DomainError unless all four are strictly positive and finite.
  void validate() const {
    auto ok = [](double x) { return std::isfinite(x) && x > 0; };
    if (!ok(C) || !ok(M) || !ok(N) || !ok(Q))
      throw DomainError("parameters C, M, N, Q must be positive and finite");
  }
};

struct State {
  double u = 0;
  double v = 0;

  bool operator==(const State&) const = default;
  State& operator+=(const State& o) { u += o.u; v += o.v; return *this; }
  State& operator-=(const State& o) { u -= o.u; v -= o.v; return *this; }
  State& operator*=(double s) { u *= s; v *= s; return *this; }
};

inline State operator+(State a, const State& b) { return a += b; }
inline State operator-(State a, const State& b) { return a -= b; }
inline State operator*(double s, State a) { return a *= s; }
inline State operator*(State a, double s) { return a *= s; }

inline double norm(const State& s) { return std::hypot(s.u, s.v); }
inline double max_norm(const State& s) { return std::max(std::abs(s.u), std::abs(s.v)); }
inline double distance(const State& a, const State& b) { return norm(a - b); }
inline double dot(const State& a, const State& b) { return a.u * b.u + a.v * b.v; }

// Row-major 2x2 matrix.
template <typename Real = double>
struct Mat2 {
  Real a11 = 0, a12 = 0, a21 = 0, a22 = 0;

  Real trace() const { return a11 + a22; }
  Real det() const { return a11 * a22 - a12 * a21; }
  Real max_abs() const {
    using std::abs;
    return std::max(std::max(abs(a11), abs(a12)), std::max(abs(a21), abs(a22)));
  }
  Mat2 operator*(const Mat2& b) const {
    return {a11 * b.a11 + a12 * b.a21, a11 * b.a12 + a12 * b.a22,
            a21 * b.a11 + a22 * b.a21, a21 * b.a12 + a22 * b.a22};
  }
  State apply(const State& s) const {
    return {static_cast<double>(a11 * s.u + a12 * s.v), static_cast<double>(a21 * s.u + a22 * s.v)};
  }
  bool operator==(const Mat2&) const = default;
};

using Matrix2 = Mat2<double>;

// Eigenvalues of a real 2x2 matrix, ordered by real part (then imaginary part).
inline std::array<std::complex<double>, 2> eigenvalues(const Matrix2& m) {
  const double half_tr = 0.5 * m.trace();
  const double disc = half_tr * half_tr - m.det();
  if (disc >= 0) {
    const double s = std::sqrt(disc);
    // Avoid cancellation in the smaller root.
    const double big = half_tr + (half_tr >= 0 ? s : -s);
    const double small = big != 0 ? m.det() / big : 0.0;
    const double lo = std::min(big, small), hi = std::max(big, small);
    return {std::complex<double>(lo, 0), std::complex<double>(hi, 0)};
  }
  const double im = std::sqrt(-disc);
  return {std::complex<double>(half_tr, -im), std::complex<double>(half_tr, im)};
}

// Unit eigenvector for a real eigenvalue, first nonzero component positive.
inline State eigenvector(const Matrix2& m, double lambda) {
  // Use the row of (A - lambda I) with the larger norm.
  const double r1u = m.a11 - lambda, r1v = m.a12;
  const double r2u = m.a21, r2v = m.a22 - lambda;
  State e;
  if (std::hypot(r1u, r1v) >= std::hypot(r2u, r2v))
    e = {-r1v, r1u};
  else
    e = {-r2v, r2u};
  const double n = norm(e);
  if (n == 0) return {1, 0};
  e *= 1.0 / n;
  if (e.u < 0 || (e.u == 0 && e.v < 0)) e *= -1.0;
  return e;
}

inline Params nondimensionalize(const DimensionalParams& p) {
  auto ok = [](double x) { return std::isfinite(x) && x > 0; };
  if (!ok(p.r) || !ok(p.K) || !ok(p.q) || !ok(p.a) || !ok(p.c) || !ok(p.mu0) || !ok(p.mu1))
    throw DomainError("dimensional parameters must be positive and finite");
  return {p.c / p.r, p.mu0 / p.r, p.mu1 * p.K / (p.a * p.r), p.q / (p.a * p.r)};
}

// Right-hand side, templated so extended-precision callers can reuse it.
template <typename Real>
inline std::array<Real, 2> vector_field(Real C, Real M, Real N, Real Q, Real u, Real v) {
  const Real du = u * (1 - u) * (u + v) - Q * u * v;
  const Real dv = C * u * v - v * (u + v) * (M + N * v);
  return {du, dv};
}

inline State vector_field(const Params& p, const State& s) {
  const auto f = vector_field<double>(p.C, p.M, p.N, p.Q, s.u, s.v);
  return {f[0], f[1]};
}

// Symbolic Jacobian of the nondimensional field.
inline Matrix2 jacobian(const Params& p, const State& s) {
  const double u = s.u, v = s.v;
  return {2 * u + v - p.Q * v - 2 * u * v - 3 * u * u,
          -u * (p.Q + u - 1),
          -v * (p.M - p.C + p.N * v),
          p.C * u - 3 * p.N * v * v - p.M * u - 2 * p.M * v - 2 * p.N * u * v};
}

// Factors W and R with du/dt = u W and dv/dt = v R.
inline double prey_factor(const Params& p, const State& s) {
  return (1 - s.u) * (s.u + s.v) - p.Q * s.v;
}
inline double predator_factor(const Params& p, const State& s) {
  return p.C * s.u - (s.u + s.v) * (p.M + p.N * s.v);
}

inline constexpr double kPoleGuard = 1e-12;

// Interior prey nullcline v = u (1 - u) / (Q - 1 + u).
inline double prey_nullcline(const Params& p, double u) {
  const double den = p.Q - 1 + u;
  if (std::abs(den) < kPoleGuard)
    throw DomainError("prey nullcline has a pole at u = 1 - Q");
  return u * (1 - u) / den;
}

// Interior predator nullcline: nonnegative root of N v^2 + (M + N u) v - (C - M) u = 0.
inline double predator_nullcline(const Params& p, double u) {
  if (u < 0) throw DomainError("predator nullcline requires u >= 0");
  const double b = p.M + p.N * u;
  const double c = (p.C - p.M) * u;  // = -constant term
  // Stable form of (-b + sqrt(b^2 + 4 N c)) / (2N).
  const double disc = b * b + 4 * p.N * c;
  if (disc < 0) throw DomainError("predator nullcline has no real branch here");
  const double s = std::sqrt(disc);
  if (b > 0) return 2 * c / (b + s);
  return (-b + s) / (2 * p.N);
}

}  // namespace bazykin
