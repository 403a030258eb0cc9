#pragma once

// Analytic bifurcation loci and test quantities: saddle-node locus and the
// Sotomayor check, the Hopf set in the equilibrium chart (U, V) with the
// first Lyapunov quantity and the Bautin point, and the Bogdanov-Takens
// point with its genericity constants.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "bazykin/equilibria.hpp"
#include "bazykin/errors.hpp"
#include "bazykin/model.hpp"

namespace bazykin {

// ---------------------------------------------------------------- saddle-node

// Q at which P1 and P2 collide for the given (C, M, N).
inline double saddle_node_Q(double C, double M, double N) {
  if (!(C > M)) throw DomainError("saddle-node locus needs C > M");
  if (!(M > 0) || !(N > 0)) throw DomainError("M and N must be positive");
  return (M * M + 4 * C * N - 2 * M * N + N * N) / (4 * N * (C - M));
}

struct SotomayorResult {
  double wfc = 0;   // transversality in C
  double quad = 0;  // quadratic coefficient along the kernel direction
  bool nondegenerate = false;

  bool operator==(const SotomayorResult&) const = default;
};

inline SotomayorResult sotomayor_check(const Params& p, std::optional<double> band = std::nullopt) {
  const SigmaSet s = sigma_delta(p);
  if (!(std::abs(s.delta) < band.value_or(collapsed_band(p))))
    throw PreconditionError("Sotomayor check needs Delta = 0");
  const double C = p.C, M = p.M, N = p.N, Q = p.Q;
  const double den = C + N * Q;
  SotomayorResult r;
  r.wfc = -s.sigma1 * s.sigma3 / (4 * N * den * den);
  r.quad = C - 3 * M - 10 * N + 4 * N * (Q + 7) * (C - M) * (C - M) / ((M + N) * (M + N));
  r.nondegenerate = std::abs(r.wfc) > 1e-12 && std::abs(r.quad) > 1e-12;
  return r;
}

// ---------------------------------------------------------------- Hopf chart

// Trace factor: trace of the chart Jacobian equals V * hopf_T.
inline double hopf_T(double C, double M, double U, double V) {
  return M * (U + V) * (U + V) - C * U * (U + 2 * V) - U * (U + V) * (-1 + 2 * U + V);
}

// Determinant factor: det of the chart Jacobian equals U V^2 (U+V)^2 hopf_D.
inline double hopf_D(double C, double M, double U, double V) {
  return C * U * (-1 + 2 * U + 2 * V) + M * (U - 2 * U * U + V - 3 * U * V - V * V);
}

// M on the set hopf_T = 0.
inline double hopf_M(double C, double U, double V) {
  if (!(U + V > 0)) throw DomainError("hopf_M needs U + V > 0");
  const double s = U + V;
  return C * U * (U + 2 * V) / (s * s) + U * (-1 + 2 * U + V) / s;
}

// hopf_D restricted to hopf_T = 0.
inline double hopf_DH(double C, double U, double V) {
  return -U - 4 * U * U * U + C * V - (C - 6) * U * V - (V - 1) * (V - 1) * V - 5 * U * V * V -
         U * U * (8 * V - 4);
}

// Jacobian at (U, V) of the model rescaled by V (U+V), parametrised by its
// own equilibrium.
inline Matrix2 hopf_chart_jacobian(double C, double M, double U, double V) {
  const double s = U + V;
  return {-U * V * s * (-1 + 2 * U + V), (U - 1) * s * U * U, C * V * V * V,
          V * (M * s * s - C * U * (U + 2 * V))};
}

inline bool in_lambda(double C, double M, double U, double V) {
  return C > 0 && M > 0 && U > 0 && V > 0 && U < 1 && C * U - M * (U + V) > 0;
}

// (U, V) -> (N, Q) such that (U, V) is an equilibrium of (C, M, N, Q).
inline std::pair<double, double> psi_map(double C, double M, double U, double V) {
  if (!in_lambda(C, M, U, V)) throw DomainError("(C, M, U, V) outside the admissible set");
  return {(C * U - M * (U + V)) / (V * (U + V)), (1 - U) * (U + V) / V};
}

enum class Criticality { Supercritical, Subcritical, Degenerate };

inline std::string_view to_string(Criticality c) {
  switch (c) {
    case Criticality::Supercritical: return "Supercritical";
    case Criticality::Subcritical: return "Subcritical";
    case Criticality::Degenerate: return "Degenerate";
  }
  return "?";
}

struct HopfData {
  double U = 0, V = 0;
  double M_hopf = 0;
  double D_H = 0;
  double w = 0;
  double l1 = 0;  // sign-carrying numerator
  double L1 = 0;  // U^3 l1 / (8 C (U+V) w^2)
  Criticality L1_sign = Criticality::Degenerate;
  int branch = 0;  // root of the quadratic in V the sample came from

  bool operator==(const HopfData&) const = default;
};

inline constexpr double kL1Degenerate = 1e-14;

// Numerator of the first Lyapunov quantity, evaluated in extended precision.
inline long double lyapunov_numerator(long double C, long double U, long double V) {
  using R = long double;
  const R U2 = U * U, U3 = U2 * U, U4 = U3 * U, U5 = U4 * U;
  const R V2 = V * V, V3 = V2 * V, V4 = V3 * V, V5 = V4 * V;
  const R s = U + V;
  const R t0 = -C * C * C * V4 * (-U + U2 - 2 * U * V - 2 * V2);
  const R t1 = -U * (1 - U) * s * s * s *
               (-2 * U3 + 4 * U4 + V - 9 * U * V + 20 * U2 * V - 10 * U3 * V - 6 * V2 + 28 * U * V2 - 28 * U2 * V2 +
                9 * V3 - 19 * U * V3 - 4 * V4);
  const R t2 = -C * C * V3 *
               (3 * U2 - 12 * U3 + 12 * U4 + 3 * U * V - 14 * U2 * V + 16 * U3 * V - 5 * U2 * V2 + 2 * U * V2 +
                4 * V3 - 13 * U * V3 - 4 * V4);
  const R t3 = C * V * s * s *
               (-2 * U4 + 2 * U5 + 3 * U * V - 21 * U2 * V + 41 * U3 * V - 27 * U4 * V - 10 * U * V2 +
                38 * U2 * V2 - 38 * U3 * V2 + 2 * V3 - 8 * U2 * V3 - 4 * V4 + 6 * U * V4 + 2 * V5);
  return t0 + t1 + t2 + t3;
}

inline HopfData lyapunov_l1(double C, double U, double V) {
  const double M = hopf_M(C, U, V);
  if (!in_lambda(C, M, U, V)) throw DomainError("(C, M_hopf, U, V) outside the admissible set");
  const double dh = hopf_DH(C, U, V);
  if (!(dh > 0)) throw PreconditionError("not a Hopf point: D_H <= 0");
  HopfData h;
  h.U = U;
  h.V = V;
  h.M_hopf = M;
  h.D_H = dh;
  h.w = V * (U + V) * std::sqrt(U * dh);
  h.l1 = static_cast<double>(lyapunov_numerator(C, U, V));
  h.L1 = U * U * U * h.l1 / (8 * C * (U + V) * h.w * h.w);
  h.L1_sign = std::abs(h.l1) < kL1Degenerate ? Criticality::Degenerate
              : h.l1 < 0                     ? Criticality::Supercritical
                                             : Criticality::Subcritical;
  return h;
}

struct HopfGrid {
  double u_lo = 1e-3;
  double u_hi = 0.999;
  int n = 2000;
};

namespace detail {

// Positive roots V of hopf_T(C, M, U, V) = 0 at fixed U (quadratic in V).
inline std::array<std::optional<double>, 2> hopf_V_roots(double C, double M, double U) {
  const double a = M - U;
  const double b = U * (2 * M - 2 * C - 3 * U + 1);
  const double c = U * U * (M - C - 2 * U + 1);
  std::array<std::optional<double>, 2> out;
  auto polish = [&](double v) {
    for (int i = 0; i < 2; ++i) {
      const double f = (a * v + b) * v + c, df = 2 * a * v + b;
      if (df == 0) break;
      v -= f / df;
    }
    return v;
  };
  if (std::abs(a) < 1e-300) {
    if (b != 0) out[0] = polish(-c / b);
  } else {
    const double disc = b * b - 4 * a * c;
    if (disc < 0) return out;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0 ? sq : -sq));
    double r1 = q / a, r2 = q != 0 ? c / q : -b / a;
    if (r1 > r2) std::swap(r1, r2);
    out[0] = polish(r2);  // upper root
    out[1] = polish(r1);
  }
  for (auto& r : out)
    if (r && !(*r > 0)) r.reset();
  return out;
}

inline std::optional<HopfData> hopf_sample(double C, double M, double U, int branch) {
  const auto roots = hopf_V_roots(C, M, U);
  if (!roots[branch]) return std::nullopt;
  const double V = *roots[branch];
  if (!in_lambda(C, M, U, V) || !(hopf_DH(C, U, V) > 0)) return std::nullopt;
  HopfData h = lyapunov_l1(C, U, V);
  if (!in_lambda(C, h.M_hopf, U, V)) return std::nullopt;
  h.branch = branch;
  return h;
}

}  // namespace detail

// Samples of the Hopf set T = 0 inside the admissible region with D_H > 0,
// ordered by branch, then by U.
inline std::vector<HopfData> hopf_curve_UV(double C, double M, const HopfGrid& grid = {}) {
  if (!(C > 0) || !(M > 0)) throw DomainError("C and M must be positive");
  if (!(grid.u_lo > 0 && grid.u_hi < 1 && grid.u_lo < grid.u_hi && grid.n >= 2))
    throw DomainError("Hopf grid must lie inside (0, 1)");
  std::vector<HopfData> out;
  for (int branch = 0; branch < 2; ++branch) {
    for (int i = 0; i < grid.n; ++i) {
      const double U = grid.u_lo + (grid.u_hi - grid.u_lo) * i / (grid.n - 1);
      if (auto h = detail::hopf_sample(C, M, U, branch)) out.push_back(*h);
    }
  }
  return out;
}

// Point of the Hopf set where l1 changes sign.
inline HopfData bautin_point(double C, double M, const HopfGrid& grid = {}) {
  const auto curve = hopf_curve_UV(C, M, grid);
  const double du = (grid.u_hi - grid.u_lo) / (grid.n - 1);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const HopfData& a = curve[i - 1];
    const HopfData& b = curve[i];
    if (a.branch != b.branch || b.U - a.U > 1.5 * du) continue;
    if ((a.l1 < 0) == (b.l1 < 0)) continue;
    double lo = a.U, hi = b.U;
    const bool lo_neg = a.l1 < 0;
    HopfData mid = a;
    for (int it = 0; it < 200; ++it) {
      const double m = 0.5 * (lo + hi);
      auto h = detail::hopf_sample(C, M, m, a.branch);
      if (!h) throw NotFoundError("Hopf branch lost during Bautin bisection");
      mid = *h;
      if (std::abs(mid.l1) < 1e-13 || hi - lo < 1e-15) break;
      if ((mid.l1 < 0) == lo_neg)
        lo = m;
      else
        hi = m;
    }
    return mid;
  }
  throw NotFoundError("no sign change of l1 along the Hopf set");
}

// Increasing sample of [lo, hi]: uniform points plus points accumulating
// geometrically at hi, where near the cusp the loci crowd together.
inline std::vector<double> scan_points(double lo, double hi, int uniform, int per_decade = 4, int decades = 10) {
  std::vector<double> q;
  for (int i = 0; i <= uniform; ++i) q.push_back(lo + (hi - lo) * i / uniform);
  for (int k = 1; k <= per_decade * decades; ++k)
    q.push_back(hi - (hi - lo) * std::pow(10.0, -static_cast<double>(k) / per_decade));
  std::sort(q.begin(), q.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  return q;
}

// Hopf point in the (Q, C) chart: Q in [Q_lo, Q_hi] where trace J(P2) = 0.
// The sign change closest to Q_hi is returned.
inline double hopf_Q(double C, double M, double N, double Q_lo, double Q_hi, int samples = 400) {
  if (!(Q_lo < Q_hi)) throw DomainError("empty Q bracket");
  auto trace_at = [&](double Q) -> std::optional<double> {
    const Params p{C, M, N, Q};
    const auto p2 = find_p2(p);
    if (!p2) return std::nullopt;
    return jacobian(p, *p2).trace();
  };
  const auto qs = scan_points(Q_lo, Q_hi, samples);
  std::optional<double> t_next;
  for (std::size_t i = qs.size(); i-- > 0;) {
    const auto t = trace_at(qs[i]);
    if (t && t_next && (*t < 0) != (*t_next < 0)) {
      std::uintmax_t iters = 200;
      auto f = [&](double x) {
        const auto v = trace_at(x);
        if (!v) throw NotFoundError("P2 vanished inside the Hopf bracket");
        return *v;
      };
      const auto r = boost::math::tools::toms748_solve(f, qs[i], qs[i + 1], *t, *t_next,
                                                       boost::math::tools::eps_tolerance<double>(52), iters);
      return 0.5 * (r.first + r.second);
    }
    t_next = t;
  }
  throw NotFoundError("trace of J(P2) does not change sign in the bracket");
}

// ------------------------------------------------------ Bogdanov-Takens point

inline double bt_critical_Q(double C, double M, double N) { return saddle_node_Q(C, M, N); }

struct BTData {
  double C_star = 0, Q_star = 0;
  State E_point;
  double z1 = 0, z2 = 0;
  double G1 = 0, G2 = 0, G3 = 0, G4 = 0;
  double det_dpsi = 0;  // determinant of d(X, trace, det)/d(u, v, C, Q) at E
  double a20 = 0, b20 = 0, b11 = 0;
  int nf_sign = 0;  // sign of b20 (a20 + b11)
  Matrix2 jacobian;

  bool operator==(const BTData&) const = default;
};

namespace detail {

inline double det4(std::array<std::array<double, 4>, 4> a) {
  double d = 1;
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (a[piv][c] == 0) return 0;
    if (piv != c) {
      std::swap(a[piv], a[c]);
      d = -d;
    }
    d *= a[c][c];
    for (int r = c + 1; r < 4; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 4; ++k) a[r][k] -= f * a[c][k];
    }
  }
  return d;
}

// Jacobian of (X1, X2, trace J, det J) with respect to (u, v, C, Q).
inline std::array<std::array<double, 4>, 4> dpsi_matrix(double u, double v, double C, double M, double N, double Q) {
  const double j11 = 2 * u + v - Q * v - 2 * u * v - 3 * u * u;
  const double j12 = -u * (Q + u - 1);
  const double j21 = -v * (M - C + N * v);
  const double j22 = C * u - 3 * N * v * v - M * u - 2 * M * v - 2 * N * u * v;
  // partials of the Jacobian entries, order (u, v, C, Q)
  const std::array<double, 4> d11{2 - 2 * v - 6 * u, 1 - Q - 2 * u, 0, -v};
  const std::array<double, 4> d12{-(Q + 2 * u - 1), 0, 0, -u};
  const std::array<double, 4> d21{0, -(M - C + 2 * N * v), v, 0};
  const std::array<double, 4> d22{C - M - 2 * N * v, -6 * N * v - 2 * M - 2 * N * u, u, 0};
  std::array<std::array<double, 4>, 4> m{};
  m[0] = {j11, j12, 0, -u * v};
  m[1] = {j21, j22, u * v, 0};
  for (int k = 0; k < 4; ++k) {
    m[2][k] = d11[k] + d22[k];
    m[3][k] = d11[k] * j22 + j11 * d22[k] - d12[k] * j21 - j12 * d21[k];
  }
  return m;
}

// Symmetric second derivative B(h, k) of the field at (u, v).
inline State second_derivative(const Params& p, const State& s, const State& h, const State& k) {
  const double f1uu = 2 - 6 * s.u - 2 * s.v, f1uv = 1 - 2 * s.u - p.Q;
  const double f2uv = p.C - p.M - 2 * p.N * s.v, f2vv = -2 * p.M - 2 * p.N * s.u - 6 * p.N * s.v;
  return {f1uu * h.u * k.u + f1uv * (h.u * k.v + h.v * k.u),
          f2uv * (h.u * k.v + h.v * k.u) + f2vv * h.v * k.v};
}

}  // namespace detail

inline BTData bt_point(double M, double N) {
  if (!(M > 0) || !(N > 0)) throw DomainError("M and N must be positive");
  if (!(M < N)) throw DomainError("Bogdanov-Takens point requires M < N");
  BTData bt;
  const double A = -8 * M * N * N - (1 - N) * (M + N) * (M + N);
  const double w2 = std::sqrt(16 * M * N * N * N * (M - N) * (M - N) + A * A);
  const double Cs = (-A + w2) / (8 * N * N);
  const double Qs = saddle_node_Q(Cs, M, N);
  bt.C_star = Cs;
  bt.Q_star = Qs;
  const Params p{Cs, M, N, Qs};
  const SigmaSet s = sigma_delta(p);
  const double den = Cs + N * Qs;
  const double uE = -s.sigma1 / (2 * den), vE = -s.sigma3 / (2 * N * den);
  bt.E_point = {uE, vE};
  bt.jacobian = jacobian(p, bt.E_point);

  const double w1 = (1 + N) * (M + N) * (M + N);
  const double M2 = M * M, M3 = M2 * M, N2 = N * N, N3 = N2 * N;
  const double w3 = M3 * (M * (-1 + N) * (-1 + N) + 4 * N * (1 + N)) + 2 * M * N * (1 + N) * (2 * N2 + w2) -
                    (N - 1) * N2 * (N2 - N3 + w2) - M2 * (2 * N2 * (-3 - 6 * N + N2) - w2 + N * w2);
  if (w3 == 0) throw NonGenericError("kernel vector denominator w3 vanishes");
  bt.z1 = 4 * N3 / w3 * (w1 + w2);
  const double j12 = M2 - 2 * M * N + N * (4 * Cs + N);
  const double z2den = (Cs - M) * (M - N) * j12;
  if (z2den == 0) throw NonGenericError("generalised eigenvector denominator (C*-M)(M-N)J12 vanishes");
  bt.z2 = (2 * N * (2 * Cs - M + N) * (2 * Cs - M + N) + 4 * Cs * (Cs - M) * (Cs - M) * (M - N)) / z2den;
  const double z1 = bt.z1, z2 = bt.z2;

  {
    const double Z = (M + N) * std::sqrt(M2 * (N - 1) * (N - 1) + (N - 1) * (N - 1) * N2 + 2 * M * N * (1 + 6 * N + N2));
    const double N4 = N3 * N, N5 = N4 * N, N6 = N5 * N;
    const double M4 = M3 * M, M5 = M4 * M;
    const double body = M5 * std::pow(-1 + N, 3) * (-1 + 3 * N) + M4 * N * (5 - 4 * N - 18 * N2 + 4 * N3 + 13 * N4) +
                        N3 * (1 + N - 9 * N2 + 7 * N3) * (N2 - N3 + Z) +
                        M * N2 * (1 + N) * (1 + N) * (5 * N2 + 4 * N3 - 17 * N4 + 3 * Z + 3 * N * Z) -
                        M2 * N * (-44 * N4 + 20 * N5 + 6 * N6 - 3 * Z - 3 * N * Z + N3 * (-36 + 7 * Z) + N2 * (-10 + 7 * Z)) -
                        M3 * (5 * N * Z - 8 * N4 - 40 * N5 - 14 * N6 - Z + 3 * N3 * (Z - 8) - N2 * (10 + 7 * Z));
    const double g1den = N * std::pow(N2 - M2 * (N - 1) + 3 * N3 + 2 * M * N * (1 + N) + Z, 5);
    bt.G1 = 2 * std::pow(M - N, 5) * std::pow(M + N, 4) * body / g1den;
  }
  bt.det_dpsi = detail::det4(detail::dpsi_matrix(uE, vE, Cs, M, N, Qs));

  bt.G2 = Qs - 1 - M + 2 * uE - N * uE - z2 + Cs * z1 - M * z1 + 3 * uE * z1 - 3 * N * vE + z1 * vE - 2 * N * z1 * vE;
  bt.G3 = 2 * uE - 1 + Qs + 2 * N * uE - 2 * z1 - Cs * z1 + 6 * uE * z1 + M * (2 + z1) + 6 * N * vE + 2 * vE * z1 +
          2 * N * vE * z1;
  bt.G4 = z1 * z2 - 1;

  // Quadratic coefficients of P^{-1} Y(P x), scaled by z1 z2 - 1, with
  // P = [(z1, 1), (1, z2)]; (z1 z2 - 1) P^{-1} = [[z2, -1], [-1, z1]].
  const State p1{z1, 1}, p2{1, z2};
  const State q = 0.5 * detail::second_derivative(p, bt.E_point, p1, p1);
  const State r = detail::second_derivative(p, bt.E_point, p1, p2);
  bt.a20 = z2 * q.u - q.v;
  bt.b20 = -q.u + z1 * q.v;
  bt.b11 = -r.u + z1 * r.v;
  const double nf = bt.b20 * (bt.a20 + bt.b11);
  bt.nf_sign = (nf > 0) - (nf < 0);

  for (const auto& [name, g] : {std::pair{"G1", bt.G1}, {"G2", bt.G2}, {"G3", bt.G3}, {"G4", bt.G4}})
    if (!(std::abs(g) >= 1e-10)) throw NonGenericError(std::string("degenerate Bogdanov-Takens point: ") + name + " vanishes");
  return bt;
}

}  // namespace bazykin
