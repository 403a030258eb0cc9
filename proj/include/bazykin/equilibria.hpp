#pragma once

// Closed-form equilibria, the case analysis for the number of interior
// points, and stability classification of every equilibrium type,
// including the degenerate origin (via the blow-up eigenvalues).

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bazykin/errors.hpp"
#include "bazykin/model.hpp"

namespace bazykin {

// Numerical bands for conditions that are exact equalities in the algebra.
inline double delta_band(const Params& p) { return 1e-9 * std::max(1.0, (p.M - p.N) * (p.M - p.N)); }
inline constexpr double kSigma2Band = 1e-9;
inline constexpr double kTraceBand = 1e-9;
// Looser band accepted by operations whose precondition is Delta = 0, so that
// parameters quoted to four decimals still qualify.
inline double collapsed_band(const Params& p) { return 1e-4 * std::max(1.0, (p.M - p.N) * (p.M - p.N)); }

enum class CaseLabel {
  NoInterior_ClessM,
  OneInterior_Sigma2Neg,
  Collision_Sigma2Zero,
  NoInterior_DeltaNeg,
  DoubleRoot_DeltaZero,
  TwoInterior,
  NoInterior_NleM,
};

struct SigmaSet {
  double sigma1 = 0, sigma2 = 0, sigma3 = 0, delta = 0;
  CaseLabel case_label = CaseLabel::NoInterior_ClessM;

  bool operator==(const SigmaSet&) const = default;
};

enum class EquilibriumKind { Origin, CarryingCapacity, P1, P2, CollapsedE };

struct Equilibrium {
  State point;
  int multiplicity = 1;
  EquilibriumKind kind = EquilibriumKind::Origin;

  bool operator==(const Equilibrium&) const = default;
};

enum class StabilityTag {
  Saddle,
  StableNode,
  UnstableNode,
  StableFocus,
  UnstableFocus,
  WeakFocus,
  SaddleNodeAttractor,
  SaddleNodeRepeller,
  DegenerateOrigin,
};

enum class OriginSectors {
  SaddleRepelling_I,
  AttractingElliptic_II,
  Elliptic_III,
  Saddle_IV,
  AttractingSaddle_V,
  EllipticRepelling_VI,
};

struct StabilityClass {
  StabilityTag tag = StabilityTag::Saddle;
  std::optional<OriginSectors> origin_sectors;

  bool operator==(const StabilityClass&) const = default;
};

inline std::string_view to_string(CaseLabel c) {
  switch (c) {
    case CaseLabel::NoInterior_ClessM: return "NoInterior_ClessM";
    case CaseLabel::OneInterior_Sigma2Neg: return "OneInterior_Sigma2Neg";
    case CaseLabel::Collision_Sigma2Zero: return "Collision_Sigma2Zero";
    case CaseLabel::NoInterior_DeltaNeg: return "NoInterior_DeltaNeg";
    case CaseLabel::DoubleRoot_DeltaZero: return "DoubleRoot_DeltaZero";
    case CaseLabel::TwoInterior: return "TwoInterior";
    case CaseLabel::NoInterior_NleM: return "NoInterior_NleM";
  }
  return "?";
}

inline std::string_view to_string(EquilibriumKind k) {
  switch (k) {
    case EquilibriumKind::Origin: return "Origin";
    case EquilibriumKind::CarryingCapacity: return "CarryingCapacity";
    case EquilibriumKind::P1: return "P1";
    case EquilibriumKind::P2: return "P2";
    case EquilibriumKind::CollapsedE: return "CollapsedE";
  }
  return "?";
}

inline std::string_view to_string(StabilityTag t) {
  switch (t) {
    case StabilityTag::Saddle: return "Saddle";
    case StabilityTag::StableNode: return "StableNode";
    case StabilityTag::UnstableNode: return "UnstableNode";
    case StabilityTag::StableFocus: return "StableFocus";
    case StabilityTag::UnstableFocus: return "UnstableFocus";
    case StabilityTag::WeakFocus: return "WeakFocus";
    case StabilityTag::SaddleNodeAttractor: return "SaddleNodeAttractor";
    case StabilityTag::SaddleNodeRepeller: return "SaddleNodeRepeller";
    case StabilityTag::DegenerateOrigin: return "DegenerateOrigin";
  }
  return "?";
}

inline std::string_view to_string(OriginSectors s) {
  switch (s) {
    case OriginSectors::SaddleRepelling_I: return "SaddleRepelling_I";
    case OriginSectors::AttractingElliptic_II: return "AttractingElliptic_II";
    case OriginSectors::Elliptic_III: return "Elliptic_III";
    case OriginSectors::Saddle_IV: return "Saddle_IV";
    case OriginSectors::AttractingSaddle_V: return "AttractingSaddle_V";
    case OriginSectors::EllipticRepelling_VI: return "EllipticRepelling_VI";
  }
  return "?";
}

// Sigma quantities and the case label. `band` decides when Delta counts as zero.
inline SigmaSet sigma_delta(const Params& p, std::optional<double> band = std::nullopt) {
  p.validate();
  const double C = p.C, M = p.M, N = p.N, Q = p.Q;
  SigmaSet s;
  s.sigma2 = C * (Q - 1) - M * Q;
  s.sigma1 = 2 * s.sigma2 + Q * (M - N);
  s.sigma3 = -2 * N * s.sigma2 + C * (M - N);
  s.delta = (M - N) * (M - N) - 4 * N * s.sigma2;
  const double dband = band.value_or(delta_band(p));

  if (C <= M)
    s.case_label = CaseLabel::NoInterior_ClessM;
  else if (std::abs(s.sigma2) < kSigma2Band)
    s.case_label = CaseLabel::Collision_Sigma2Zero;
  else if (s.sigma2 < 0)
    s.case_label = CaseLabel::OneInterior_Sigma2Neg;
  else if (std::abs(s.delta) < dband)
    s.case_label = CaseLabel::DoubleRoot_DeltaZero;
  else if (s.delta < 0)
    s.case_label = CaseLabel::NoInterior_DeltaNeg;
  else if (N > M)
    s.case_label = CaseLabel::TwoInterior;
  else
    s.case_label = CaseLabel::NoInterior_NleM;
  return s;
}

namespace detail {

// Roots of the closed form; sign = +1 gives P2, -1 gives P1.
inline State closed_form_root(const Params& p, const SigmaSet& s, double sign) {
  const double den = p.C + p.N * p.Q;
  const double sq = std::sqrt(std::max(0.0, s.delta));
  return {(-s.sigma1 + sign * p.Q * sq) / (2 * den), (-s.sigma3 + sign * p.C * sq) / (2 * p.N * den)};
}

}  // namespace detail

inline std::vector<Equilibrium> interior_equilibria(const Params& p, std::optional<double> band = std::nullopt) {
  const SigmaSet s = sigma_delta(p, band);
  std::vector<Equilibrium> out;
  switch (s.case_label) {
    case CaseLabel::OneInterior_Sigma2Neg:
      out.push_back({detail::closed_form_root(p, s, +1), 1, EquilibriumKind::P2});
      break;
    case CaseLabel::Collision_Sigma2Zero:
      if (p.N > p.M) {
        const double den = p.C + p.N * p.Q;
        out.push_back({{p.Q * (p.N - p.M) / den, p.C * (p.N - p.M) / (p.N * den)}, 1, EquilibriumKind::P2});
      }
      break;
    case CaseLabel::DoubleRoot_DeltaZero:
      if (p.N > p.M) {
        const double den = p.C + p.N * p.Q;
        out.push_back({{-s.sigma1 / (2 * den), -s.sigma3 / (2 * p.N * den)}, 2, EquilibriumKind::CollapsedE});
      }
      break;
    case CaseLabel::TwoInterior:
      out.push_back({detail::closed_form_root(p, s, -1), 1, EquilibriumKind::P1});
      out.push_back({detail::closed_form_root(p, s, +1), 1, EquilibriumKind::P2});
      break;
    default:
      break;
  }
  return out;
}

inline std::vector<Equilibrium> boundary_equilibria(const Params& p) {
  p.validate();
  return {{{0, 0}, 1, EquilibriumKind::Origin}, {{1, 0}, 1, EquilibriumKind::CarryingCapacity}};
}

// P2 when an interior point of multiplicity 1 with that role exists.
inline std::optional<State> find_p2(const Params& p) {
  for (const auto& e : interior_equilibria(p))
    if (e.kind == EquilibriumKind::P2) return e.point;
  return std::nullopt;
}

inline std::optional<State> find_p1(const Params& p) {
  for (const auto& e : interior_equilibria(p))
    if (e.kind == EquilibriumKind::P1) return e.point;
  return std::nullopt;
}

inline StabilityClass classify_carrying_capacity(const Params& p) {
  p.validate();
  if (p.C == p.M) throw NonGenericError("(1,0) is non-hyperbolic when C = M");
  return {p.C > p.M ? StabilityTag::Saddle : StabilityTag::StableNode, std::nullopt};
}

namespace detail {

inline bool near_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace detail

// Region I..VI of the (Q, C) plane (requires Q > 1, C > M).
inline int origin_region(const Params& p) {
  p.validate();
  if (!(p.Q > 1) || !(p.C > p.M)) throw DomainError("origin classification requires Q > 1 and C > M");
  const double cb = p.M * p.Q / (p.Q - 1);
  const double m1 = p.M + 1;
  if (detail::near_equal(p.C, m1)) throw NonGenericError("region boundary C = M + 1");
  if (detail::near_equal(p.C, cb)) throw NonGenericError("region boundary C = MQ/(Q-1)");
  if (detail::near_equal(p.Q, m1)) throw NonGenericError("region boundary Q = M + 1");
  const bool c_above_m1 = p.C > m1, c_above_cb = p.C > cb, q_above_m1 = p.Q > m1;
  if (c_above_m1 && !c_above_cb) return 1;
  if (c_above_cb && !q_above_m1) return 2;
  if (c_above_m1 && q_above_m1) return 3;
  if (!c_above_m1 && !q_above_m1) return 4;
  if (!c_above_cb && q_above_m1) return 5;
  return 6;  // cb < C < M + 1
}

inline StabilityClass classify_origin(const Params& p) {
  static constexpr OriginSectors kByRegion[] = {
      OriginSectors::SaddleRepelling_I, OriginSectors::AttractingElliptic_II, OriginSectors::Elliptic_III,
      OriginSectors::Saddle_IV,         OriginSectors::AttractingSaddle_V,    OriginSectors::EllipticRepelling_VI};
  return {StabilityTag::DegenerateOrigin, kByRegion[origin_region(p) - 1]};
}

// Eigenvalue pairs of the equilibria of the vertical (O_xy, I_x) and
// horizontal (O_XY, I_Y) blow-ups of the origin. I_x and I_Y exist only
// outside Regions III and IV.
struct BlowupEigenvalues {
  using Pair = std::pair<double, double>;
  int region = 0;
  Pair O_xy, O_XY;
  std::optional<Pair> I_x, I_Y;
};

inline BlowupEigenvalues blowup_eigenvalues(const Params& p) {
  BlowupEigenvalues b;
  b.region = origin_region(p);
  const double C = p.C, M = p.M, Q = p.Q;
  const double s2 = C * (Q - 1) - M * Q;
  b.O_xy = {1 + M - Q, -M};
  b.O_XY = {1, C - 1 - M};
  if (b.region != 3 && b.region != 4) {
    if (1 + M - C == 0) throw NonGenericError("blow-up denominator 1 + M - C vanishes");
    if (M - Q + 1 == 0) throw NonGenericError("blow-up denominator M - Q + 1 vanishes");
    b.I_x = BlowupEigenvalues::Pair{-1 - M + Q, s2 / (1 + M - C)};
    b.I_Y = BlowupEigenvalues::Pair{-s2 / (M - Q + 1), 1 + M - C};
  }
  return b;
}

// Hyperbolic classification from the Jacobian alone.
inline StabilityTag classify_matrix(const Matrix2& j) {
  const double det = j.det(), tr = j.trace();
  if (det < 0) return StabilityTag::Saddle;
  if (std::abs(tr) < kTraceBand) return StabilityTag::WeakFocus;
  const bool focus = tr * tr - 4 * det < 0;
  if (tr < 0) return focus ? StabilityTag::StableFocus : StabilityTag::StableNode;
  return focus ? StabilityTag::UnstableFocus : StabilityTag::UnstableNode;
}

inline StabilityClass classify_interior(const Params& p, const Equilibrium& e) {
  p.validate();
  if (e.multiplicity != 1) throw PreconditionError("collapsed equilibrium: use classify_collapsed");
  return {classify_matrix(jacobian(p, e.point)), std::nullopt};
}

// Polynomials whose combination T1 sqrt(Delta) + T2 carries the sign of the
// trace at P2.
inline double trace_poly_T1(const Params& p) {
  const double C = p.C, M = p.M, N = p.N, Q = p.Q;
  const double N2 = N * N, N3 = N2 * N;
  return N * Q * Q * (3 * C - M - N - C * N2 + M * N2) +
         C * Q * (C - 3 * N - C * N2 - 2 * C * N3 + M * N2 + 2 * M * N3) + C * C * (M * N2 + N3 - 1);
}

inline double trace_poly_T2(const Params& p) {
  const double C = p.C, M = p.M, N = p.N, Q = p.Q;
  const double C2 = C * C, M2 = M * M, N2 = N * N, N3 = N2 * N, N4 = N3 * N;
  return 4 * N2 * Q * Q * Q * (C - M) -
         N * Q * Q *
             (C * N3 - M * N3 - 2 * C2 * N2 + 2 * C2 * N3 - M2 * N2 + 2 * M2 * N3 + C * M + 3 * C * N - 2 * M * N + M2 +
              N2 + 3 * C * M * N2 - 4 * C * M * N3) +
         C * Q *
             (-3 * C * N3 + 2 * C * N4 + 3 * M * N3 - 2 * M * N4 + 2 * C2 * N2 + 2 * C2 * N3 + M2 * N2 - 2 * M2 * N3 -
              C * M + C * N + M * N - N2 - 3 * C * M * N2) -
         C2 * (-M + N + 2 * C * N2 + 2 * C * N3 - 2 * M * N2 + M2 * N2 + N4);
}

inline double trace_sign_quantity(const Params& p) {
  const SigmaSet s = sigma_delta(p);
  if (s.delta < 0) throw DomainError("trace sign quantity needs Delta >= 0");
  return trace_poly_T1(p) * std::sqrt(s.delta) + trace_poly_T2(p);
}

// Critical conversion rate separating saddle-node repellers from attractors.
inline double collapse_critical_C(double M, double N) {
  const double A = -8 * M * N * N - (1 - N) * (M + N) * (M + N);
  return (-A + std::sqrt(16 * M * N * N * N * (M - N) * (M - N) + A * A)) / (8 * N * N);
}

inline StabilityClass classify_collapsed(const Params& p, std::optional<double> band = std::nullopt) {
  const SigmaSet s = sigma_delta(p);
  if (!(p.C > p.M) || !(p.N > p.M)) throw PreconditionError("collapsed equilibrium needs C > M and N > M");
  if (!(std::abs(s.delta) < band.value_or(collapsed_band(p))))
    throw PreconditionError("Delta is not zero within the collapse band");
  const double cs = collapse_critical_C(p.M, p.N);
  if (std::abs(p.C - cs) < 1e-9 * std::max(1.0, cs))
    throw NonGenericError("C = C*: Bogdanov-Takens candidate");
  return {p.C < cs ? StabilityTag::SaddleNodeRepeller : StabilityTag::SaddleNodeAttractor, std::nullopt};
}

inline StabilityClass classify_sigma2zero(const Params& p) {
  const SigmaSet s = sigma_delta(p);
  if (!(p.C > p.M)) throw PreconditionError("Sigma2 = 0 analysis needs C > M");
  if (!(std::abs(s.sigma2) < kSigma2Band)) throw PreconditionError("Sigma2 is not zero");
  if (!(p.N > p.M)) throw PreconditionError("no interior equilibrium when N <= M");
  const double den = p.C + p.N * p.Q;
  const State p2{p.Q * (p.N - p.M) / den, p.C * (p.N - p.M) / (p.N * den)};
  return {classify_matrix(jacobian(p, p2)), std::nullopt};
}

// Whatever classification applies to `e`; empty where none is defined
// (origin outside Q > 1, C > M, or exactly on a region boundary).
inline std::optional<StabilityClass> classify_equilibrium(const Params& p, const Equilibrium& e) {
  try {
    switch (e.kind) {
      case EquilibriumKind::Origin: return classify_origin(p);
      case EquilibriumKind::CarryingCapacity: return classify_carrying_capacity(p);
      case EquilibriumKind::CollapsedE: return classify_collapsed(p);
      case EquilibriumKind::P1:
      case EquilibriumKind::P2:
        if (sigma_delta(p).case_label == CaseLabel::Collision_Sigma2Zero) return classify_sigma2zero(p);
        return classify_interior(p, e);
    }
  } catch (const Error&) {
  }
  return std::nullopt;
}

}  // namespace bazykin
