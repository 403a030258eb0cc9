#pragma once

// (Q, C) bifurcation diagram at fixed (M, N): saddle-node, Hopf and
// homoclinic curves, the Bogdanov-Takens point and sampled region labels.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "bazykin/bifurcation.hpp"
#include "bazykin/dynamics.hpp"
#include "bazykin/equilibria.hpp"
#include "bazykin/errors.hpp"

namespace bazykin {

// lo:hi:step, inclusive of hi up to rounding.
struct ParamRange {
  double lo = 0, hi = 0, step = 0;

  bool operator==(const ParamRange&) const = default;
  std::vector<double> values() const {
    if (!(step > 0) || !(hi >= lo)) throw DomainError("range needs lo <= hi and step > 0");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> v;
    for (long i = 0; i <= n; ++i) v.push_back(lo + static_cast<double>(i) * step);
    return v;
  }
};

struct QC {
  double Q = 0, C = 0;
  bool operator==(const QC&) const = default;
};

enum class DiagramRegion { GlobalExtinction, P2Unstable, UnstableCycleAroundP2, P2StableNoCycle };

inline std::string_view to_string(DiagramRegion r) {
  switch (r) {
    case DiagramRegion::GlobalExtinction: return "GlobalExtinction";
    case DiagramRegion::P2Unstable: return "P2Unstable";
    case DiagramRegion::UnstableCycleAroundP2: return "UnstableCycleAroundP2";
    case DiagramRegion::P2StableNoCycle: return "P2StableNoCycle";
  }
  return "?";
}

inline std::optional<DiagramRegion> region_from_string(std::string_view s) {
  for (DiagramRegion r : {DiagramRegion::GlobalExtinction, DiagramRegion::P2Unstable,
                          DiagramRegion::UnstableCycleAroundP2, DiagramRegion::P2StableNoCycle})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

struct RegionSample {
  double Q = 0, C = 0;
  DiagramRegion region = DiagramRegion::GlobalExtinction;
  bool operator==(const RegionSample&) const = default;
};

struct BifDiagram {
  std::vector<QC> sn_curve, hopf_curve, hom_curve;
  QC bt_point;
  std::vector<RegionSample> region_labels;

  bool operator==(const BifDiagram&) const = default;
};

struct DiagramOptions {
  int region_nq = 12;
  int region_nc = 12;
  int hom_scan = 40;
  int band_stride = 5;  // every n-th traced C gets one sample per band
  bool refine_near_bt = true;
};

struct CurvesAtC {
  std::optional<double> sn, hopf, hom;
};

// Q-values of the three curves at one C inside [Q_lo, Q_hi].
inline CurvesAtC curves_at(double M, double N, double C, double Q_lo, double Q_hi, int hom_scan = 40) {
  CurvesAtC out;
  if (!(C > M)) return out;
  const double q_sn = saddle_node_Q(C, M, N);
  if (q_sn >= Q_lo && q_sn <= Q_hi) out.sn = q_sn;
  const double lo = std::max(Q_lo, 1.0 + 1e-9);
  const double hi = std::min(Q_hi, q_sn);
  if (!(lo < hi)) return out;
  try {
    out.hopf = hopf_Q(C, M, N, lo, hi);
  } catch (const NotFoundError&) {
    return out;
  }
  const auto qs = scan_points(lo, *out.hopf, hom_scan);
  std::optional<Separation> next;
  for (std::size_t i = qs.size() - 1; i-- > 0;) {
    auto s = separatrix_separation({C, M, N, qs[i]});
    if (s && next && s->kind == next->kind && s->stable_side == next->stable_side &&
        (s->value < 0) != (next->value < 0)) {
      try {
        const double q = homoclinic_Q(C, M, N, qs[i], qs[i + 1]);
        const auto at = separatrix_separation({C, M, N, q});
        if (at && std::abs(at->value) < 1e-6) {
          out.hom = q;
          break;
        }
      } catch (const NotFoundError&) {
      }
    }
    next = std::move(s);
  }
  return out;
}

inline DiagramRegion classify_region(const Params& p) {
  const auto p2 = find_p2(p);
  if (!p2) return DiagramRegion::GlobalExtinction;
  if (!(jacobian(p, *p2).trace() < 0)) return DiagramRegion::P2Unstable;
  for (const auto& c : find_limit_cycles(p))
    if (!c.stable) return DiagramRegion::UnstableCycleAroundP2;
  return DiagramRegion::P2StableNoCycle;
}

inline BifDiagram trace_diagram(double M, double N, const ParamRange& Q_range, const ParamRange& C_range,
                                const DiagramOptions& o = {}) {
  if (!(M > 0 && N > 0 && Q_range.lo > 0 && C_range.lo > 0)) throw DomainError("diagram ranges must be positive");
  if (!(M < N)) throw DomainError("diagram needs M < N");
  BifDiagram d;
  const BTData bt = bt_point(M, N);
  d.bt_point = {bt.Q_star, bt.C_star};

  std::vector<double> cs = C_range.values();
  if (o.refine_near_bt && bt.C_star > C_range.lo && bt.C_star < C_range.hi) {
    for (int k = 4; k <= 8; ++k) cs.push_back(bt.C_star - std::pow(10.0, -k / 2.0));
  }
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());

  std::vector<std::pair<double, CurvesAtC>> traced;
  for (double C : cs) {
    const CurvesAtC at = curves_at(M, N, C, Q_range.lo, Q_range.hi, o.hom_scan);
    if (at.sn) d.sn_curve.push_back({*at.sn, C});
    if (at.hopf) d.hopf_curve.push_back({*at.hopf, C});
    if (at.hom) d.hom_curve.push_back({*at.hom, C});
    traced.emplace_back(C, at);
  }

  // One classified sample inside each band cut out by the traced curves.
  for (std::size_t k = 0; k < traced.size(); k += std::max(1, o.band_stride)) {
    const auto& [C, at] = traced[k];
    if (!at.sn || !at.hopf || !at.hom) continue;
    const double sn = *at.sn, h = *at.hopf, hom = *at.hom;
    for (double Q : {hom - 0.5 * (h - hom), 0.5 * (hom + h), 0.5 * (h + sn), sn + 0.5 * (sn - h)})
      if (Q > Q_range.lo && Q < Q_range.hi) d.region_labels.push_back({Q, C, classify_region({C, M, N, Q})});
  }

  for (int j = 0; j < o.region_nc; ++j) {
    const double C = C_range.lo + (j + 0.5) * (C_range.hi - C_range.lo) / o.region_nc;
    for (int i = 0; i < o.region_nq; ++i) {
      const double Q = Q_range.lo + (i + 0.5) * (Q_range.hi - Q_range.lo) / o.region_nq;
      d.region_labels.push_back({Q, C, classify_region({C, M, N, Q})});
    }
  }
  return d;
}

// Smallest (Q, C) distance from a curve to a point.
inline double closest_approach(const std::vector<QC>& curve, const QC& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const QC& q : curve) best = std::min(best, std::hypot(q.Q - p.Q, q.C - p.C));
  return best;
}

}  // namespace bazykin
