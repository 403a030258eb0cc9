#pragma once

// Long-time behaviour: omega-limit labels, limit cycles on the section
// v = v2, u > u2, saddle separatrices, separatrix connections and basins.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "bazykin/equilibria.hpp"
#include "bazykin/errors.hpp"
#include "bazykin/integrator.hpp"
#include "bazykin/model.hpp"

namespace bazykin {

inline constexpr double kBackwardCap = 1e4;

// ---------------------------------------------------------------- geometry

inline double distance_to_segment(const State& p, const State& a, const State& b) {
  const State ab = b - a;
  const double len2 = dot(ab, ab);
  const double t = len2 > 0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
  return distance(p, a + t * ab);
}

inline double distance_to_polyline(const State& p, const std::vector<State>& line) {
  if (line.empty()) return std::numeric_limits<double>::infinity();
  if (line.size() == 1) return distance(p, line[0]);
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < line.size(); ++i) d = std::min(d, distance_to_segment(p, line[i - 1], line[i]));
  return d;
}

// Symmetric Hausdorff distance between two polylines (vertices against segments).
inline double hausdorff_distance(const std::vector<State>& a, const std::vector<State>& b) {
  double h = 0;
  for (const State& p : a) h = std::max(h, distance_to_polyline(p, b));
  for (const State& p : b) h = std::max(h, distance_to_polyline(p, a));
  return h;
}

inline std::vector<State> states_of(const Trajectory& tr) {
  std::vector<State> out;
  out.reserve(tr.samples.size());
  for (const auto& s : tr.samples) out.push_back(s.state);
  return out;
}

namespace detail {

// First crossing of `sec` accepted by `accept(state, direction)`, where
// direction is +1 when the section function increases. The starting point
// itself never counts. `stop(state)` aborts without a hit.
template <class Field, class Accept, class Stop>
std::optional<TimedState> first_crossing(const Field& f, State s0, double t_end, const FlowOptions& opt,
                                         const Section& sec, Accept&& accept, Stop&& stop,
                                         std::vector<TimedState>* path = nullptr) {
  std::optional<TimedState> hit;
  if (path) path->push_back({0, s0});
  try {
    flow(f, s0, 0, t_end, opt, [&](double t0, const State& a, double t1, const State& b) {
      if (path) path->push_back({t1, b});
      const double ga = sec.value(a), gb = sec.value(b);
      if ((ga < 0 && gb >= 0) || (ga > 0 && gb <= 0)) {
        const int dir = gb > ga ? 1 : -1;
        const TimedState ts = land_on_section(f, sec, t0, a);
        if (accept(ts.state, dir)) {
          hit = ts;
          if (path) path->back() = ts;
          return false;
        }
      }
      return !stop(b);
    });
  } catch (const StiffnessError&) {
    return std::nullopt;
  }
  return hit;
}

}  // namespace detail

// ------------------------------------------------------------ omega limits

enum class Attractor { Origin, CarryingCapacity, P2, StableCycle, Undetermined };

inline std::string_view to_string(Attractor a) {
  switch (a) {
    case Attractor::Origin: return "Origin";
    case Attractor::CarryingCapacity: return "CarryingCapacity";
    case Attractor::P2: return "P2";
    case Attractor::StableCycle: return "StableCycle";
    case Attractor::Undetermined: return "Undetermined";
  }
  return "?";
}

inline std::optional<Attractor> attractor_from_string(std::string_view s) {
  for (Attractor a : {Attractor::Origin, Attractor::CarryingCapacity, Attractor::P2, Attractor::StableCycle,
                      Attractor::Undetermined})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

struct OmegaOptions {
  double tol = 1e-10;
  double radius = 1e-6;      // proximity to an equilibrium
  double dwell = 50;         // time the proximity must persist
  double cycle_rel = 1e-6;   // period-to-period change of the section crossing
  double cycle_min_amp = 1e-4;
  double t_max = 1e9;
  std::size_t max_steps = 500'000;
};

struct OmegaResult {
  Attractor label = Attractor::Undetermined;
  State endpoint;
  double t = 0;
};

inline OmegaResult omega_limit_detail(const Params& p, State s0, const OmegaOptions& o = {}) {
  p.validate();
  if (!(s0.u > 0 && s0.v > 0) || !std::isfinite(s0.u) || !std::isfinite(s0.v))
    throw DomainError("omega_limit needs a start in the open first quadrant");
  const auto p2 = find_p2(p);

  struct Target {
    Attractor label;
    State at;
    double entered = -1;
  };
  std::vector<Target> targets{{Attractor::Origin, {0, 0}}, {Attractor::CarryingCapacity, {1, 0}}};
  if (p2) targets.push_back({Attractor::P2, *p2});

  auto field = [&p](const State& s) { return vector_field(p, s); };
  FlowOptions fo;
  fo.tol = o.tol;
  fo.max_steps = o.max_steps;
  OmegaResult res;
  std::optional<double> last_cross;
  const Section sec{0, 1, p2 ? p2->v : 0};

  try {
    const FlowResult fr = flow(field, s0, 0, o.t_max, fo, [&](double t0, const State& a, double t1, const State& b) {
      res.endpoint = b;
      res.t = t1;
      for (Target& tg : targets) {
        if (distance(b, tg.at) < o.radius) {
          if (tg.entered < 0) tg.entered = t1;
          if (t1 - tg.entered >= o.dwell) {
            res.label = tg.label;
            return false;
          }
        } else {
          tg.entered = -1;
        }
      }
      if (p2) {
        const double ga = sec.value(a), gb = sec.value(b);
        if (ga < 0 && gb >= 0) {
          const State x = land_on_section(field, sec, t0, a).state;
          if (x.u - p2->u > o.cycle_min_amp) {
            if (last_cross && std::abs(x.u - *last_cross) < o.cycle_rel * std::abs(x.u)) {
              res.label = Attractor::StableCycle;
              return false;
            }
            last_cross = x.u;
          } else {
            last_cross.reset();
          }
        }
      }
      return true;
    });
    (void)fr;
  } catch (const StiffnessError& e) {
    res.endpoint = e.last_state();
    res.t = e.time();
    res.label = norm(e.last_state()) < 1e-10 ? Attractor::Origin : Attractor::Undetermined;
  }
  return res;
}

inline Attractor omega_limit(const Params& p, State s0, const OmegaOptions& o = {}) {
  return omega_limit_detail(p, s0, o).label;
}

// ------------------------------------------------------------ limit cycles

struct LimitCycle {
  State section_point;
  double period = 0;
  std::vector<State> points;
  double floquet = 0;
  bool stable = false;

  bool operator==(const LimitCycle&) const = default;
};

struct CycleOptions {
  int seeds = 80;
  double tol = 1e-12;
  double t_cap = kBackwardCap;
  double u_hi = 1.0;     // outer end of the section
  double box = 5.0;      // returns leaving [0, box]^2 are undefined
  double floor = 1e-7;   // returns approaching the origin are undefined
  double residual = 1e-9;
};

namespace detail {

struct Return {
  double u = 0;
  double t = 0;
};

// Next crossing of the ray v = centre.v, u > centre.u in the direction the
// flow crosses it at the start, integrating with time sign `dir`.
template <class Field>
std::optional<Return> return_map(const Field& f, const State& centre, double u0, int dir, const CycleOptions& o,
                                 std::vector<TimedState>* path = nullptr) {
  const Section sec{0, 1, centre.v};
  const State s0{u0, centre.v};
  const double vdot = f(s0).v;
  if (vdot == 0) return std::nullopt;
  const int want = (vdot > 0 ? 1 : -1) * dir;
  FlowOptions fo;
  fo.tol = o.tol;
  fo.u_max = o.box;
  fo.v_max = o.box;
  auto hit = first_crossing(
      f, s0, dir * o.t_cap, fo, sec, [&](const State& s, int d) { return d == want && s.u > centre.u; },
      [&](const State& s) { return norm(s) < o.floor; }, path);
  if (!hit) return std::nullopt;
  return Return{hit->state.u, hit->t};
}

template <class Field>
std::optional<LimitCycle> refine_cycle(const Field& f, const State& centre, double lo, double hi, double dlo,
                                       double dhi, int dir, const CycleOptions& o) {
  auto disp = [&](double u) {
    const auto r = return_map(f, centre, u, dir, o);
    if (!r) throw NotFoundError("return map undefined inside a cycle bracket");
    const double d = r->u - u;
    return std::abs(d) < 0.1 * o.residual ? 0.0 : d;
  };
  double u_star = 0;
  try {
    std::uintmax_t it = 100;
    const auto r = boost::math::tools::toms748_solve(
        disp, lo, hi, dlo, dhi, [](double a, double b) { return std::abs(b - a) < 1e-13; }, it);
    u_star = 0.5 * (r.first + r.second);
  } catch (const NotFoundError&) {
    return std::nullopt;
  }
  std::vector<TimedState> path;
  const auto r0 = return_map(f, centre, u_star, dir, o, &path);
  if (!r0 || std::abs(r0->u - u_star) >= o.residual) return std::nullopt;

  const double h = 1e-6 * std::max(1.0, u_star);
  const auto rp = return_map(f, centre, u_star + h, dir, o);
  const auto rm = return_map(f, centre, u_star - h, dir, o);
  if (!rp || !rm) return std::nullopt;
  const double slope = (rp->u - rm->u) / (2 * h);

  LimitCycle c;
  c.section_point = {u_star, centre.v};
  c.period = std::abs(r0->t);
  c.floquet = dir > 0 ? slope : 1.0 / slope;
  c.stable = std::abs(c.floquet) < 1;
  c.points.reserve(path.size());
  for (const auto& ts : path) c.points.push_back(ts.state);
  if (dir < 0) std::reverse(c.points.begin(), c.points.end());
  return c;
}

}  // namespace detail

// Cycles of an arbitrary planar field around `centre`, scanning the forward
// map for attracting cycles and the backward map for repelling ones.
template <class Field>
std::vector<LimitCycle> cycles_of_field(const Field& f, const State& centre, const CycleOptions& o = {}) {
  if (!(o.u_hi > centre.u)) return {};
  std::vector<double> seeds;
  const double span = o.u_hi - centre.u;
  for (int i = 1; i <= o.seeds; ++i) seeds.push_back(centre.u + 0.999 * span * std::pow(10.0, -4.0 + 4.0 * i / o.seeds));

  std::vector<LimitCycle> found;
  for (int dir : {1, -1}) {
    std::optional<double> prev_u, prev_d;
    for (double u : seeds) {
      const auto r = detail::return_map(f, centre, u, dir, o);
      std::optional<double> d;
      if (r) d = r->u - u;
      if (prev_d && d && *prev_d > 0 && *d < 0) {
        if (auto c = detail::refine_cycle(f, centre, *prev_u, u, *prev_d, *d, dir, o)) found.push_back(std::move(*c));
      }
      prev_u = u;
      prev_d = d;
    }
  }
  std::sort(found.begin(), found.end(),
            [](const LimitCycle& a, const LimitCycle& b) { return a.section_point.u < b.section_point.u; });
  std::vector<LimitCycle> out;
  for (auto& c : found)
    if (out.empty() || std::abs(c.section_point.u - out.back().section_point.u) > 1e-6) out.push_back(std::move(c));
  return out;
}

inline std::vector<LimitCycle> find_limit_cycles(const Params& p, const CycleOptions& o = {}) {
  p.validate();
  const auto p2 = find_p2(p);
  if (!p2) throw PreconditionError("limit-cycle search needs the interior equilibrium P2");
  auto field = [&p](const State& s) { return vector_field(p, s); };
  return cycles_of_field(field, *p2, o);
}

// --------------------------------------------------------- saddle manifolds

struct ManifoldOptions {
  double eps = 1e-6;
  double tol = 1e-11;
  double t_forward = 2e3;
  double t_backward = kBackwardCap;
  double box_u = 1.5;
  double box_v = 3.0;
  double stop_radius = 1e-6;
};

struct SaddleManifolds {
  State saddle;
  double lambda_u = 0, lambda_s = 0;
  State e_u, e_s;  // unit eigenvectors, first component positive
  Trajectory unstable_ne, unstable_sw, stable_ne, stable_sw;
  double richardson_gap = 0;  // branch endpoints at eps/2 against the eps branches
};

namespace detail {

template <class Field>
Trajectory manifold_branch(const Field& f, State seed, double t_end, const std::vector<State>& sinks,
                           const ManifoldOptions& o) {
  FlowOptions fo;
  fo.tol = o.tol;
  fo.u_max = o.box_u;
  fo.v_max = o.box_v;
  Trajectory tr;
  tr.tolerance = o.tol;
  tr.samples.push_back({0, seed});
  try {
    const FlowResult r = flow(f, seed, 0, t_end, fo, [&](double, const State&, double t1, const State& b) {
      tr.samples.push_back({t1, b});
      for (const State& s : sinks)
        if (distance(b, s) < o.stop_radius) return false;
      return true;
    });
    tr.status = r.status;
    tr.max_clip = r.max_clip;
  } catch (const StiffnessError&) {
    tr.status = FlowStatus::Stopped;
  }
  return tr;
}

}  // namespace detail

inline SaddleManifolds saddle_manifolds(const Params& p, const ManifoldOptions& o = {}) {
  p.validate();
  const auto p1 = find_p1(p);
  if (!p1) throw PreconditionError("saddle manifolds need the interior saddle P1");
  const Matrix2 J = jacobian(p, *p1);
  if (!(J.det() < 0)) throw PreconditionError("P1 is not a saddle");
  const auto ev = eigenvalues(J);
  SaddleManifolds m;
  m.saddle = *p1;
  m.lambda_s = ev[0].real();
  m.lambda_u = ev[1].real();
  m.e_s = eigenvector(J, m.lambda_s);
  m.e_u = eigenvector(J, m.lambda_u);

  std::vector<State> sinks{{0, 0}, {1, 0}};
  if (auto p2 = find_p2(p)) sinks.push_back(*p2);
  auto field = [&p](const State& s) { return vector_field(p, s); };
  auto build = [&](double eps, SaddleManifolds& out) {
    out.unstable_ne = detail::manifold_branch(field, *p1 + eps * m.e_u, o.t_forward, sinks, o);
    out.unstable_sw = detail::manifold_branch(field, *p1 - eps * m.e_u, o.t_forward, sinks, o);
    out.stable_ne = detail::manifold_branch(field, *p1 + eps * m.e_s, -o.t_backward, sinks, o);
    out.stable_sw = detail::manifold_branch(field, *p1 - eps * m.e_s, -o.t_backward, sinks, o);
  };
  build(o.eps, m);
  SaddleManifolds half;
  build(0.5 * o.eps, half);
  const std::pair<const Trajectory*, const Trajectory*> pairs[] = {{&m.unstable_ne, &half.unstable_ne},
                                                                   {&m.unstable_sw, &half.unstable_sw},
                                                                   {&m.stable_ne, &half.stable_ne},
                                                                   {&m.stable_sw, &half.stable_sw}};
  for (const auto& [full, h] : pairs)
    m.richardson_gap = std::max(m.richardson_gap, distance_to_polyline(h->back(), states_of(*full)));
  return m;
}

// ------------------------------------------------------ separatrix connection

enum class ConnectionKind { SaddleLoop, CarryingToOrigin };

inline std::string_view to_string(ConnectionKind k) {
  return k == ConnectionKind::SaddleLoop ? "SaddleLoop" : "CarryingToOrigin";
}

struct Separation {
  ConnectionKind kind = ConnectionKind::SaddleLoop;
  int stable_side = -1;  // saddle loops: sign of the stable eigenvector seed
  double value = 0;  // unstable crossing minus stable crossing along the ray
  State ray_origin, ray_dir;
  std::vector<State> unstable, stable;  // branches up to their first ray crossing
};

struct SeparationOptions {
  double tol = 1e-12;
  double eps_saddle = 1e-6;
  double eps_carrying = 1e-8;
  double origin_seed = 1e-2;
  double t_forward = 2e3;
  double t_backward = kBackwardCap;
  double box = 3.0;
};

namespace detail {

template <class Field>
std::optional<std::pair<double, std::vector<State>>> ray_hit(const Field& f, State seed, double t_end,
                                                             const State& base, const State& dir,
                                                             const SeparationOptions& o) {
  const Section sec{-dir.v, dir.u, -dir.v * base.u + dir.u * base.v};
  FlowOptions fo;
  fo.tol = o.tol;
  fo.u_max = o.box;
  fo.v_max = o.box;
  std::vector<TimedState> path;
  const auto hit = first_crossing(
      f, seed, t_end, fo, sec, [&](const State& s, int) { return dot(s - base, dir) > 0; },
      [](const State& s) { return norm(s) < 1e-9; }, &path);
  if (!hit) return std::nullopt;
  std::vector<State> pts;
  pts.reserve(path.size());
  for (const auto& ts : path) pts.push_back(ts.state);
  return std::pair{dot(hit->state - base, dir), std::move(pts)};
}

}  // namespace detail

// Signed separation of the two separatrices that form a loop around P2.
// With an interior saddle P1 these are W^u_ne(P1) and W^s_sw(P1); without
// one (origin with a saddle sector) they are W^u(1, 0) and the separatrix
// entering the origin's saddle sector.
inline std::optional<Separation> separatrix_separation(const Params& p, const SeparationOptions& o = {}) {
  p.validate();
  const auto p2 = find_p2(p);
  if (!p2) return std::nullopt;
  auto field = [&p](const State& s) { return vector_field(p, s); };
  Separation sep;
  State saddle{0, 0};
  State u_seed;
  std::vector<std::pair<int, State>> s_seeds;
  double t_fwd = o.t_forward, t_bwd = o.t_backward;
  if (const auto p1 = find_p1(p); p1 && jacobian(p, *p1).det() < 0) {
    const Matrix2 J = jacobian(p, *p1);
    const auto ev = eigenvalues(J);
    sep.kind = ConnectionKind::SaddleLoop;
    saddle = *p1;
    State e_u = eigenvector(J, ev[1].real());
    if (dot(e_u, *p2 - *p1) < 0) e_u *= -1.0;
    const State e_s = eigenvector(J, ev[0].real());
    u_seed = *p1 + o.eps_saddle * e_u;
    // The loop returns along W^s_sw unless that branch never reaches the
    // ray; near the cusp the eigendirections nearly coincide and the loop
    // closes along W^s_ne instead.
    s_seeds = {{-1, *p1 - o.eps_saddle * e_s}, {1, *p1 + o.eps_saddle * e_s}};
    // Near the cusp the saddle is weak; allow time to leave the seed scale.
    const double escape = -std::log(o.eps_saddle) * 4;
    t_fwd = std::max(t_fwd, escape / ev[1].real());
    t_bwd = std::max(t_bwd, escape / -ev[0].real());
  } else {
    int region = 0;
    try {
      region = origin_region(p);
    } catch (const Error&) {
      return std::nullopt;
    }
    if (region != 5) return std::nullopt;
    sep.kind = ConnectionKind::CarryingToOrigin;
    State eu{-p.Q, 1 + p.C - p.M};
    u_seed = State{1, 0} + o.eps_carrying * (1.0 / norm(eu)) * eu;
    const double mu = (p.C - p.M - 1) / (1 + p.M - p.Q);
    s_seeds = {{0, {o.origin_seed, o.origin_seed * mu}}};
  }
  sep.ray_origin = *p2;
  sep.ray_dir = (1.0 / distance(*p2, saddle)) * (*p2 - saddle);
  const auto a = detail::ray_hit(field, u_seed, t_fwd, *p2, sep.ray_dir, o);
  if (!a) return std::nullopt;
  for (const auto& [side, seed] : s_seeds) {
    auto b = detail::ray_hit(field, seed, -t_bwd, *p2, sep.ray_dir, o);
    if (!b) continue;
    sep.stable_side = side;
    sep.value = a->first - b->first;
    sep.unstable = std::move(a->second);
    sep.stable = std::move(b->second);
    return sep;
  }
  return std::nullopt;
}

inline double homoclinic_Q(double C, double M, double N, double Q_lo, double Q_hi, const SeparationOptions& o = {}) {
  if (!(Q_lo < Q_hi)) throw DomainError("empty Q bracket");
  Params{C, M, N, Q_lo}.validate();
  const auto lo = separatrix_separation({C, M, N, Q_lo}, o);
  const auto hi = separatrix_separation({C, M, N, Q_hi}, o);
  if (!lo || !hi) throw NotFoundError("separatrix separation undefined at a bracket end");
  if (lo->kind != hi->kind || lo->stable_side != hi->stable_side)
    throw NotFoundError("bracket straddles a change of the connecting separatrices");
  if ((lo->value < 0) == (hi->value < 0)) throw NotFoundError("no sign change of the separation in the bracket");
  auto f = [&](double Q) {
    const auto s = separatrix_separation({C, M, N, Q}, o);
    if (!s || s->kind != lo->kind || s->stable_side != lo->stable_side)
      throw NotFoundError("separation undefined inside the bracket");
    return std::abs(s->value) < 1e-8 ? 0.0 : s->value;
  };
  std::uintmax_t it = 100;
  const auto r = boost::math::tools::toms748_solve(
      f, Q_lo, Q_hi, lo->value, hi->value, [](double a, double b) { return std::abs(b - a) < 1e-6; }, it);
  return 0.5 * (r.first + r.second);
}

struct ConnectionCertificate {
  double separation = 0;
  double hausdorff = 0;  // unstable branch after the ray against the stable branch
  double excluded_radius = 0;
};

// Follows the unstable branch past the ray until it is back near the saddle
// and compares that arc with the stable branch. Near the degenerate origin
// the comparison skips a ball of ten seed radii, where nearby orbits split
// between the sectors.
inline ConnectionCertificate connection_certificate(const Params& p, const SeparationOptions& o = {}) {
  const auto sep = separatrix_separation(p, o);
  if (!sep) throw NotFoundError("separation undefined");
  auto field = [&p](const State& s) { return vector_field(p, s); };
  const bool loop = sep->kind == ConnectionKind::SaddleLoop;
  const State saddle = loop ? find_p1(p).value() : State{0, 0};
  const double stop_r = loop ? o.eps_saddle : o.origin_seed;
  std::vector<State> tail{sep->unstable.back()};
  FlowOptions fo;
  fo.tol = o.tol;
  fo.u_max = o.box;
  fo.v_max = o.box;
  double best = distance(tail.back(), saddle);
  try {
    flow(field, tail.back(), 0, o.t_forward, fo, [&](double, const State&, double, const State& b) {
      const double d = distance(b, saddle);
      if (d > best && best < 1e-2) return false;
      best = std::min(best, d);
      tail.push_back(b);
      return d > stop_r;
    });
  } catch (const StiffnessError&) {
  }
  ConnectionCertificate c;
  c.separation = sep->value;
  c.excluded_radius = loop ? 0.0 : 10 * o.origin_seed;
  auto outside = [&](const std::vector<State>& pts) {
    std::vector<State> out;
    for (const State& x : pts)
      if (distance(x, saddle) >= c.excluded_radius) out.push_back(x);
    return out;
  };
  c.hausdorff = hausdorff_distance(outside(tail), outside(sep->stable));
  return c;
}

// ------------------------------------------------------------------- basins

struct BasinGrid {
  double u_lo = 0, u_hi = 1, v_lo = 0, v_hi = 1;
  int n_u = 50, n_v = 50;

  bool operator==(const BasinGrid&) const = default;
  State center(int i, int j) const {
    return {u_lo + (i + 0.5) * (u_hi - u_lo) / n_u, v_lo + (j + 0.5) * (v_hi - v_lo) / n_v};
  }
};

struct BasinRaster {
  BasinGrid grid;
  std::vector<Attractor> labels;  // row-major: index j * n_u + i, j along v

  bool operator==(const BasinRaster&) const = default;
  Attractor at(int i, int j) const { return labels[static_cast<std::size_t>(j) * grid.n_u + i]; }
  std::size_t count(Attractor a) const { return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), a)); }
};

// Worker count: `requested` (0 = hardware), capped by BAZYKIN_THREADS.
inline unsigned worker_count(unsigned requested = 0) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("BAZYKIN_THREADS")) {
    unsigned cap = 0;
    const auto [ptr, ec] = std::from_chars(env, env + std::strlen(env), cap);
    if (ec == std::errc() && cap > 0) n = std::min(n, cap);
  }
  return std::max(1u, n);
}

inline BasinRaster basin_raster(const Params& p, const BasinGrid& g, const OmegaOptions& o = {},
                                unsigned threads = 0) {
  p.validate();
  if (!(g.n_u > 0 && g.n_v > 0)) throw DomainError("basin grid needs positive resolution");
  if (!(g.u_lo >= 0 && g.v_lo >= 0 && g.u_lo < g.u_hi && g.v_lo < g.v_hi && g.u_hi <= 1.2))
    throw DomainError("basin grid must lie in [0, 1.2] x [0, inf)");
  BasinRaster r;
  r.grid = g;
  const std::size_t cells = static_cast<std::size_t>(g.n_u) * g.n_v;
  r.labels.assign(cells, Attractor::Undetermined);
  const unsigned nt = std::min<std::size_t>(worker_count(threads), cells);
  auto work = [&](unsigned k) {
    for (std::size_t c = k; c < cells; c += nt) {
      const int i = static_cast<int>(c % g.n_u), j = static_cast<int>(c / g.n_u);
      r.labels[c] = omega_limit(p, g.center(i, j), o);
    }
  };
  if (nt == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < nt; ++k) pool.emplace_back(work, k);
    for (auto& t : pool) t.join();
  }
  return r;
}

}  // namespace bazykin
