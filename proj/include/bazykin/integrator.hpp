#pragma once

// Adaptive Dormand-Prince 5(4) integration of planar fields with step
// observers, bounding-box stops and exact crossing location on straight
// sections (Henon's change of independent variable).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta_dopri5.hpp>

#include "bazykin/errors.hpp"
#include "bazykin/model.hpp"

namespace bazykin {

// Step size collapsed below the representable minimum; carries the last
// accepted state so callers can inspect where it happened.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double t, State last)
      : Error(what), t_(t), last_(last) {}
  double time() const { return t_; }
  const State& last_state() const { return last_; }

 private:
  double t_;
  State last_;
};

struct FlowOptions {
  double tol = 1e-10;  // mixed absolute/relative per-step error bound
  std::size_t max_steps = 2'000'000;
  double u_max = std::numeric_limits<double>::infinity();
  double v_max = std::numeric_limits<double>::infinity();
  double h_init = 0;  // 0: pick from the field
};

enum class FlowStatus { Completed, Stopped, LeftBox, StepLimit };

struct FlowResult {
  FlowStatus status = FlowStatus::Completed;
  double t = 0;
  State state;
  std::size_t steps = 0;
  double max_clip = 0;  // largest negative excursion removed by clipping
};

struct TimedState {
  double t = 0;
  State state;
};

struct Trajectory {
  std::vector<TimedState> samples;
  double tolerance = 0;
  FlowStatus status = FlowStatus::Completed;
  double max_clip = 0;

  const State& back() const { return samples.back().state; }
};

namespace detail {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

template <class Field>
struct Rhs2 {
  const Field& f;
  double sign;
  void operator()(const Vec2& x, Vec2& dx, double /*t*/) const {
    const State d = f(State{x[0], x[1]});
    dx = {sign * d.u, sign * d.v};
  }
};

inline double error_norm(const Vec2& x0, const Vec2& x1, const Vec2& err, double tol) {
  double e = 0;
  for (int i = 0; i < 2; ++i) {
    const double sc = tol * (1 + std::max(std::abs(x0[i]), std::abs(x1[i])));
    e = std::max(e, std::abs(err[i]) / sc);
  }
  return e;
}

}  // namespace detail

// Integrates `field` from (t0, s0) towards t_end (either direction). After
// every accepted step `observer(t_prev, s_prev, t_next, s_next)` is called; it
// returns false to stop. States are clipped to the closed first quadrant.
template <class Field, class Observer>
FlowResult flow(const Field& field, State s0, double t0, double t_end, const FlowOptions& opt,
                Observer&& observer) {
  using detail::Vec2;
  namespace odeint = boost::numeric::odeint;
  if (!(opt.tol >= 1e-14 && opt.tol <= 1e-2)) throw DomainError("integration tolerance out of range");

  const double dir = t_end >= t0 ? 1.0 : -1.0;
  const double span = std::abs(t_end - t0);
  detail::Rhs2<Field> rhs{field, dir};
  odeint::runge_kutta_dopri5<Vec2> stepper;

  FlowResult res;
  Vec2 x{s0.u, s0.v}, dxdt, xn, dxdtn, xerr;
  rhs(x, dxdt, 0);

  double h = opt.h_init;
  if (h <= 0) {
    const double fn = std::max(std::abs(dxdt[0]), std::abs(dxdt[1]));
    const double xn0 = std::max({std::abs(x[0]), std::abs(x[1]), 1e-3});
    h = fn > 0 ? 1e-2 * xn0 / fn : 1e-2;
    h = std::min(h, 1e-1);
  }
  double s = 0;  // elapsed |t - t0|
  res.state = s0;
  res.t = t0;

  while (s < span) {
    if (res.steps >= opt.max_steps) {
      res.status = FlowStatus::StepLimit;
      return res;
    }
    h = std::min(h, span - s);
    stepper.do_step(rhs, x, dxdt, s, xn, dxdtn, h, xerr);
    const double err = detail::error_norm(x, xn, xerr, opt.tol);
    if (!(err <= 1.0) || !std::isfinite(xn[0]) || !std::isfinite(xn[1])) {
      const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
      h *= fac;
      if (h < 1e-14 * std::max(1.0, s)) {
        std::ostringstream os;
        os << "step size underflow at t = " << (t0 + dir * s) << ", state (" << x[0] << ", " << x[1] << ")";
        throw StiffnessError(os.str(), t0 + dir * s, State{x[0], x[1]});
      }
      continue;
    }
    bool clipped = false;
    for (double& c : xn) {
      if (c < 0) {
        res.max_clip = std::max(res.max_clip, -c);
        c = 0;
        clipped = true;
      }
    }
    const State prev{x[0], x[1]};
    const double t_prev = t0 + dir * s;
    s += h;
    x = xn;
    // Clipping moved the state; the FSAL derivative is stale.
    if (clipped)
      rhs(x, dxdt, 0);
    else
      dxdt = dxdtn;
    ++res.steps;
    res.t = t0 + dir * s;
    res.state = {x[0], x[1]};
    if (x[0] > opt.u_max || x[1] > opt.v_max) {
      res.status = FlowStatus::LeftBox;
      observer(t_prev, prev, res.t, res.state);
      return res;
    }
    if (!observer(t_prev, prev, res.t, res.state)) {
      res.status = FlowStatus::Stopped;
      return res;
    }
    const double fac = err > 0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
    h *= fac;
  }
  res.status = FlowStatus::Completed;
  return res;
}

template <class Field>
FlowResult flow(const Field& field, State s0, double t0, double t_end, const FlowOptions& opt) {
  return flow(field, s0, t0, t_end, opt, [](double, const State&, double, const State&) { return true; });
}

// Straight section a*u + b*v = c.
struct Section {
  double a = 0, b = 1, c = 0;
  double value(const State& s) const { return a * s.u + b * s.v - c; }
};

// Given a state s with g(s) = section.value(s) near zero, integrates exactly
// onto g = 0 by treating g as the independent variable. Time is returned in
// the same (signed) time as the caller's flow.
template <class Field>
TimedState land_on_section(const Field& field, const Section& sec, double t, State s) {
  using detail::Vec3;
  namespace odeint = boost::numeric::odeint;
  // d(u, v, t)/dg = (f, 1) / (a f1 + b f2)
  auto rhs = [&](const Vec3& x, Vec3& dx, double) {
    const State f = field(State{x[0], x[1]});
    const double gdot = sec.a * f.u + sec.b * f.v;
    dx = {f.u / gdot, f.v / gdot, 1.0 / gdot};
  };
  odeint::runge_kutta_dopri5<Vec3> stepper;
  Vec3 x{s.u, s.v, 0};
  const double g0 = sec.value(s);
  constexpr int kSub = 4;
  const double dg = -g0 / kSub;
  for (int i = 0; i < kSub; ++i) stepper.do_step(rhs, x, 0.0, dg);
  return {t + x[2], State{x[0], x[1]}};
}

// Integrates and records every accepted step.
template <class Field>
Trajectory integrate_field(const Field& field, State s0, double t_end, double tol,
                           FlowOptions opt = {}) {
  opt.tol = tol;
  Trajectory tr;
  tr.tolerance = tol;
  tr.samples.push_back({0, s0});
  const FlowResult r = flow(field, s0, 0, t_end, opt, [&](double, const State&, double t1, const State& s1) {
    tr.samples.push_back({t1, s1});
    return true;
  });
  tr.status = r.status;
  tr.max_clip = r.max_clip;
  return tr;
}

inline void check_first_quadrant(const State& s0) {
  if (!(s0.u >= 0 && s0.v >= 0) || !std::isfinite(s0.u) || !std::isfinite(s0.v))
    throw DomainError("initial state must lie in the closed first quadrant");
}

// Trajectory of the model from s0 over [0, t_end] (t_end < 0 integrates backwards).
inline Trajectory integrate(const Params& p, State s0, double t_end, double tol, FlowOptions opt = {}) {
  p.validate();
  check_first_quadrant(s0);
  if (!(tol >= 1e-13 && tol <= 1e-3)) throw DomainError("tol must lie in [1e-13, 1e-3]");
  auto field = [&p](const State& s) { return vector_field(p, s); };
  return integrate_field(field, s0, t_end, tol, opt);
}

}  // namespace bazykin
