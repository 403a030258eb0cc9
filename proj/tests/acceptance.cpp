// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bazykin.hpp"
#include "cli.hpp"

using namespace bazykin;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;
};

// Collects failed sub-checks into one outcome.
struct Checks {
  Outcome out;
  std::ostringstream notes;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      out.ok = false;
      notes << "[fail] " << what << "; ";
    }
  }
  void note(const std::string& s) { notes << s << "; "; }
  Outcome done() {
    out.detail = notes.str();
    if (out.detail.size() >= 2) out.detail.resize(out.detail.size() - 2);
    return out;
  }
};

std::string num(double x, int digits = 8) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

int failures = 0;
double total_seconds = 0;

void criterion(const char* id, const char* title, double budget_s, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  total_seconds += dt;
  const bool in_time = dt < budget_s;
  const bool ok = o.ok && in_time;
  if (!ok) ++failures;
  std::printf("%s %-3s %s (%.2f s of %.0f s)%s%s\n", ok ? "PASS" : "FAIL", id, title, dt, budget_s,
              o.detail.empty() ? "" : ": ", o.detail.c_str());
  if (!in_time) std::printf("     %s exceeded its runtime budget\n", id);
  std::fflush(stdout);
}

// Interior nullcline crossings by dense sampling and bisection.
std::vector<State> brute_force_crossings(const Params& p) {
  auto g = [&](double u) { return prey_nullcline(p, u) - predator_nullcline(p, u); };
  std::vector<double> us;
  for (int k = 0; k <= 300; ++k) us.push_back(std::pow(10.0, -12 + 10.0 * k / 300));
  for (int k = 1; k < 20000; ++k) us.push_back(0.01 + 0.99 * k / 20000.0);
  std::vector<State> out;
  for (std::size_t k = 0; k + 1 < us.size(); ++k) {
    double a = us[k], b = us[k + 1];
    double ga = g(a);
    const double gb = g(b);
    if ((ga < 0) == (gb < 0)) continue;
    for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
      const double m = 0.5 * (a + b), gm = g(m);
      if ((gm < 0) == (ga < 0)) {
        a = m;
        ga = gm;
      } else {
        b = m;
      }
    }
    const double u = 0.5 * (a + b);
    const double v = prey_nullcline(p, u);
    if (v > 0) out.push_back({u, v});
  }
  return out;
}

template <class T>
bool round_trips(const T& x, std::string_view kind) {
  return from_document<T>(Json::parse(dump(document(kind, Json(x)))), kind) == x;
}

// ---------------------------------------------------------------- criteria

Outcome trace_sign() {
  Checks c;
  const double at16 = trace_sign_quantity({0.363, 0.16, 0.25, 1.6});
  const double at18 = trace_sign_quantity({0.363, 0.16, 0.25, 1.8});
  c.note("Q=1.6: " + num(at16) + " (expected -0.036091)");
  c.note("Q=1.8: " + num(at18) + " (expected 0.025983)");
  c.expect(std::abs(at16 - -0.036091) < 1e-5, "Q=1.6 value off by " + num(std::abs(at16 + 0.036091), 3));
  c.expect(std::abs(at18 - 0.025983) < 1e-5, "Q=1.8 value off by " + num(std::abs(at18 - 0.025983), 3));
  return c.done();
}

Outcome saddle_node() {
  Checks c;
  const double q = saddle_node_Q(0.363, 0.16, 0.25);
  c.note("Q_SN = " + num(q, 10));
  c.expect(std::round(q * 1e4) / 1e4 == 1.8281, "Q_SN does not round to 1.8281");
  const StabilityClass s = classify_collapsed({0.363, 0.16, 0.25, 1.8281});
  c.note(std::string("collapsed: ") + std::string(to_string(s.tag)));
  c.expect(s.tag == StabilityTag::SaddleNodeRepeller, "collapsed equilibrium is not a saddle-node repeller");
  return c.done();
}

Outcome homoclinic() {
  Checks c;
  const double q = homoclinic_Q(0.363, 0.16, 0.25, 1.695, 1.705);
  c.note("Q_hom = " + num(q, 10));
  c.expect(q >= 1.695 && q <= 1.705, "outside bracket");
  c.expect(std::abs(q - 1.70) <= 0.005, "farther than 0.005 from 1.70");
  return c.done();
}

Outcome census_single() {
  Checks c;
  const auto cs = find_limit_cycles({0.363, 0.16, 0.25, 1.705});
  c.note(std::to_string(cs.size()) + " cycle(s)");
  c.expect(cs.size() == 1, "expected exactly one cycle");
  if (cs.size() == 1) {
    c.note("floquet " + num(cs[0].floquet, 6));
    c.expect(!cs[0].stable, "cycle is not unstable");
  }
  return c.done();
}

Outcome census_double() {
  Checks c;
  const auto cs = find_limit_cycles({0.363, 0.17, 0.25, 1.77});
  c.note(std::to_string(cs.size()) + " cycle(s)");
  for (const auto& cy : cs)
    c.note(std::string(cy.stable ? "stable" : "unstable") + " at u=" + num(cy.section_point.u, 6) + " floquet " +
           num(cy.floquet, 6));
  c.expect(cs.size() == 2, "expected exactly two cycles");
  if (cs.size() == 2) {
    c.expect(!cs[0].stable, "inner cycle is not unstable");
    c.expect(cs[1].stable, "outer cycle is not stable");
  }
  return c.done();
}

Outcome portraits() {
  Checks c;
  const BasinGrid g{0, 1, 0, 1, 50, 50};

  const Params left{10.05, 1.05, 10.0, 3.05};
  c.expect(interior_equilibria(left).empty(), "left: interior equilibria present");
  c.expect(classify_carrying_capacity(left).tag == StabilityTag::Saddle, "left: (1,0) is not a saddle");
  c.expect(origin_region(left) == 3, "left: origin not in region III");
  c.expect(classify_origin(left).origin_sectors == OriginSectors::Elliptic_III, "left: origin lacks elliptic sector");
  const auto rl = basin_raster(left, g);
  c.note("left Origin cells " + std::to_string(rl.count(Attractor::Origin)) + "/2500");
  c.expect(rl.count(Attractor::Origin) == 2500, "left: raster not 100% Origin");

  const Params right{0.205, 0.22, 0.25, 1.8};
  c.expect(interior_equilibria(right).empty(), "right: interior equilibria present");
  c.expect(classify_carrying_capacity(right).tag == StabilityTag::StableNode, "right: (1,0) is not a stable node");
  const auto rr = basin_raster(right, g);
  c.note("right CarryingCapacity cells " + std::to_string(rr.count(Attractor::CarryingCapacity)) + "/2500, Origin " +
         std::to_string(rr.count(Attractor::Origin)));
  c.expect(rr.count(Attractor::CarryingCapacity) == 2500, "right: raster not 100% CarryingCapacity");
  return c.done();
}

Outcome diagram() {
  Checks c;
  const double M = 0.16, N = 0.25;
  const BifDiagram d = trace_diagram(M, N, {1.0, 3.0, 0.01}, {0.2, 0.9, 0.01});
  const auto at = curves_at(M, N, 0.363, 1.0, 3.0);
  c.expect(at.sn && at.hopf && at.hom, "a curve is missing at C=0.363");
  if (at.sn && at.hopf && at.hom) {
    c.note("C=0.363: SN " + num(*at.sn, 7) + ", H " + num(*at.hopf, 7) + ", Hom " + num(*at.hom, 7));
    c.expect(*at.sn > *at.hopf && *at.hopf > *at.hom, "ordering SN > H > Hom violated");
    c.expect(*at.hopf > 1.6 && *at.hopf < 1.8, "Hopf Q outside (1.6, 1.8)");
  }
  const double ds = closest_approach(d.sn_curve, d.bt_point), dh = closest_approach(d.hopf_curve, d.bt_point),
               dm = closest_approach(d.hom_curve, d.bt_point);
  c.note("distance to BT: SN " + num(ds, 3) + ", H " + num(dh, 3) + ", Hom " + num(dm, 3));
  c.expect(ds < 1e-2 && dh < 1e-2 && dm < 1e-2, "a curve stays farther than 1e-2 from BT");
  return c.done();
}

Outcome bt() {
  Checks c;
  const BTData b = bt_point(0.16, 0.25);
  const Matrix2 J = jacobian({b.C_star, 0.16, 0.25, b.Q_star}, b.E_point);
  const Matrix2 J2{J.a11 * J.a11 + J.a12 * J.a21, J.a11 * J.a12 + J.a12 * J.a22, J.a21 * J.a11 + J.a22 * J.a21,
                   J.a21 * J.a12 + J.a22 * J.a22};
  c.note("C*=" + num(b.C_star, 10) + " Q*=" + num(b.Q_star, 10));
  c.note("trace " + num(J.trace(), 3) + ", det " + num(J.det(), 3) + ", |J^2|/|J|^2 " +
         num(J2.max_abs() / (J.max_abs() * J.max_abs()), 3));
  c.expect(std::abs(J.trace()) < 1e-8, "trace not zero");
  c.expect(std::abs(J.det()) < 1e-8, "det not zero");
  c.expect(J.max_abs() > 0, "Jacobian is zero");
  c.expect(J2.max_abs() < 1e-8 * J.max_abs() * J.max_abs(), "J^2 does not vanish");
  c.note("G = " + num(b.G1, 4) + ", " + num(b.G2, 4) + ", " + num(b.G3, 4) + ", " + num(b.G4, 4));
  c.expect(b.G1 != 0 && b.G2 != 0 && b.G3 != 0 && b.G4 != 0, "some G_i vanishes");
  return c.done();
}

Outcome oracle() {
  Checks c;
  int mismatches = 0, grid = 0;
  double worst = 0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      const Params p{0.2 + 0.7 * (j + 0.5) / 50, 0.16, 0.25, 1.02 + 1.98 * (i + 0.5) / 50};
      const auto eq = interior_equilibria(p);
      const auto bf = brute_force_crossings(p);
      ++grid;
      if (eq.size() != bf.size()) {
        ++mismatches;
        continue;
      }
      for (std::size_t k = 0; k < eq.size(); ++k)
        worst = std::max({worst, std::abs(eq[k].point.u - bf[k].u), std::abs(eq[k].point.v - bf[k].v)});
    }
  c.note(std::to_string(grid) + " grid points, count mismatches " + std::to_string(mismatches) +
         ", worst position error " + num(worst, 3));
  c.expect(mismatches == 0 && worst < 1e-8, "closed form disagrees with brute force");
  return c.done();
}

Outcome jacobian_fd() {
  Checks c;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> par(0.05, 3.0), st(0.01, 1.5);
  const double h = 1e-6;
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const Params p{par(rng), par(rng), par(rng), par(rng)};
    const State s{st(rng), st(rng)};
    const Matrix2 j = jacobian(p, s);
    const State du = (vector_field(p, {s.u + h, s.v}) - vector_field(p, {s.u - h, s.v})) * (0.5 / h);
    const State dv = (vector_field(p, {s.u, s.v + h}) - vector_field(p, {s.u, s.v - h})) * (0.5 / h);
    const double scale = std::max(1.0, j.max_abs());
    worst = std::max({worst, std::abs(j.a11 - du.u) / scale, std::abs(j.a21 - du.v) / scale,
                      std::abs(j.a12 - dv.u) / scale, std::abs(j.a22 - dv.v) / scale});
  }
  c.note("1000 samples, worst relative error " + num(worst, 3));
  c.expect(worst < 1e-6, "relative error >= 1e-6");
  return c.done();
}

Outcome gamma_invariance() {
  Checks c;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> par(0.05, 2.0), st(0.01, 3.0);
  int bad = 0;
  for (int k = 0; k < 100; ++k) {
    const Params p{par(rng), par(rng), par(rng), 0.5 + par(rng)};
    const auto tr = integrate(p, {st(rng), st(rng)}, 500, 1e-10);
    bool entered = false, ok = true;
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
      const State& s = tr.samples[i].state;
      ok = ok && s.u >= 0 && s.v >= 0;
      if (s.u <= 1.0) entered = true;
      if (entered) ok = ok && s.u <= 1.0 + 1e-9;
      else if (i > 0) ok = ok && s.u <= tr.samples[i - 1].state.u + 1e-9;
    }
    ok = ok && tr.back().u <= 1.0 + 1e-6;
    bad += !ok;
  }
  c.note("100 trajectories, violations " + std::to_string(bad));
  c.expect(bad == 0, "trajectory left or failed to approach 0 <= u <= 1");
  return c.done();
}

Outcome hopf_eigenvalues() {
  Checks c;
  const double C = 0.363, M = 0.16;
  const auto curve = hopf_curve_UV(C, M);
  c.expect(curve.size() >= 20, "fewer than 20 Hopf samples");
  double worst = 0;
  int n = 0;
  for (std::size_t k = 0; n < 20 && k < curve.size(); k += curve.size() / 20, ++n) {
    const auto& h = curve[k];
    const auto ev = eigenvalues(hopf_chart_jacobian(C, h.M_hopf, h.U, h.V));
    worst = std::max(worst, std::abs(ev[0].real()) / std::abs(ev[0]));
    c.expect(ev[0].imag() != 0, "real eigenvalues at U=" + num(h.U, 4));
  }
  c.note(std::to_string(n) + " samples, worst |Re|/|lambda| " + num(worst, 3));
  c.expect(n == 20 && worst < 1e-9, "eigenvalues not purely imaginary");
  return c.done();
}

// Hopf points at fixed (C, M) = (0.363, 0.16) and preselected N: two with
// l1 < 0 and two with l1 > 0. Shifting Q to the side where trace J(P2) has
// the sign opposite to l1 must produce a single small cycle whose stability
// is that of the weak focus and whose amplitude halves when the shift
// quarters.
Outcome hopf_simulation() {
  Checks c;
  const double C = 0.363, M = 0.16;
  int super = 0, sub = 0;
  for (double N : {0.02, 0.04, 0.15, 0.25}) {
    const double qh = hopf_Q(C, M, N, 1.0 + 1e-9, saddle_node_Q(C, M, N));
    const State e = find_p2({C, M, N, qh}).value();
    const HopfData h = lyapunov_l1(C, e.u, e.v);
    const bool supercritical = h.l1 < 0;
    (supercritical ? super : sub)++;
    // trace J(P2) grows with Q through the Hopf point at these values
    const double side = supercritical ? 1.0 : -1.0;
    double amp[2] = {0, 0};
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      const Params p{C, M, N, qh + side * (k == 0 ? 2.5e-4 : 6.25e-5)};
      const State p2 = find_p2(p).value();
      const double tr = jacobian(p, p2).trace();
      ok = ok && (tr > 0) == supercritical;
      const auto cs = find_limit_cycles(p);
      ok = ok && cs.size() == 1 && cs[0].stable == supercritical;
      if (cs.size() == 1) amp[k] = cs[0].section_point.u - p2.u;
    }
    const double ratio = amp[1] > 0 ? amp[0] / amp[1] : 0;
    ok = ok && ratio > 1.6 && ratio < 2.6;
    c.note("N=" + num(N, 3) + " l1 " + num(h.l1, 3) + (supercritical ? " stable" : " unstable") +
           " cycle, amplitude ratio " + num(ratio, 4));
    c.expect(ok, "simulation contradicts l1 sign at N=" + num(N, 3));
  }
  c.expect(super == 2 && sub == 2, "sample set does not cover both signs twice");
  return c.done();
}

Outcome serialization() {
  Checks c;
  const Params a{0.363, 0.16, 0.25, 1.8}, b{0.363, 0.16, 0.25, 1.695}, cyc{0.363, 0.16, 0.25, 1.705};
  c.expect(round_trips(equilibria_report(a), "equilibria"), "equilibria");
  c.expect(round_trips(equilibria_report({10.05, 1.05, 10.0, 3.05}), "equilibria"), "equilibria (origin)");
  c.expect(round_trips(sigma_delta(a), "sigma"), "sigma");
  c.expect(round_trips(*classify_equilibrium(a, interior_equilibria(a)[0]), "classify"), "classify");
  c.expect(round_trips(hopf_curve_UV(0.363, 0.16, {1e-3, 0.999, 80}), "hopf-curve"), "hopf-curve");
  c.expect(round_trips(bautin_point(0.363, 0.16), "bautin"), "bautin");
  c.expect(round_trips(bt_point(0.16, 0.25), "bt"), "bt");
  c.expect(round_trips(find_limit_cycles(cyc), "cycles"), "cycles");
  c.expect(round_trips(basin_raster(b, {0.1, 0.9, 0.1, 0.5, 8, 5}), "basin"), "basin");
  c.expect(round_trips(HomoclinicReport{0.363, 0.16, 0.25, 1.695, 1.705, homoclinic_Q(0.363, 0.16, 0.25, 1.695, 1.705),
                                        "CarryingToOrigin", 1e-9, 4e-4},
                       "homoclinic"),
           "homoclinic");
  c.expect(round_trips(trace_diagram(0.16, 0.25, {1.0, 3.0, 0.01}, {0.6, 0.85, 0.1}, {3, 3, 20, 1, true}), "diagram"),
           "diagram");

  // Documents as written by every subcommand parse back to the same bytes.
  const std::vector<std::vector<std::string>> cmds = {
      {"equilibria", "--C", "0.363", "--M", "0.16", "--N", "0.25", "--Q", "1.8"},
      {"classify", "--C", "0.363", "--M", "0.16", "--N", "0.25", "--Q", "1.71"},
      {"sweep-sn", "--M", "0.16", "--N", "0.25", "--C", "0.3:0.8:0.1"},
      {"hopf-curve", "--C", "0.363", "--M", "0.16", "--grid-n", "40"},
      {"bautin", "--C", "0.363", "--M", "0.16"},
      {"bt", "--M", "0.16", "--N", "0.25"},
      {"cycles", "--C", "0.363", "--M", "0.16", "--N", "0.25", "--Q", "1.705"},
      {"homoclinic", "--C", "0.363", "--M", "0.16", "--N", "0.25", "--Q-lo", "1.695", "--Q-hi", "1.705"},
      {"basin", "--C", "0.363", "--M", "0.16", "--N", "0.25", "--Q", "1.695", "--nu", "5", "--nv", "4"},
      {"phase", "--C", "0.363", "--M", "0.16", "--N", "0.25", "--Q", "1.695", "--u0", "0.3", "--v0", "0.22"},
      {"diagram", "--M", "0.16", "--N", "0.25", "--Q", "1:3:0.01", "--C", "0.6:0.8:0.1", "--region-n", "2"}};
  int written = 0;
  for (auto args : cmds) {
    const std::string name = args[0];
    args.insert(args.end(), {"--format", "json", "--no-meta"});
    std::ostringstream out, err;
    const int code = cli::run_cli(args, out, err);
    c.expect(code == 0, name + " exited " + std::to_string(code));
    const Json j = Json::parse(out.str());
    c.expect(dump(j) == out.str() && j["kind"] == name, name + " text round trip");
    ++written;
  }
  c.note("11 typed products, " + std::to_string(written) + " CLI documents");
  return c.done();
}

}  // namespace

int main() {
  std::printf("Acceptance run\n");
  criterion("1", "trace-sign regression at (0.363, 0.16, 0.25, 1.6 / 1.8)", 1, trace_sign);
  criterion("2", "saddle-node location and collapsed type", 1, saddle_node);
  criterion("3", "homoclinic location near Q = 1.70", 60, homoclinic);
  criterion("4a", "limit-cycle census (0.363, 0.16, 0.25, 1.705)", 60, census_single);
  criterion("4b", "limit-cycle census (0.363, 0.17, 0.25, 1.77)", 60, census_double);
  criterion("5", "phase portraits of the two no-interior cases", 60, portraits);
  criterion("6", "bifurcation diagram skeleton at (M, N) = (0.16, 0.25)", 600, diagram);
  criterion("7", "Bogdanov-Takens certificate at (M, N) = (0.16, 0.25)", 1, bt);
  const int before = failures;
  const double props_start = total_seconds;
  criterion("8a", "equilibrium oracle on a 50x50 (Q, C) grid", 900, oracle);
  criterion("8b", "Jacobian against central differences", 900, jacobian_fd);
  criterion("8c", "invariance of 0 <= u <= 1", 900, gamma_invariance);
  criterion("8d", "Hopf samples have imaginary eigenvalues", 900, hopf_eigenvalues);
  criterion("8e", "l1 sign against simulated cycles", 900, hopf_simulation);
  criterion("8f", "JSON round trip of all products", 900, serialization);
  const double props = total_seconds - props_start;
  const bool eight = failures == before && props < 900;
  if (!eight && failures == before) ++failures;
  std::printf("%s 8   property suites (%.2f s of 900 s)\n", eight ? "PASS" : "FAIL", props);
  std::printf("%d failing line(s), %.1f s total\n", failures, total_seconds);
  return failures == 0 ? 0 : 1;
}
