#pragma once

// Command-line driver. run_cli() is the whole program minus process setup so
// that tests can call it in-process.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bazykin.hpp"

namespace bazykin::cli {

enum ExitCode : int { kOk = 0, kDomain = 2, kNotFound = 3, kUsage = 64, kIo = 74 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Product {
  std::string kind;
  Json json;
  CsvTable csv;
  std::optional<std::string> svg;
  int code = kOk;  // kNotFound when the result is reported but undetermined
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"equilibria", "classify", "sweep-sn", "hopf-curve", "bautin", "bt",
                                          "cycles",     "homoclinic", "basin",  "phase",      "diagram"};
  return c;
}

// Flat `key = value` lines, '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int n = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
  };
  while (std::getline(f, line)) {
    ++n;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    if (key.empty()) throw UsageError(path + ":" + std::to_string(n) + ": empty key");
    out.emplace_back(key, value);
  }
  return out;
}

// Pulls --config out of args and merges its entries; flags given on the
// command line win.
inline std::vector<std::string> merge_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file");
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (!path) return args;
  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  const bool has_command = std::any_of(args.begin(), args.end(), [](const std::string& a) {
    return std::find(commands().begin(), commands().end(), a) != commands().end();
  });
  std::vector<std::string> extra;
  for (const auto& [key, value] : read_config(*path)) {
    if (key == "command") {
      if (!has_command) args.insert(args.begin(), value);
      continue;
    }
    if (!given(key)) extra.push_back("--" + key + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

namespace detail {

inline ParamRange range_arg(const std::string& s, const char* flag) {
  try {
    return parse_range(s);
  } catch (const DomainError& e) {
    throw UsageError(std::string(flag) + ": " + e.what());
  }
}

inline std::string fmt(double x) { return format_number(x); }

struct Bounds {
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
  void add(double x, double y) {
    x_lo = std::min(x_lo, x), x_hi = std::max(x_hi, x), y_lo = std::min(y_lo, y), y_hi = std::max(y_hi, y);
  }
  std::string render(const std::vector<SvgPolyline>& lines, const std::vector<SvgCell>& cells = {}) const {
    if (!(x_hi >= x_lo)) return render_svg(lines, cells, 0, 1, 0, 1);
    const double px = std::max(1e-9, 0.05 * (x_hi - x_lo)), py = std::max(1e-9, 0.05 * (y_hi - y_lo));
    return render_svg(lines, cells, x_lo - px, x_hi + px, y_lo - py, y_hi + py);
  }
};

inline SvgPolyline polyline(const std::vector<State>& pts, Bounds& b, std::string color) {
  SvgPolyline l{{}, std::move(color)};
  for (const State& s : pts) {
    l.points.emplace_back(s.u, s.v);
    b.add(s.u, s.v);
  }
  return l;
}

inline SvgPolyline qc_polyline(const std::vector<QC>& pts, Bounds& b, std::string color) {
  SvgPolyline l{{}, std::move(color)};
  for (const QC& q : pts) {
    l.points.emplace_back(q.Q, q.C);
    b.add(q.Q, q.C);
  }
  return l;
}

}  // namespace detail

// Options shared by every subcommand.
struct Common {
  std::string out = "-";
  std::string format;
  std::string svg;
  bool no_meta = false;
};

struct ParamFlags {
  double C = NAN, M = NAN, N = NAN, Q = NAN;
  std::vector<double> dimensional;

  void add(CLI::App* s, bool need_C = true, bool need_Q = true) {
    if (need_C) s->add_option("--C", C, "conversion efficiency");
    s->add_option("--M", M, "scaled predator death rate");
    s->add_option("--N", N, "scaled density-dependent death rate");
    if (need_Q) s->add_option("--Q", Q, "scaled predation rate");
    if (need_C && need_Q)
      s->add_option("--dimensional", dimensional, "r K q a c mu0 mu1 (replaces C, M, N, Q)")->expected(7);
  }
  Params params() const {
    if (!dimensional.empty())
      return nondimensionalize({dimensional[0], dimensional[1], dimensional[2], dimensional[3], dimensional[4],
                                dimensional[5], dimensional[6]});
    for (auto [name, v] : {std::pair{"--C", C}, {"--M", M}, {"--N", N}, {"--Q", Q}})
      if (std::isnan(v)) throw UsageError(std::string(name) + " is required");
    Params p{C, M, N, Q};
    p.validate();
    return p;
  }
  void require(std::initializer_list<std::pair<const char*, double>> vals) const {
    for (auto [name, v] : vals)
      if (std::isnan(v)) throw UsageError(std::string(name) + " is required");
  }
};

inline Product equilibria_product(const Params& p) {
  const auto r = equilibria_report(p);
  CsvTable t{{"kind", "u", "v", "multiplicity", "stability", "origin_sectors"}, {}};
  for (const auto& e : r.equilibria)
    t.add({std::string(to_string(e.equilibrium.kind)), detail::fmt(e.equilibrium.point.u),
           detail::fmt(e.equilibrium.point.v), std::to_string(e.equilibrium.multiplicity),
           e.stability ? std::string(to_string(e.stability->tag)) : "",
           e.stability && e.stability->origin_sectors ? std::string(to_string(*e.stability->origin_sectors)) : ""});
  return {"equilibria", r, t, {}, kOk};
}

inline Product classify_product(const Params& p, const std::string& kind) {
  if (kind.empty()) {
    const DiagramRegion r = classify_region(p);
    return {"classify", Json{{"params", p}, {"region", std::string(to_string(r))}},
            CsvTable{{"C", "M", "N", "Q", "region"},
                     {{detail::fmt(p.C), detail::fmt(p.M), detail::fmt(p.N), detail::fmt(p.Q),
                       std::string(to_string(r))}}},
            {},
            kOk};
  }
  const auto k = bazykin::detail::enum_from(kind, bazykin::detail::kKinds, "equilibrium kind");
  for (const auto& e : equilibria_report(p).equilibria) {
    if (e.equilibrium.kind != k) continue;
    if (!e.stability) throw NotFoundError("stability of " + kind + " is undetermined");
    Json j{{"params", p}, {"equilibrium", e}};
    CsvTable t{{"kind", "u", "v", "stability", "origin_sectors"},
               {{kind, detail::fmt(e.equilibrium.point.u), detail::fmt(e.equilibrium.point.v),
                 std::string(to_string(e.stability->tag)),
                 e.stability->origin_sectors ? std::string(to_string(*e.stability->origin_sectors)) : ""}}};
    return {"classify", j, t, {}, kOk};
  }
  throw NotFoundError("no " + kind + " equilibrium at these parameters");
}

inline Product sweep_sn_product(double M, double N, const ParamRange& Cr) {
  CsvTable t{{"C", "Q_SN"}, {}};
  Json rows = Json::array();
  detail::Bounds b;
  SvgPolyline line{{}, "black"};
  for (double C : Cr.values()) {
    if (!(C > M)) continue;
    const double q = saddle_node_Q(C, M, N);
    t.add({detail::fmt(C), detail::fmt(q)});
    rows.push_back(Json{{"C", C}, {"Q_SN", q}});
    line.points.emplace_back(q, C);
    b.add(q, C);
  }
  return {"sweep-sn", Json{{"M", M}, {"N", N}, {"curve", rows}}, t, b.render({line}), kOk};
}

inline Product hopf_product(double C, double M, const HopfGrid& g) {
  const auto curve = hopf_curve_UV(C, M, g);
  detail::Bounds b;
  std::vector<SvgPolyline> lines;
  for (int branch : {0, 1}) {
    for (Criticality c : {Criticality::Supercritical, Criticality::Subcritical}) {
      SvgPolyline l{{}, c == Criticality::Supercritical ? "blue" : "red"};
      for (const auto& h : curve)
        if (h.branch == branch && h.L1_sign == c) {
          l.points.emplace_back(h.U, h.V);
          b.add(h.U, h.V);
        }
      if (!l.points.empty()) lines.push_back(std::move(l));
    }
  }
  return {"hopf-curve", Json{{"C", C}, {"M", M}, {"curve", curve}}, hopf_csv(C, curve), b.render(lines), kOk};
}

inline Product bautin_product(double C, double M, const HopfGrid& g) {
  const HopfData h = bautin_point(C, M, g);
  const auto [N, Q] = psi_map(C, h.M_hopf, h.U, h.V);
  return {"bautin", Json{{"C", C}, {"M", M}, {"N", N}, {"Q", Q}, {"point", h}}, hopf_csv(C, {h}), {}, kOk};
}

inline Product bt_product(double M, double N) {
  const BTData d = bt_point(M, N);
  CsvTable t{{"C_star", "Q_star", "u", "v", "z1", "z2", "G1", "G2", "G3", "G4", "det_dpsi", "a20", "b20", "b11",
              "nf_sign"},
             {}};
  t.add({detail::fmt(d.C_star), detail::fmt(d.Q_star), detail::fmt(d.E_point.u), detail::fmt(d.E_point.v),
         detail::fmt(d.z1), detail::fmt(d.z2), detail::fmt(d.G1), detail::fmt(d.G2), detail::fmt(d.G3),
         detail::fmt(d.G4), detail::fmt(d.det_dpsi), detail::fmt(d.a20), detail::fmt(d.b20), detail::fmt(d.b11),
         std::to_string(d.nf_sign)});
  return {"bt", Json{{"M", M}, {"N", N}, {"bt", d}}, t, {}, kOk};
}

inline Product cycles_product(const Params& p) {
  const auto cycles = find_limit_cycles(p);
  detail::Bounds b;
  std::vector<SvgPolyline> lines;
  for (const auto& c : cycles) lines.push_back(detail::polyline(c.points, b, c.stable ? "blue" : "red"));
  return {"cycles", Json{{"params", p}, {"cycles", cycles}}, cycles_csv(cycles), b.render(lines), kOk};
}

inline Product homoclinic_product(double C, double M, double N, double lo, double hi) {
  HomoclinicReport r;
  r.C = C, r.M = M, r.N = N, r.Q_lo = lo, r.Q_hi = hi;
  r.Q_hom = homoclinic_Q(C, M, N, lo, hi);
  const Params p{C, M, N, r.Q_hom};
  const auto sep = separatrix_separation(p);
  if (!sep) throw NotFoundError("separation undefined at the located Q");
  const auto cert = connection_certificate(p);
  r.connection = std::string(to_string(sep->kind));
  r.separation = cert.separation;
  r.hausdorff = cert.hausdorff;
  CsvTable t{{"C", "M", "N", "Q_lo", "Q_hi", "Q_hom", "connection", "separation", "hausdorff"},
             {{detail::fmt(C), detail::fmt(M), detail::fmt(N), detail::fmt(lo), detail::fmt(hi),
               detail::fmt(r.Q_hom), r.connection, detail::fmt(r.separation), detail::fmt(r.hausdorff)}}};
  detail::Bounds b;
  std::vector<SvgPolyline> lines{detail::polyline(sep->unstable, b, "red"),
                                 detail::polyline(sep->stable, b, "blue")};
  return {"homoclinic", r, t, b.render(lines), kOk};
}

inline Product basin_product(const Params& p, const BasinGrid& g, unsigned threads) {
  const BasinRaster r = basin_raster(p, g, {}, threads);
  std::vector<SvgCell> cells;
  const double du = (g.u_hi - g.u_lo) / g.n_u, dv = (g.v_hi - g.v_lo) / g.n_v;
  for (int j = 0; j < g.n_v; ++j)
    for (int i = 0; i < g.n_u; ++i)
      cells.push_back({g.u_lo + i * du, g.v_lo + j * dv, g.u_lo + (i + 1) * du, g.v_lo + (j + 1) * dv,
                       attractor_color(r.at(i, j))});
  Json counts = Json::object();
  for (Attractor a : bazykin::detail::kAttractors) counts[std::string(to_string(a))] = r.count(a);
  Json j = r;
  j["counts"] = counts;
  return {"basin", Json{{"params", p}, {"raster", j}}, basin_csv(r),
          render_svg({}, cells, g.u_lo, g.u_hi, g.v_lo, g.v_hi), r.count(Attractor::Undetermined) ? kNotFound : kOk};
}

inline Product phase_product(const Params& p, State s0, double t_end, double tol) {
  if (!(tol >= 1e-13 && tol <= 1e-3)) throw UsageError("--tol must lie in [1e-13, 1e-3]");
  if (!(t_end > 0)) throw UsageError("--t-end must be positive");
  const Trajectory tr = integrate(p, s0, t_end, tol);
  const Attractor a = omega_limit(p, s0);
  detail::Bounds b;
  std::vector<SvgPolyline> lines{detail::polyline(states_of(tr), b, "black")};
  Json j{{"params", p},
         {"start", s0},
         {"t_end", t_end},
         {"end", tr.back()},
         {"omega_limit", std::string(to_string(a))},
         {"samples", tr.samples.size()}};
  return {"phase", j, trajectory_csv(tr), b.render(lines), a == Attractor::Undetermined ? kNotFound : kOk};
}

inline Product diagram_product(double M, double N, const ParamRange& Qr, const ParamRange& Cr,
                               const DiagramOptions& o) {
  const BifDiagram d = trace_diagram(M, N, Qr, Cr, o);
  CsvTable t{{"curve", "Q", "C", "region"}, {}};
  auto rows = [&](const char* name, const std::vector<QC>& c) {
    for (const QC& q : c) t.add({name, detail::fmt(q.Q), detail::fmt(q.C), ""});
  };
  rows("sn", d.sn_curve);
  rows("hopf", d.hopf_curve);
  rows("hom", d.hom_curve);
  rows("bt", {d.bt_point});
  for (const auto& r : d.region_labels)
    t.add({"region", detail::fmt(r.Q), detail::fmt(r.C), std::string(to_string(r.region))});
  detail::Bounds b;
  std::vector<SvgPolyline> lines{detail::qc_polyline(d.sn_curve, b, "black"),
                                 detail::qc_polyline(d.hopf_curve, b, "red"),
                                 detail::qc_polyline(d.hom_curve, b, "blue")};
  return {"diagram", d, t, b.render(lines), kOk};
}

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equilibrium, bifurcation and dynamics analysis of the ratio-dependent Bazykin model", "bazykin"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common com;
  ParamFlags pf;
  std::string kind, C_range_s, Q_range_s, u_range_s = "0:1", v_range_s = "0:1";
  double Q_lo = NAN, Q_hi = NAN, u0 = NAN, v0 = NAN, t_end = 200, tol = 1e-10;
  int grid_n = 2000, n_u = 50, n_v = 50, region_n = 12, hom_scan = 40;
  unsigned threads = 0;

  std::map<std::string, CLI::App*> sub;
  for (const auto& name : commands()) {
    auto* s = app.add_subcommand(name);
    s->add_option("--out,-o", com.out, "output path, - for stdout");
    s->add_option("--format,-f", com.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--svg", com.svg, "also write an SVG plot to this path");
    s->add_flag("--no-meta", com.no_meta, "omit the generated_at timestamp");
    sub[name] = s;
  }
  sub["equilibria"]->description("equilibria and their stability");
  pf.add(sub["equilibria"]);
  sub["classify"]->description("parameter-region label, or stability of one equilibrium with --kind");
  pf.add(sub["classify"]);
  sub["classify"]->add_option("--kind", kind, "Origin, CarryingCapacity, P1, P2 or CollapsedE");
  sub["sweep-sn"]->description("saddle-node Q over a C range");
  pf.add(sub["sweep-sn"], false, false);
  sub["sweep-sn"]->add_option("--C", C_range_s, "lo:hi:step")->required();
  sub["hopf-curve"]->description("Hopf curve in the (U, V) chart with first Lyapunov coefficients");
  pf.add(sub["hopf-curve"], true, false);
  sub["bautin"]->description("Bautin point on the Hopf curve");
  pf.add(sub["bautin"], true, false);
  for (auto* s : {sub["hopf-curve"], sub["bautin"]}) s->add_option("--grid-n", grid_n, "U samples")->check(CLI::Range(10, 1000000));
  sub["bt"]->description("Bogdanov-Takens point and normal-form coefficients");
  pf.add(sub["bt"], false, false);
  sub["cycles"]->description("limit cycles around P2");
  pf.add(sub["cycles"]);
  sub["homoclinic"]->description("homoclinic Q in a bracket");
  pf.add(sub["homoclinic"], true, false);
  sub["homoclinic"]->add_option("--Q-lo", Q_lo)->required();
  sub["homoclinic"]->add_option("--Q-hi", Q_hi)->required();
  sub["basin"]->description("basin-of-attraction raster");
  pf.add(sub["basin"]);
  sub["basin"]->add_option("--nu", n_u)->check(CLI::PositiveNumber);
  sub["basin"]->add_option("--nv", n_v)->check(CLI::PositiveNumber);
  sub["basin"]->add_option("--u-range", u_range_s, "lo:hi (step ignored if given)");
  sub["basin"]->add_option("--v-range", v_range_s, "lo:hi (step ignored if given)");
  sub["basin"]->add_option("--threads", threads, "worker count, capped by BAZYKIN_THREADS");
  sub["phase"]->description("trajectory from one initial state");
  pf.add(sub["phase"]);
  sub["phase"]->add_option("--u0", u0)->required();
  sub["phase"]->add_option("--v0", v0)->required();
  sub["phase"]->add_option("--t-end", t_end);
  sub["phase"]->add_option("--tol", tol, "in [1e-13, 1e-3]");
  sub["diagram"]->description("(Q, C) bifurcation diagram");
  pf.add(sub["diagram"], false, false);
  sub["diagram"]->add_option("--Q", Q_range_s, "lo:hi:step")->required();
  sub["diagram"]->add_option("--C", C_range_s, "lo:hi:step")->required();
  sub["diagram"]->add_option("--region-n", region_n, "region samples per axis (0 for none)")->check(CLI::NonNegativeNumber);
  sub["diagram"]->add_option("--hom-scan", hom_scan)->check(CLI::Range(2, 100000));

  auto usage = [&](const std::string& msg) {
    if (!msg.empty()) err << "error: " << msg << "\n";
    const CLI::App* active = &app;
    for (auto* s : app.get_subcommands()) active = s;
    err << active->help();
    return kUsage;
  };

  try {
    args = merge_config(std::move(args));
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    const CLI::App* active = &app;
    for (auto* s : app.get_subcommands()) active = s;
    out << active->help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return usage(e.what());
  } catch (const UsageError& e) {
    return usage(e.what());
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  Product prod;
  try {
    if (cmd == "equilibria") {
      prod = equilibria_product(pf.params());
    } else if (cmd == "classify") {
      prod = classify_product(pf.params(), kind);
    } else if (cmd == "sweep-sn") {
      pf.require({{"--M", pf.M}, {"--N", pf.N}});
      prod = sweep_sn_product(pf.M, pf.N, detail::range_arg(C_range_s, "--C"));
    } else if (cmd == "hopf-curve" || cmd == "bautin") {
      pf.require({{"--C", pf.C}, {"--M", pf.M}});
      const HopfGrid g{1e-3, 0.999, grid_n};
      prod = cmd == "bautin" ? bautin_product(pf.C, pf.M, g) : hopf_product(pf.C, pf.M, g);
    } else if (cmd == "bt") {
      pf.require({{"--M", pf.M}, {"--N", pf.N}});
      prod = bt_product(pf.M, pf.N);
    } else if (cmd == "cycles") {
      prod = cycles_product(pf.params());
    } else if (cmd == "homoclinic") {
      pf.require({{"--C", pf.C}, {"--M", pf.M}, {"--N", pf.N}});
      prod = homoclinic_product(pf.C, pf.M, pf.N, Q_lo, Q_hi);
    } else if (cmd == "basin") {
      auto span = [](const std::string& s, const char* flag) {
        const auto n = std::count(s.begin(), s.end(), ':');
        return detail::range_arg(n == 1 ? s + ":1" : s, flag);
      };
      const ParamRange ur = span(u_range_s, "--u-range"), vr = span(v_range_s, "--v-range");
      prod = basin_product(pf.params(), {ur.lo, ur.hi, vr.lo, vr.hi, n_u, n_v}, threads);
    } else if (cmd == "phase") {
      prod = phase_product(pf.params(), {u0, v0}, t_end, tol);
    } else if (cmd == "diagram") {
      pf.require({{"--M", pf.M}, {"--N", pf.N}});
      DiagramOptions o;
      o.region_nq = o.region_nc = region_n;
      o.hom_scan = hom_scan;
      prod = diagram_product(pf.M, pf.N, detail::range_arg(Q_range_s, "--Q"), detail::range_arg(C_range_s, "--C"), o);
    }
  } catch (const UsageError& e) {
    return usage(e.what());
  } catch (const NotFoundError& e) {
    err << "not found: " << e.what() << "\n";
    return kNotFound;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "domain error: " << e.what() << "\n";
    return kDomain;
  }

  static const std::vector<std::string> csv_default{"sweep-sn", "hopf-curve", "basin", "phase"};
  const std::string format =
      !com.format.empty() ? com.format
                          : (std::find(csv_default.begin(), csv_default.end(), cmd) != csv_default.end() ? "csv"
                                                                                                         : "json");
  std::string text;
  if (format == "json") {
    text = dump(document(prod.kind, prod.json, !com.no_meta));
  } else {
    if (!com.no_meta) text = "# generated_at: " + utc_timestamp() + "\r\n";
    text += prod.csv.str();
  }
  try {
    if (!com.svg.empty()) {
      if (!prod.svg) {
        err << "error: " << cmd << " has no plot\n";
        return kUsage;
      }
      write_output(com.svg, *prod.svg);
    }
    if (com.out.empty() || com.out == "-") {
      out << text;
      out.flush();
    } else {
      write_output(com.out, text);
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
  return prod.code;
}

}  // namespace bazykin::cli
