#pragma once

// Serialization of analysis products: RFC-4180 CSV with 17 significant
// digits, JSON documents with a fixed key order and "schema": 1, range and
// output helpers, and a minimal SVG renderer.

#include <array>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bazykin/bifurcation.hpp"
#include "bazykin/diagram.hpp"
#include "bazykin/dynamics.hpp"
#include "bazykin/equilibria.hpp"
#include "bazykin/errors.hpp"
#include "bazykin/model.hpp"

namespace bazykin {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------- numbers

inline std::string format_number(double x) {
  std::array<char, 40> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  return std::string(buf.data(), r.ptr);
}

inline double parse_number(std::string_view s) {
  double x = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), x);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw DomainError("not a number: " + std::string(s));
  return x;
}

// lo:hi:step
inline ParamRange parse_range(std::string_view s) {
  const auto a = s.find(':');
  const auto b = a == std::string_view::npos ? a : s.find(':', a + 1);
  if (a == std::string_view::npos || b == std::string_view::npos)
    throw DomainError("range must be lo:hi:step, got " + std::string(s));
  ParamRange r{parse_number(s.substr(0, a)), parse_number(s.substr(a + 1, b - a - 1)), parse_number(s.substr(b + 1))};
  if (!(r.step > 0) || !(r.hi >= r.lo)) throw DomainError("range needs lo <= hi and step > 0");
  return r;
}

// -------------------------------------------------------------------- CSV

inline std::string csv_field(std::string_view f) {
  if (f.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(f);
  std::string out = "\"";
  for (char c : f) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out += ',';
        out += csv_field(r[i]);
      }
      out += "\r\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
  }
};

// Parses RFC-4180 text (header included as the first record).
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        rec.push_back(std::move(field));
        out.push_back(std::move(rec));
      }
      rec.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw DomainError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    rec.push_back(std::move(field));
    out.push_back(std::move(rec));
  }
  return out;
}

// ------------------------------------------------------------------ enums

namespace detail {

template <class E, std::size_t K>
E enum_from(std::string_view s, const std::array<E, K>& all, const char* what) {
  for (E e : all)
    if (to_string(e) == s) return e;
  throw DomainError(std::string("unknown ") + what + ": " + std::string(s));
}

inline constexpr std::array kCaseLabels{CaseLabel::NoInterior_ClessM,    CaseLabel::OneInterior_Sigma2Neg,
                                        CaseLabel::Collision_Sigma2Zero, CaseLabel::NoInterior_DeltaNeg,
                                        CaseLabel::DoubleRoot_DeltaZero, CaseLabel::TwoInterior,
                                        CaseLabel::NoInterior_NleM};
inline constexpr std::array kKinds{EquilibriumKind::Origin, EquilibriumKind::CarryingCapacity, EquilibriumKind::P1,
                                   EquilibriumKind::P2, EquilibriumKind::CollapsedE};
inline constexpr std::array kTags{StabilityTag::Saddle,          StabilityTag::StableNode,
                                  StabilityTag::UnstableNode,    StabilityTag::StableFocus,
                                  StabilityTag::UnstableFocus,   StabilityTag::WeakFocus,
                                  StabilityTag::SaddleNodeAttractor, StabilityTag::SaddleNodeRepeller,
                                  StabilityTag::DegenerateOrigin};
inline constexpr std::array kSectors{OriginSectors::SaddleRepelling_I, OriginSectors::AttractingElliptic_II,
                                     OriginSectors::Elliptic_III,      OriginSectors::Saddle_IV,
                                     OriginSectors::AttractingSaddle_V, OriginSectors::EllipticRepelling_VI};
inline constexpr std::array kCriticality{Criticality::Supercritical, Criticality::Subcritical, Criticality::Degenerate};
inline constexpr std::array kAttractors{Attractor::Origin, Attractor::CarryingCapacity, Attractor::P2,
                                        Attractor::StableCycle, Attractor::Undetermined};
inline constexpr std::array kRegions{DiagramRegion::GlobalExtinction, DiagramRegion::P2Unstable,
                                     DiagramRegion::UnstableCycleAroundP2, DiagramRegion::P2StableNoCycle};

inline Json point_array(const std::vector<State>& pts) {
  Json a = Json::array();
  for (const State& s : pts) a.push_back({s.u, s.v});
  return a;
}

inline std::vector<State> points_from(const Json& j) {
  std::vector<State> out;
  for (const auto& e : j) out.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  return out;
}

inline Json qc_array(const std::vector<QC>& c) {
  Json a = Json::array();
  for (const QC& q : c) a.push_back({q.Q, q.C});
  return a;
}

inline std::vector<QC> qc_from(const Json& j) {
  std::vector<QC> out;
  for (const auto& e : j) out.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
  return out;
}

}  // namespace detail

// ------------------------------------------------------------------- JSON

inline void to_json(Json& j, const State& s) { j = Json{{"u", s.u}, {"v", s.v}}; }
inline void from_json(const Json& j, State& s) { s = {j.at("u").get<double>(), j.at("v").get<double>()}; }

inline void to_json(Json& j, const Params& p) { j = Json{{"C", p.C}, {"M", p.M}, {"N", p.N}, {"Q", p.Q}}; }
inline void from_json(const Json& j, Params& p) {
  p = {j.at("C").get<double>(), j.at("M").get<double>(), j.at("N").get<double>(), j.at("Q").get<double>()};
}

inline void to_json(Json& j, const Matrix2& m) { j = Json::array({{m.a11, m.a12}, {m.a21, m.a22}}); }
inline void from_json(const Json& j, Matrix2& m) {
  m = {j.at(0).at(0).get<double>(), j.at(0).at(1).get<double>(), j.at(1).at(0).get<double>(),
       j.at(1).at(1).get<double>()};
}

inline void to_json(Json& j, const SigmaSet& s) {
  j = Json{{"sigma1", s.sigma1}, {"sigma2", s.sigma2}, {"sigma3", s.sigma3},
           {"delta", s.delta},   {"case", std::string(to_string(s.case_label))}};
}
inline void from_json(const Json& j, SigmaSet& s) {
  s.sigma1 = j.at("sigma1").get<double>();
  s.sigma2 = j.at("sigma2").get<double>();
  s.sigma3 = j.at("sigma3").get<double>();
  s.delta = j.at("delta").get<double>();
  s.case_label = detail::enum_from(j.at("case").get<std::string>(), detail::kCaseLabels, "case label");
}

inline void to_json(Json& j, const StabilityClass& c) {
  j = Json{{"tag", std::string(to_string(c.tag))}};
  j["origin_sectors"] = c.origin_sectors ? Json(std::string(to_string(*c.origin_sectors))) : Json(nullptr);
}
inline void from_json(const Json& j, StabilityClass& c) {
  c.tag = detail::enum_from(j.at("tag").get<std::string>(), detail::kTags, "stability tag");
  const auto& s = j.at("origin_sectors");
  c.origin_sectors.reset();
  if (!s.is_null()) c.origin_sectors = detail::enum_from(s.get<std::string>(), detail::kSectors, "origin sectors");
}

struct ClassifiedEquilibrium {
  Equilibrium equilibrium;
  std::optional<StabilityClass> stability;
  bool operator==(const ClassifiedEquilibrium&) const = default;
};

struct EquilibriaReport {
  Params params;
  SigmaSet sigma;
  std::vector<ClassifiedEquilibrium> equilibria;  // boundary first, then interior
  bool operator==(const EquilibriaReport&) const = default;
};

inline EquilibriaReport equilibria_report(const Params& p) {
  p.validate();
  EquilibriaReport r{p, sigma_delta(p), {}};
  auto all = boundary_equilibria(p);
  for (const auto& e : interior_equilibria(p)) all.push_back(e);
  for (const auto& e : all) r.equilibria.push_back({e, classify_equilibrium(p, e)});
  return r;
}

inline void to_json(Json& j, const ClassifiedEquilibrium& c) {
  j = Json{{"kind", std::string(to_string(c.equilibrium.kind))},
           {"u", c.equilibrium.point.u},
           {"v", c.equilibrium.point.v},
           {"multiplicity", c.equilibrium.multiplicity}};
  j["stability"] = c.stability ? Json(*c.stability) : Json(nullptr);
}
inline void from_json(const Json& j, ClassifiedEquilibrium& c) {
  c.equilibrium.kind = detail::enum_from(j.at("kind").get<std::string>(), detail::kKinds, "equilibrium kind");
  c.equilibrium.point = {j.at("u").get<double>(), j.at("v").get<double>()};
  c.equilibrium.multiplicity = j.at("multiplicity").get<int>();
  c.stability.reset();
  if (!j.at("stability").is_null()) c.stability = j.at("stability").get<StabilityClass>();
}

inline void to_json(Json& j, const EquilibriaReport& r) {
  j = Json{{"params", r.params}, {"sigma", r.sigma}, {"equilibria", r.equilibria}};
}
inline void from_json(const Json& j, EquilibriaReport& r) {
  r.params = j.at("params").get<Params>();
  r.sigma = j.at("sigma").get<SigmaSet>();
  r.equilibria = j.at("equilibria").get<std::vector<ClassifiedEquilibrium>>();
}

inline void to_json(Json& j, const HopfData& h) {
  j = Json{{"U", h.U},   {"V", h.V},   {"M_hopf", h.M_hopf}, {"D_H", h.D_H},
           {"w", h.w},   {"l1", h.l1}, {"L1", h.L1},         {"L1_sign", std::string(to_string(h.L1_sign))},
           {"branch", h.branch}};
}
inline void from_json(const Json& j, HopfData& h) {
  h.U = j.at("U").get<double>();
  h.V = j.at("V").get<double>();
  h.M_hopf = j.at("M_hopf").get<double>();
  h.D_H = j.at("D_H").get<double>();
  h.w = j.at("w").get<double>();
  h.l1 = j.at("l1").get<double>();
  h.L1 = j.at("L1").get<double>();
  h.L1_sign = detail::enum_from(j.at("L1_sign").get<std::string>(), detail::kCriticality, "criticality");
  h.branch = j.at("branch").get<int>();
}

inline void to_json(Json& j, const BTData& b) {
  j = Json{{"C_star", b.C_star}, {"Q_star", b.Q_star}, {"E_point", b.E_point}, {"z1", b.z1},
           {"z2", b.z2},         {"G1", b.G1},         {"G2", b.G2},           {"G3", b.G3},
           {"G4", b.G4},         {"det_dpsi", b.det_dpsi}, {"a20", b.a20},     {"b20", b.b20},
           {"b11", b.b11},       {"nf_sign", b.nf_sign},   {"jacobian", b.jacobian}};
}
inline void from_json(const Json& j, BTData& b) {
  b.C_star = j.at("C_star").get<double>();
  b.Q_star = j.at("Q_star").get<double>();
  b.E_point = j.at("E_point").get<State>();
  b.z1 = j.at("z1").get<double>();
  b.z2 = j.at("z2").get<double>();
  b.G1 = j.at("G1").get<double>();
  b.G2 = j.at("G2").get<double>();
  b.G3 = j.at("G3").get<double>();
  b.G4 = j.at("G4").get<double>();
  b.det_dpsi = j.at("det_dpsi").get<double>();
  b.a20 = j.at("a20").get<double>();
  b.b20 = j.at("b20").get<double>();
  b.b11 = j.at("b11").get<double>();
  b.nf_sign = j.at("nf_sign").get<int>();
  b.jacobian = j.at("jacobian").get<Matrix2>();
}

inline void to_json(Json& j, const LimitCycle& c) {
  j = Json{{"section_point", c.section_point},
           {"period", c.period},
           {"floquet", c.floquet},
           {"stable", c.stable},
           {"points", detail::point_array(c.points)}};
}
inline void from_json(const Json& j, LimitCycle& c) {
  c.section_point = j.at("section_point").get<State>();
  c.period = j.at("period").get<double>();
  c.floquet = j.at("floquet").get<double>();
  c.stable = j.at("stable").get<bool>();
  c.points = detail::points_from(j.at("points"));
}

inline void to_json(Json& j, const BasinGrid& g) {
  j = Json{{"u_lo", g.u_lo}, {"u_hi", g.u_hi}, {"v_lo", g.v_lo}, {"v_hi", g.v_hi}, {"n_u", g.n_u}, {"n_v", g.n_v}};
}
inline void from_json(const Json& j, BasinGrid& g) {
  g = {j.at("u_lo").get<double>(), j.at("u_hi").get<double>(), j.at("v_lo").get<double>(),
       j.at("v_hi").get<double>(), j.at("n_u").get<int>(),     j.at("n_v").get<int>()};
}

inline void to_json(Json& j, const BasinRaster& r) {
  Json labels = Json::array();
  for (Attractor a : r.labels) labels.push_back(std::string(to_string(a)));
  j = Json{{"grid", r.grid}, {"labels", labels}};
}
inline void from_json(const Json& j, BasinRaster& r) {
  r.grid = j.at("grid").get<BasinGrid>();
  r.labels.clear();
  for (const auto& s : j.at("labels"))
    r.labels.push_back(detail::enum_from(s.get<std::string>(), detail::kAttractors, "attractor"));
  if (r.labels.size() != static_cast<std::size_t>(r.grid.n_u) * r.grid.n_v)
    throw DomainError("basin label count does not match the grid");
}

inline void to_json(Json& j, const BifDiagram& d) {
  Json regions = Json::array();
  for (const auto& r : d.region_labels)
    regions.push_back(Json{{"Q", r.Q}, {"C", r.C}, {"region", std::string(to_string(r.region))}});
  j = Json{{"sn_curve", detail::qc_array(d.sn_curve)},
           {"hopf_curve", detail::qc_array(d.hopf_curve)},
           {"hom_curve", detail::qc_array(d.hom_curve)},
           {"bt_point", Json::array({d.bt_point.Q, d.bt_point.C})},
           {"region_labels", regions}};
}
inline void from_json(const Json& j, BifDiagram& d) {
  d.sn_curve = detail::qc_from(j.at("sn_curve"));
  d.hopf_curve = detail::qc_from(j.at("hopf_curve"));
  d.hom_curve = detail::qc_from(j.at("hom_curve"));
  d.bt_point = {j.at("bt_point").at(0).get<double>(), j.at("bt_point").at(1).get<double>()};
  d.region_labels.clear();
  for (const auto& r : j.at("region_labels"))
    d.region_labels.push_back({r.at("Q").get<double>(), r.at("C").get<double>(),
                               detail::enum_from(r.at("region").get<std::string>(), detail::kRegions, "region")});
}

struct HomoclinicReport {
  double C = 0, M = 0, N = 0;
  double Q_lo = 0, Q_hi = 0;
  double Q_hom = 0;
  std::string connection;
  double separation = 0;
  double hausdorff = 0;
  bool operator==(const HomoclinicReport&) const = default;
};

inline void to_json(Json& j, const HomoclinicReport& h) {
  j = Json{{"C", h.C},         {"M", h.M},           {"N", h.N},
           {"Q_lo", h.Q_lo},   {"Q_hi", h.Q_hi},     {"Q_hom", h.Q_hom},
           {"connection", h.connection}, {"separation", h.separation}, {"hausdorff", h.hausdorff}};
}
inline void from_json(const Json& j, HomoclinicReport& h) {
  h.C = j.at("C").get<double>();
  h.M = j.at("M").get<double>();
  h.N = j.at("N").get<double>();
  h.Q_lo = j.at("Q_lo").get<double>();
  h.Q_hi = j.at("Q_hi").get<double>();
  h.Q_hom = j.at("Q_hom").get<double>();
  h.connection = j.at("connection").get<std::string>();
  h.separation = j.at("separation").get<double>();
  h.hausdorff = j.at("hausdorff").get<double>();
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// {"schema": 1, "kind": ..., ["generated_at": ...,] "data": ...}
inline Json document(std::string_view kind, Json data, bool meta = false) {
  Json j{{"schema", kSchemaVersion}, {"kind", std::string(kind)}};
  if (meta) j["generated_at"] = utc_timestamp();
  j["data"] = std::move(data);
  return j;
}

template <class T>
T from_document(const Json& j, std::string_view kind) {
  if (j.at("schema").get<int>() != kSchemaVersion) throw DomainError("unsupported schema version");
  if (j.at("kind").get<std::string>() != kind) throw DomainError("document kind mismatch");
  return j.at("data").get<T>();
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ------------------------------------------------------------ CSV products

inline CsvTable basin_csv(const BasinRaster& r) {
  CsvTable t{{"u", "v", "label"}, {}};
  for (int j = 0; j < r.grid.n_v; ++j)
    for (int i = 0; i < r.grid.n_u; ++i) {
      const State c = r.grid.center(i, j);
      t.add({format_number(c.u), format_number(c.v), std::string(to_string(r.at(i, j)))});
    }
  return t;
}

inline CsvTable trajectory_csv(const Trajectory& tr) {
  CsvTable t{{"t", "u", "v"}, {}};
  for (const auto& s : tr.samples) t.add({format_number(s.t), format_number(s.state.u), format_number(s.state.v)});
  return t;
}

inline CsvTable hopf_csv(double C, const std::vector<HopfData>& curve) {
  CsvTable t{{"U", "V", "M_hopf", "N", "Q", "D_H", "w", "l1", "L1", "L1_sign", "branch"}, {}};
  for (const auto& h : curve) {
    const auto [N, Q] = psi_map(C, h.M_hopf, h.U, h.V);
    t.add({format_number(h.U), format_number(h.V), format_number(h.M_hopf), format_number(N), format_number(Q),
           format_number(h.D_H), format_number(h.w), format_number(h.l1), format_number(h.L1),
           std::string(to_string(h.L1_sign)), std::to_string(h.branch)});
  }
  return t;
}

inline CsvTable cycles_csv(const std::vector<LimitCycle>& cycles) {
  CsvTable t{{"cycle", "stable", "u", "v"}, {}};
  for (std::size_t k = 0; k < cycles.size(); ++k)
    for (const State& s : cycles[k].points)
      t.add({std::to_string(k), cycles[k].stable ? "true" : "false", format_number(s.u), format_number(s.v)});
  return t;
}

// ------------------------------------------------------------------ output

// Writes to `path`, or to stdout for "-" or an empty path.
inline void write_output(const std::string& path, std::string_view content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << content;
  f.flush();
  if (!f) throw IoError("write failed for " + path);
}

// -------------------------------------------------------------------- SVG

struct SvgPolyline {
  std::vector<std::pair<double, double>> points;
  std::string color = "black";
};

struct SvgCell {
  double x0, y0, x1, y1;
  std::string color;
};

// Static plot in data coordinates [x_lo, x_hi] x [y_lo, y_hi], y up.
inline std::string render_svg(const std::vector<SvgPolyline>& lines, const std::vector<SvgCell>& cells, double x_lo,
                              double x_hi, double y_lo, double y_hi, int size = 600) {
  const double sx = size / (x_hi - x_lo), sy = size / (y_hi - y_lo);
  auto X = [&](double x) { return format_number((x - x_lo) * sx); };
  auto Y = [&](double y) { return format_number(size - (y - y_lo) * sy); };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
     << size << ' ' << size << "\">\n";
  for (const auto& c : cells)
    os << "<rect x=\"" << X(c.x0) << "\" y=\"" << Y(c.y1) << "\" width=\"" << format_number((c.x1 - c.x0) * sx)
       << "\" height=\"" << format_number((c.y1 - c.y0) * sy) << "\" fill=\"" << c.color << "\"/>\n";
  for (const auto& l : lines) {
    os << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < l.points.size(); ++i) {
      if (i) os << ' ';
      os << X(l.points[i].first) << ',' << Y(l.points[i].second);
    }
    os << "\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

inline std::string attractor_color(Attractor a) {
  switch (a) {
    case Attractor::Origin: return "#d9d9d9";
    case Attractor::CarryingCapacity: return "#9ecae1";
    case Attractor::P2: return "#fdae6b";
    case Attractor::StableCycle: return "#fee391";
    case Attractor::Undetermined: return "#ffffff";
  }
  return "#ffffff";
}

}  // namespace bazykin
