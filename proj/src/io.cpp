#include "bifurcate/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "bifurcate/spectral.hpp"

namespace bifurcate::io {

namespace {

double d(Real x) { return static_cast<double>(x); }
Real r(const Json& j) { return j.is_null() ? std::numeric_limits<Real>::quiet_NaN() : static_cast<Real>(j.get<double>()); }

Json array_of(std::span<const Real> v) {
  Json a = Json::array();
  for (Real x : v) a.push_back(d(x));
  return a;
}

std::vector<Real> reals(const Json& j) {
  std::vector<Real> v;
  v.reserve(j.size());
  for (const auto& x : j) v.push_back(r(x));
  return v;
}

Field field_of(const Json& j, const Domain& dom) {
  if (static_cast<int>(j.size()) != dom.size()) {
    throw DomainError("field has " + std::to_string(j.size()) + " values, grid has " + std::to_string(dom.size()));
  }
  return Field(dom, reals(j));
}

Json to_json(const Segment& s) {
  Json j;
  j["chart"] = to_string(s.chart);
  j["a"] = d(s.a);
  j["t_lo"] = d(s.t_lo);
  j["t_hi"] = d(s.t_hi);
  j["t_samples"] = array_of(s.t_samples);
  j["residuals"] = array_of(s.residuals);
  j["mu"] = array_of(s.mu);
  return j;
}

Segment segment_from_json(const Json& j) {
  Segment s;
  s.chart = parse_chart(j.at("chart").get<std::string>());
  s.a = r(j.at("a"));
  s.t_lo = r(j.at("t_lo"));
  s.t_hi = r(j.at("t_hi"));
  s.t_samples = reals(j.at("t_samples"));
  s.residuals = reals(j.at("residuals"));
  s.mu = reals(j.at("mu"));
  return s;
}

bool same_field(const Field& x, const Field& y) { return x.size() == y.size() && x == y; }

bool same_point(const SolutionPoint& x, const SolutionPoint& y) {
  if (!(same_field(x.u(), y.u()) && x.a() == y.a() && x.c() == y.c() && x.residual_norm == y.residual_norm &&
        x.iterations == y.iterations && x.morse_index == y.morse_index && x.degenerate == y.degenerate &&
        x.tag == y.tag && x.spectrum.pairs.size() == y.spectrum.pairs.size())) {
    return false;
  }
  for (std::size_t i = 0; i < x.spectrum.pairs.size(); ++i) {
    if (x.spectrum.mu(static_cast<int>(i)) != y.spectrum.mu(static_cast<int>(i))) return false;
  }
  return true;
}

bool same_degenerate(const DegeneratePoint& x, const DegeneratePoint& y) {
  return x.a == y.a && x.c == y.c && same_field(x.u, y.u) && same_field(x.w, y.w) && x.morse_index == y.morse_index &&
         x.kind == y.kind && x.residual == y.residual && x.kernel_residual == y.kernel_residual && x.label == y.label;
}

bool same_branch(const Branch& x, const Branch& y) {
  if (x.label != y.label || x.chart != y.chart || x.end_reason != y.end_reason || x.points.size() != y.points.size() ||
      x.arclength != y.arclength || x.events.size() != y.events.size() || x.degenerate.size() != y.degenerate.size()) {
    return false;
  }
  for (std::size_t i = 0; i < x.events.size(); ++i) {
    const auto& a = x.events[i];
    const auto& b = y.events[i];
    if (a.kind != b.kind || a.point != b.point || a.note != b.note) return false;
  }
  for (std::size_t i = 0; i < x.points.size(); ++i) {
    if (!same_point(x.points[i], y.points[i])) return false;
  }
  for (std::size_t i = 0; i < x.degenerate.size(); ++i) {
    if (!same_degenerate(x.degenerate[i], y.degenerate[i])) return false;
  }
  return true;
}

}  // namespace

Json to_json(const SolutionPoint& p) {
  Json j;
  j["a"] = d(p.a());
  j["c"] = d(p.c());
  j["residual"] = d(p.residual_norm);
  j["iterations"] = p.iterations;
  j["morse_index"] = p.morse_index;
  j["degenerate"] = p.degenerate;
  j["tag"] = to_string(p.tag);
  Json mu = Json::array();
  for (const auto& e : p.spectrum.pairs) mu.push_back(d(e.value));
  j["mu"] = std::move(mu);
  j["u"] = array_of(p.u().values());
  return j;
}

SolutionPoint point_from_json(const Json& j, const Domain& dom) {
  SolutionPoint p{ProblemState{field_of(j.at("u"), dom), r(j.at("a")), r(j.at("c"))},
                  r(j.at("residual")),
                  j.at("iterations").get<int>(),
                  {},
                  j.at("morse_index").get<int>(),
                  j.at("degenerate").get<bool>(),
                  parse_solution_tag(j.at("tag").get<std::string>()),
                  {}};
  p.spectrum.tolerance = degeneracy_tolerance(p.a());
  // Eigenfunctions are not persisted.
  for (const auto& m : j.at("mu")) p.spectrum.pairs.push_back({r(m), Field(dom)});
  return p;
}

Json to_json(const DegeneratePoint& p) {
  Json j;
  j["label"] = p.label;
  j["kind"] = to_string(p.kind);
  j["a"] = d(p.a);
  j["c"] = d(p.c);
  j["morse_index"] = p.morse_index;
  j["residual"] = d(p.residual);
  j["kernel_residual"] = d(p.kernel_residual);
  j["u"] = array_of(p.u.values());
  j["w"] = array_of(p.w.values());
  return j;
}

DegeneratePoint degenerate_from_json(const Json& j, const Domain& dom) {
  return DegeneratePoint{r(j.at("a")),
                         r(j.at("c")),
                         field_of(j.at("u"), dom),
                         field_of(j.at("w"), dom),
                         j.at("morse_index").get<int>(),
                         parse_degenerate_kind(j.at("kind").get<std::string>()),
                         r(j.at("residual")),
                         r(j.at("kernel_residual")),
                         j.at("label").get<std::string>()};
}

Json to_json(const Branch& b) {
  Json j;
  j["label"] = b.label;
  j["chart"] = to_string(b.chart);
  j["end_reason"] = b.end_reason;
  Json ev = Json::array();
  for (const auto& e : b.events) ev.push_back(Json{{"kind", e.kind}, {"point", e.point}, {"note", e.note}});
  j["events"] = std::move(ev);
  j["arclength"] = array_of(b.arclength);
  Json pts = Json::array();
  for (const auto& p : b.points) pts.push_back(to_json(p));
  j["points"] = std::move(pts);
  Json deg = Json::array();
  for (const auto& p : b.degenerate) deg.push_back(to_json(p));
  j["degenerate"] = std::move(deg);
  return j;
}

Branch branch_from_json(const Json& j, const Domain& dom) {
  Branch b;
  b.label = j.at("label").get<std::string>();
  b.chart = parse_chart(j.at("chart").get<std::string>());
  b.end_reason = j.at("end_reason").get<std::string>();
  for (const auto& e : j.at("events")) {
    b.events.push_back({e.at("kind").get<std::string>(), e.at("point").get<int>(), e.at("note").get<std::string>()});
  }
  b.arclength = reals(j.at("arclength"));
  for (const auto& p : j.at("points")) b.points.push_back(point_from_json(p, dom));
  for (const auto& p : j.at("degenerate")) b.degenerate.push_back(degenerate_from_json(p, dom));
  if (b.arclength.size() != b.points.size()) throw DomainError("branch '" + b.label + "': arclength/points mismatch");
  return b;
}

Json to_json(const DegenerateCurve& c) {
  Json j;
  j["kind"] = to_string(c.kind);
  j["parameter"] = c.parameter;
  j["values"] = array_of(c.values);
  Json pts = Json::array();
  for (const auto& p : c.points) pts.push_back(to_json(p));
  j["points"] = std::move(pts);
  j["slope_formula"] = array_of(c.slope_formula);
  j["slope_secant"] = array_of(c.slope_secant);
  return j;
}

Json to_json(const SolutionSet& s) {
  Json j;
  j["a"] = d(s.a);
  j["c"] = d(s.c);
  j["count"] = s.count();
  j["indices"] = s.indices();
  j["n_starts"] = s.n_starts;
  j["n_converged"] = s.n_converged;
  j["n_singular"] = s.n_singular;
  j["n_failed"] = s.n_failed;
  j["dedup_threshold"] = d(s.dedup_threshold);
  j["span"] = d(s.span);
  Json mem = Json::array();
  for (const auto& m : s.members) mem.push_back(to_json(m));
  j["members"] = std::move(mem);
  Json deg = Json::array();
  for (const auto& st : s.degenerate) deg.push_back(Json{{"a", d(st.a)}, {"c", d(st.c)}, {"u", array_of(st.u.values())}});
  j["degenerate"] = std::move(deg);
  return j;
}

Json to_json(const VerificationReport& rep) {
  Json j;
  j["regime"] = rep.regime;
  j["all_pass"] = rep.all_pass();
  Json cl = Json::array();
  for (const auto& c : rep.claims) {
    cl.push_back(Json{{"id", c.id},
                      {"expected", c.expected},
                      {"measured", c.measured},
                      {"tolerance", d(c.tolerance)},
                      {"pass", c.pass}});
  }
  j["claims"] = std::move(cl);
  return j;
}

Json to_json(const HypothesisReport& rep) {
  Json j;
  j["all_pass"] = rep.all_pass();
  Json cl = Json::array();
  for (const auto& c : rep.checks) {
    cl.push_back(
        Json{{"tag", c.tag}, {"pass", c.pass}, {"witness", c.witness}, {"value", d(c.value)}, {"note", c.note}});
  }
  j["checks"] = std::move(cl);
  return j;
}

Json envelope(const Json& config_echo, const std::string& regime, const Json& branches, const Json& degenerate_points,
              const Json& report) {
  Json j;
  j["schema_version"] = kResultSchema;
  j["config_echo"] = config_echo;
  j["regime"] = regime.empty() ? Json(nullptr) : Json(regime);
  j["branches"] = branches.is_null() ? Json::array() : branches;
  j["degenerate_points"] = degenerate_points.is_null() ? Json::array() : degenerate_points;
  j["segment"] = nullptr;
  j["report"] = report;
  return j;
}

Json envelope(const Json& config_echo, const BifurcationDiagram& dg, const Json& verification) {
  Json branches = Json::array();
  for (const auto& b : dg.branches) branches.push_back(to_json(b));
  Json points = Json::array();
  for (const auto& p : dg.degenerate_points) points.push_back(to_json(p));
  Json meta;
  meta["a"] = d(dg.a);
  meta["lambda1"] = d(dg.lambda1);
  meta["lambda2"] = d(dg.lambda2);
  meta["c_min"] = d(dg.c_min);
  meta["chart_halfwidth"] = d(dg.chart_halfwidth);
  meta["delta_num"] = dg.delta_num ? Json(d(*dg.delta_num)) : Json(nullptr);
  meta["notes"] = dg.notes;
  Json report;
  report["diagram"] = std::move(meta);
  report["verification"] = verification;
  Json j = envelope(config_echo, to_string(dg.regime), branches, points, report);
  if (dg.segment) j["segment"] = to_json(*dg.segment);
  return j;
}

BifurcationDiagram diagram_from_json(const Json& j, const Domain& dom) {
  if (j.value("schema_version", std::string()) != kResultSchema) {
    throw DomainError("not a " + std::string(kResultSchema) + " document");
  }
  BifurcationDiagram dg;
  const Json& meta = j.at("report").at("diagram");
  dg.a = r(meta.at("a"));
  dg.regime = parse_regime(j.at("regime").get<std::string>());
  dg.lambda1 = r(meta.at("lambda1"));
  dg.lambda2 = r(meta.at("lambda2"));
  dg.c_min = r(meta.at("c_min"));
  dg.chart_halfwidth = r(meta.at("chart_halfwidth"));
  if (!meta.at("delta_num").is_null()) dg.delta_num = r(meta.at("delta_num"));
  dg.notes = meta.at("notes").get<std::vector<std::string>>();
  for (const auto& b : j.at("branches")) dg.branches.push_back(branch_from_json(b, dom));
  for (const auto& p : j.at("degenerate_points")) dg.degenerate_points.push_back(degenerate_from_json(p, dom));
  if (!j.at("segment").is_null()) dg.segment = segment_from_json(j.at("segment"));
  return dg;
}

bool same_diagram(const BifurcationDiagram& x, const BifurcationDiagram& y) {
  if (x.a != y.a || x.regime != y.regime || x.lambda1 != y.lambda1 || x.lambda2 != y.lambda2 || x.c_min != y.c_min ||
      x.chart_halfwidth != y.chart_halfwidth || x.delta_num != y.delta_num || x.notes != y.notes ||
      x.branches.size() != y.branches.size() || x.degenerate_points.size() != y.degenerate_points.size() ||
      x.segment.has_value() != y.segment.has_value()) {
    return false;
  }
  for (std::size_t i = 0; i < x.branches.size(); ++i) {
    if (!same_branch(x.branches[i], y.branches[i])) return false;
  }
  for (std::size_t i = 0; i < x.degenerate_points.size(); ++i) {
    if (!same_degenerate(x.degenerate_points[i], y.degenerate_points[i])) return false;
  }
  if (x.segment) {
    const Segment& a = *x.segment;
    const Segment& b = *y.segment;
    if (a.chart != b.chart || a.a != b.a || a.t_lo != b.t_lo || a.t_hi != b.t_hi || a.t_samples != b.t_samples ||
        a.residuals != b.residuals || a.mu != b.mu) {
      return false;
    }
  }
  return true;
}

std::string format_csv_number(Real x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12Lg", x);
  return buf;
}

void write_csv_rows(std::ostream& os, const Problem& pb, const Branch& b) {
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    const SolutionPoint& p = b.points[i];
    const Real s = i < b.arclength.size() ? b.arclength[i] : Real(0);
    const Real mu1 = p.spectrum.pairs.size() > 0 ? p.spectrum.mu(0) : std::numeric_limits<Real>::quiet_NaN();
    const Real mu2 = p.spectrum.pairs.size() > 1 ? p.spectrum.mu(1) : std::numeric_limits<Real>::quiet_NaN();
    os << format_csv_number(s) << ',' << format_csv_number(p.c()) << ','
       << format_csv_number(t_projection(pb, p.u(), b.chart)) << ',' << format_csv_number(l2_norm(p.u())) << ','
       << format_csv_number(p.u().max()) << ',' << format_csv_number(p.u().min()) << ',' << format_csv_number(mu1) << ','
       << format_csv_number(mu2) << ',' << p.morse_index << ',' << to_string(p.tag) << '\n';
  }
}

void emit_csv(std::ostream& os, const Problem& pb, const Branch& b) {
  if (b.empty()) throw DomainError("cannot emit an empty branch");
  os << kCsvHeader << '\n';
  write_csv_rows(os, pb, b);
}

Axis parse_axis(const std::string& s) {
  if (s == "u_max") return Axis::UMax;
  if (s == "t_proj") return Axis::TProj;
  throw DomainError("unknown axis '" + s + "' (expected u_max or t_proj)");
}

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string label_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

double nice_step(double range) {
  const double raw = range / 6;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10 * mag;
}

const char* dash_for(int index) {
  switch (index) {
    case 0: return "";
    case 1: return " stroke-dasharray=\"9,5\"";
    case 2: return " stroke-dasharray=\"2,4\"";
    default: return " stroke-dasharray=\"1,2,6,2\"";
  }
}

}  // namespace

std::string render_svg(const Problem& pb, const BifurcationDiagram& dg, Axis axis) {
  const bool psi_regime = dg.regime == Regime::AtLambda2 || dg.regime == Regime::Window ||
                          dg.regime == Regime::AboveWindow;
  const Chart chart = psi_regime ? Chart::Psi : Chart::Phi;
  auto measure = [&](const Field& u) { return d(axis == Axis::UMax ? u.max() : t_projection(pb, u, chart)); };

  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool first = true;
  auto widen = [&](double x, double y) {
    if (first) {
      x0 = x1 = x;
      y0 = y1 = y;
      first = false;
    }
    x0 = std::min(x0, x);
    x1 = std::max(x1, x);
    y0 = std::min(y0, y);
    y1 = std::max(y1, y);
  };
  widen(0, 0);
  std::vector<std::vector<std::pair<double, double>>> coords;
  for (const auto& b : dg.branches) {
    coords.emplace_back();
    for (const auto& p : b.points) {
      coords.back().emplace_back(d(p.c()), measure(p.u()));
      widen(coords.back().back().first, coords.back().back().second);
    }
  }
  double seg_lo = 0, seg_hi = 0;
  if (dg.segment) {
    const Field& e = dg.segment->chart == Chart::Phi ? pb.phi() : pb.psi();
    seg_lo = std::numeric_limits<double>::infinity();
    seg_hi = -seg_lo;
    for (Real t : dg.segment->t_samples) {
      const double y = axis == Axis::UMax ? d((t * e).max()) : d(t);
      seg_lo = std::min(seg_lo, y);
      seg_hi = std::max(seg_hi, y);
    }
    widen(0, seg_lo);
    widen(0, seg_hi);
  }
  const double padx = std::max(1e-9, (x1 - x0) * 0.05);
  const double pady = std::max(1e-9, (y1 - y0) * 0.05);
  x0 -= padx;
  x1 += padx;
  y0 -= pady;
  y1 += pady;

  const double W = 900, H = 600, L = 80, R = 190, T = 50, B = 60;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  static const char* palette[] = {"#1b4f8a", "#b2412a", "#2e7d32", "#6a3d9a", "#8c6d1f", "#00838f"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(L) << "\" y=\"28\" font-size=\"15\">a = " << label_num(d(dg.a)) << ", regime "
     << to_string(dg.regime) << "</text>\n";

  // Axes and ticks.
  os << "<g stroke=\"#444\" fill=\"none\">\n";
  os << "<rect x=\"" << num(L) << "\" y=\"" << num(T) << "\" width=\"" << num(W - L - R) << "\" height=\""
     << num(H - T - B) << "\"/>\n";
  os << "</g>\n<g fill=\"#222\">\n";
  const double sx = nice_step(x1 - x0);
  for (double x = std::ceil(x0 / sx) * sx; x <= x1; x += sx) {
    const double v = std::abs(x) < sx * 1e-9 ? 0 : x;
    os << "<line x1=\"" << num(px(v)) << "\" y1=\"" << num(H - B) << "\" x2=\"" << num(px(v)) << "\" y2=\""
       << num(H - B + 5) << "\" stroke=\"#444\"/>";
    os << "<text x=\"" << num(px(v)) << "\" y=\"" << num(H - B + 20) << "\" text-anchor=\"middle\">" << label_num(v)
       << "</text>\n";
  }
  const double sy = nice_step(y1 - y0);
  for (double y = std::ceil(y0 / sy) * sy; y <= y1; y += sy) {
    const double v = std::abs(y) < sy * 1e-9 ? 0 : y;
    os << "<line x1=\"" << num(L - 5) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(L) << "\" y2=\"" << num(py(v))
       << "\" stroke=\"#444\"/>";
    os << "<text x=\"" << num(L - 8) << "\" y=\"" << num(py(v) + 4) << "\" text-anchor=\"end\">" << label_num(v)
       << "</text>\n";
  }
  os << "<text x=\"" << num((L + W - R) / 2) << "\" y=\"" << num(H - 15) << "\" text-anchor=\"middle\">c</text>\n";
  os << "<text x=\"20\" y=\"" << num((T + H - B) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << num((T + H - B) / 2) << ")\">" << (axis == Axis::UMax ? "max u" : "t_proj") << "</text>\n";
  os << "</g>\n";

  // Branches, split into runs of constant Morse index.
  for (std::size_t bi = 0; bi < dg.branches.size(); ++bi) {
    const Branch& b = dg.branches[bi];
    const char* colour = palette[bi % 6];
    os << "<g fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\" data-branch=\"" << b.label << "\">\n";
    std::size_t start = 0;
    while (start + 1 < b.size()) {
      int idx = b.points[start + 1].morse_index;
      std::size_t end = start + 1;
      while (end + 1 < b.size() && b.points[end + 1].morse_index == idx) ++end;
      os << "<polyline" << dash_for(idx) << " points=\"";
      for (std::size_t i = start; i <= end; ++i) {
        os << (i > start ? " " : "") << num(px(coords[bi][i].first)) << ',' << num(py(coords[bi][i].second));
      }
      os << "\"/>\n";
      start = end;
    }
    os << "</g>\n";
  }

  if (dg.segment) {
    os << "<line x1=\"" << num(px(0)) << "\" y1=\"" << num(py(seg_lo)) << "\" x2=\"" << num(px(0)) << "\" y2=\""
       << num(py(seg_hi)) << "\" stroke=\"#000\" stroke-width=\"3.5\"/>\n";
    os << "<text x=\"" << num(px(0) - 8) << "\" y=\"" << num(py(seg_hi) - 6) << "\" text-anchor=\"end\">\u2112</text>\n";
  }
  for (const auto& p : dg.degenerate_points) {
    const double x = px(d(p.c));
    const double y = py(measure(p.u));
    os << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"4.5\" fill=\"white\" stroke=\"#000\" "
       << "stroke-width=\"1.5\"/>";
    os << "<text x=\"" << num(x + 7) << "\" y=\"" << num(y - 7) << "\">" << p.label << "</text>\n";
  }

  // Legend.
  double ly = T + 10;
  const double lx = W - R + 20;
  os << "<g>\n";
  for (std::size_t bi = 0; bi < dg.branches.size(); ++bi) {
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 30) << "\" y2=\"" << num(ly)
       << "\" stroke=\"" << palette[bi % 6] << "\" stroke-width=\"2\"/>";
    os << "<text x=\"" << num(lx + 38) << "\" y=\"" << num(ly + 4) << "\">" << dg.branches[bi].label << "</text>\n";
    ly += 18;
  }
  ly += 8;
  for (int idx = 0; idx < 3; ++idx) {
    os << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(lx + 30) << "\" y2=\"" << num(ly)
       << "\" stroke=\"#000\" stroke-width=\"1.8\"" << dash_for(idx) << "/>";
    os << "<text x=\"" << num(lx + 38) << "\" y=\"" << num(ly + 4) << "\">Morse index " << idx << "</text>\n";
    ly += 18;
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error("write to " + path.string() + " failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace bifurcate::io
