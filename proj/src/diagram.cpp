#include "bifurcate/diagram.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <thread>

#include "bifurcate/spectral.hpp"

namespace bifurcate {

namespace {

constexpr Real kJoinTolerance = Real(1e-6);

std::string fmt(Real x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6Lg", x);
  return buf;
}

std::string fmt_indices(const std::vector<int>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

Real product_distance(const Field& u1, Real c1, const Field& u2, Real c2) {
  return l2_norm(u1 - u2) + std::abs(c1 - c2);
}

void recompute_arclength(Branch& b) {
  b.arclength.assign(b.points.size(), 0);
  for (std::size_t i = 1; i < b.points.size(); ++i) {
    b.arclength[i] = b.arclength[i - 1] +
                     product_distance(b.points[i].u(), b.points[i].c(), b.points[i - 1].u(), b.points[i - 1].c());
  }
}

Branch reversed(Branch b) {
  const int n = static_cast<int>(b.points.size());
  std::reverse(b.points.begin(), b.points.end());
  std::reverse(b.events.begin(), b.events.end());
  for (auto& e : b.events) e.point = n - 1 - e.point;
  std::reverse(b.degenerate.begin(), b.degenerate.end());
  recompute_arclength(b);
  return b;
}

// Appends tail; with drop_first the tail's first point duplicates into's last.
void append(Branch& into, const Branch& tail, bool drop_first) {
  const int offset = static_cast<int>(into.points.size()) - (drop_first ? 1 : 0);
  for (std::size_t i = drop_first ? 1 : 0; i < tail.points.size(); ++i) into.points.push_back(tail.points[i]);
  for (auto e : tail.events) {
    if (e.kind == "chart-end") continue;
    e.point += offset;
    into.events.push_back(e);
  }
  into.degenerate.insert(into.degenerate.end(), tail.degenerate.begin(), tail.degenerate.end());
  recompute_arclength(into);
}

Branch single(SolutionPoint p, Chart chart) {
  Branch b;
  b.chart = chart;
  b.points.push_back(std::move(p));
  b.arclength.push_back(0);
  return b;
}

std::vector<Real> t_grid(Real from, Real to, Real step) {
  std::vector<Real> t{from};
  const int n = std::max(1, static_cast<int>(std::ceil(std::abs(to - from) / step - Real(1e-9))));
  for (int k = 1; k < n; ++k) t.push_back(from + (to - from) * k / n);
  t.push_back(to);
  return t;
}

SolutionPoint stable_seed(const Problem& pb, Real a) {
  return continue_czero_branch(pb, CZeroBranch::Dagger, {a}).points.front();
}

// Continues past the end of a chart piece, moving away from its start.
Branch continue_outward(const Problem& pb, const Branch& chart_piece, CLimits lims, const ContinuationOptions& cont) {
  const auto& p0 = chart_piece.points[chart_piece.size() - 2];
  const auto& p1 = chart_piece.points.back();
  const Real dc = p1.c() - p0.c();
  if (dc == 0) throw NonConvergence("chart piece ends with dc/dt = 0; cannot orient the continuation");
  return continue_branch(pb, p1, dc > 0 ? 1 : -1, lims, cont);
}

Branch join_at_seed(const Problem& pb, const SolutionPoint& seed, CLimits lims, const ContinuationOptions& cont,
                    const std::string& label) {
  Branch b = reversed(continue_branch(pb, seed, -1, lims, cont));
  append(b, continue_branch(pb, seed, 1, lims, cont), true);
  b.label = label;
  b.chart = cont.chart;
  return b;
}

std::string end_reason_of(const Branch& b) {
  std::string s;
  for (const auto& e : b.events) {
    if (e.point == 0 || e.point + 1 == static_cast<int>(b.size())) s += (s.empty() ? "" : ";") + e.kind;
  }
  return s;
}

// First index change along a chart piece: the refined point and the index of
// the first point past it.
std::optional<std::pair<DegeneratePoint, std::size_t>> first_index_change(const Problem& pb, const Branch& b) {
  for (std::size_t i = 1; i < b.size(); ++i) {
    if (b.points[i].morse_index != b.points[i - 1].morse_index) {
      return std::make_pair(refine_fold(pb, b.points[i - 1], b.points[i]), i);
    }
  }
  return std::nullopt;
}

Field zero_field(const Domain& d) { return Field(d); }

}  // namespace

int thread_count() {
  if (const char* env = std::getenv("BIFURCATE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(std::min(v, 256L));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

Real relative_distance(const Field& u, const Field& v) { return l2_norm(u - v) / std::max(Real(1), l2_norm(u)); }

std::vector<int> SolutionSet::indices() const {
  std::vector<int> v;
  for (const auto& m : members) v.push_back(m.morse_index);
  std::sort(v.begin(), v.end());
  return v;
}

SolutionSet count_solutions(const Problem& pb, Real a, Real c, const CountOptions& opts) {
  if (opts.n_starts < 50) throw DomainError("count_solutions needs at least 50 starts");
  const Domain& d = pb.domain();
  SolutionSet set;
  set.a = a;
  set.c = c;
  set.n_starts = opts.n_starts;
  set.dedup_threshold = opts.dedup_threshold;
  set.span = 2 * critical_cap(pb.nonlinearity(), std::max(a, pb.lambda1()));

  std::vector<Field> starts;
  starts.push_back(zero_field(d));
  for (Real s : {set.span, -set.span}) {
    starts.push_back(s * pb.phi());
    starts.push_back(s * pb.psi());
  }
  std::mt19937_64 rng(opts.seed);
  std::uniform_real_distribution<double> unit(-1, 1);
  std::uniform_int_distribution<int> modes(1, 6);
  const Real pi = std::numbers::pi_v<Real>;
  while (static_cast<int>(starts.size()) < opts.n_starts) {
    const int m = modes(rng);
    std::vector<Real> coef(m);
    for (int k = 0; k < m; ++k) coef[k] = static_cast<Real>(unit(rng)) / (k + 1);
    const Real amp = set.span * static_cast<Real>(std::abs(unit(rng)));
    Field g(d);
    for (int i = 0; i < d.size(); ++i) {
      Real s = 0;
      for (int k = 0; k < m; ++k) s += coef[k] * std::sin((k + 1) * pi * d.node(i) / d.length());
      g[i] = s;
    }
    const Real nrm = g.norm_inf();
    if (nrm > 0) g *= amp / nrm;
    starts.push_back(std::move(g));
  }

  struct Outcome {
    int kind = 0;  // 0 failed, 1 converged, 2 singular root
    std::optional<SolutionPoint> point;
    std::optional<ProblemState> state;
  };
  std::vector<Outcome> out(starts.size());
  NewtonOptions nopt = opts.newton;
  nopt.with_spectrum = false;
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < starts.size(); i = next++) {
      try {
        out[i].point = newton_solve(pb, starts[i], a, c, nopt);
        out[i].kind = 1;
      } catch (const SingularJacobian& e) {
        if (residual(pb, e.state().u, a, c).norm_inf() < nopt.tolerance) {
          out[i].state = e.state();
          out[i].kind = 2;
        }
      } catch (const NonConvergence&) {
      }
    }
  };
  const int nt = std::min<int>(opts.threads > 0 ? opts.threads : thread_count(), static_cast<int>(starts.size()));
  if (nt <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  for (auto& o : out) {
    if (o.kind == 1) {
      ++set.n_converged;
      const Field& u = o.point->u();
      const bool dup = std::any_of(set.members.begin(), set.members.end(), [&](const SolutionPoint& m) {
        return relative_distance(m.u(), u) < opts.dedup_threshold;
      });
      if (!dup) set.members.push_back(std::move(*o.point));
    } else if (o.kind == 2) {
      ++set.n_singular;
      const Field& u = o.state->u;
      const bool dup = std::any_of(set.degenerate.begin(), set.degenerate.end(), [&](const ProblemState& m) {
        return relative_distance(m.u, u) < opts.dedup_threshold;
      });
      if (!dup) set.degenerate.push_back(std::move(*o.state));
    } else {
      ++set.n_failed;
    }
  }
  // Roots whose spectrum has a zero eigenvalue join the degenerate list.
  std::vector<SolutionPoint> regular;
  for (auto& m : set.members) {
    SolutionPoint full = make_solution_point(pb, m.u(), a, c, opts.newton.spectrum_k);
    full.iterations = m.iterations;
    full.residual_history = std::move(m.residual_history);
    if (full.degenerate) {
      set.degenerate.push_back(full.state);
    } else {
      regular.push_back(std::move(full));
    }
  }
  set.members = std::move(regular);
  return set;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::BelowLambda1: return "below-lambda1";
    case Regime::AtLambda1: return "at-lambda1";
    case Regime::Lambda1To2: return "(lambda1,lambda2)";
    case Regime::AtLambda2: return "at-lambda2";
    case Regime::Window: return "(lambda2,lambda2+delta)";
    case Regime::AboveWindow: return "above-window";
  }
  return "";
}

Regime parse_regime(const std::string& s) {
  for (auto r : {Regime::BelowLambda1, Regime::AtLambda1, Regime::Lambda1To2, Regime::AtLambda2, Regime::Window,
                 Regime::AboveWindow}) {
    if (to_string(r) == s) return r;
  }
  if (s == "theorem1") return Regime::Lambda1To2;
  if (s == "theorem2") return Regime::AtLambda2;
  if (s == "theorem3") return Regime::Window;
  throw DomainError("unknown regime '" + s + "'");
}

Branch continue_through(const Problem& pb, const SolutionPoint& seed, CLimits limits, const ContinuationOptions& cont,
                        const std::string& label) {
  return join_at_seed(pb, seed, limits, cont, label);
}

const Branch* BifurcationDiagram::branch(const std::string& label) const {
  for (const auto& b : branches) {
    if (b.label == label) return &b;
  }
  return nullptr;
}

const DegeneratePoint* BifurcationDiagram::point(const std::string& label) const {
  for (const auto& p : degenerate_points) {
    if (p.label == label) return &p;
  }
  return nullptr;
}

Real numerical_delta(const Problem& pb, Real chart_halfwidth) {
  if (!(chart_halfwidth > 0)) throw DomainError("chart half-width must be positive");
  const Real m = pb.nonlinearity().threshold();
  const auto curve = trace_index1_degenerate_curve(pb, {-m / pb.beta() - chart_halfwidth, m + chart_halfwidth});
  return std::min(curve.points[0].a, curve.points[1].a) - pb.lambda2();
}

Regime detect_regime(const Problem& pb, Real a, const DiagramOptions& opts, std::optional<Real>* delta_out) {
  const Real tol = opts.eigen_tolerance * std::max(Real(1), std::abs(a));
  if (std::abs(a - pb.lambda1()) <= tol) return Regime::AtLambda1;
  if (a < pb.lambda1()) return Regime::BelowLambda1;
  if (std::abs(a - pb.lambda2()) <= tol) return Regime::AtLambda2;
  if (a < pb.lambda2()) return Regime::Lambda1To2;
  if (a >= pb.lambda3() - tol) {
    throw DomainError("a = " + fmt(a) + " is at or above lambda3; only the regimes up to the lambda2 window are supported");
  }
  const Real delta = numerical_delta(pb, opts.chart_halfwidth);
  if (delta_out) *delta_out = delta;
  return a < pb.lambda2() + delta ? Regime::Window : Regime::AboveWindow;
}

BifurcationDiagram assemble_diagram(const Problem& pb, Real a, const DiagramOptions& opts) {
  if (!(a > 0)) throw DomainError("assemble_diagram needs a > 0");
  BifurcationDiagram dg;
  dg.a = a;
  dg.lambda1 = pb.lambda1();
  dg.lambda2 = pb.lambda2();
  dg.c_min = opts.c_min;
  dg.chart_halfwidth = opts.chart_halfwidth;
  dg.regime = detect_regime(pb, a, opts, &dg.delta_num);

  const Real m = pb.nonlinearity().threshold();
  const Real beta = pb.beta();
  const Real sigma = opts.chart_halfwidth;
  const CLimits down_only{opts.c_min, std::numeric_limits<Real>::infinity()};
  ContinuationOptions cont = opts.continuation;

  auto add_point = [&](DegeneratePoint p, const std::string& label) {
    p.label = label;
    dg.degenerate_points.push_back(std::move(p));
  };
  auto fold_of = [&](const Branch& b) -> std::optional<DegeneratePoint> {
    for (const auto& p : b.degenerate) {
      if (p.kind == DegenerateKind::Fold) return p;
    }
    return std::nullopt;
  };
  auto stable_piece = [&] {
    cont.chart = Chart::Phi;
    Branch star = join_at_seed(pb, stable_seed(pb, a), down_only, cont, "M_star");
    star.end_reason = end_reason_of(star);
    const auto fold = fold_of(star);
    if (!fold) throw NonConvergence("stable branch did not turn at a fold before the c limits");
    add_point(*fold, "p_star");
    dg.branches.push_back(std::move(star));
  };

  try {
    switch (dg.regime) {
      case Regime::BelowLambda1: {
        cont.chart = Chart::Phi;
        const SolutionPoint zero = newton_solve(pb, zero_field(pb.domain()), a, 0);
        Branch b = join_at_seed(pb, zero, {opts.c_min, opts.c_max}, cont, "M_unique");
        b.end_reason = end_reason_of(b);
        dg.branches.push_back(std::move(b));
        break;
      }
      case Regime::AtLambda1: {
        // Half-line {t phi : t <= M} at c = 0, truncated at -sigma.
        Segment seg;
        seg.chart = Chart::Phi;
        seg.a = a;
        seg.t_lo = -sigma;
        seg.t_hi = m;
        for (Real t : t_grid(seg.t_lo, seg.t_hi, std::max((seg.t_hi - seg.t_lo) / 4, Real(1e-3)))) {
          const Field u = t * pb.phi();
          seg.t_samples.push_back(t);
          seg.residuals.push_back(residual(pb, u, a, 0).norm_inf());
          seg.mu.push_back(linearized_spectrum(pb, u, a).mu(0));
        }
        dg.segment = std::move(seg);
        cont.chart = Chart::Phi;
        cont.stop_at_fold = false;
        Branch chart = trace_chart(pb, a, Chart::Phi, t_grid(m, m + sigma, opts.chart_step), m * pb.phi(), 0);
        Branch b = chart;
        append(b, continue_outward(pb, chart, {opts.c_min, opts.c_max}, cont), true);
        b.label = "M_lambda1";
        b.events.insert(b.events.begin(), {"segment-end", 0, ""});
        b.end_reason = end_reason_of(b);
        for (const auto& p : b.degenerate) {
          if (p.kind == DegenerateKind::Fold) add_point(p, "p_star");
        }
        dg.branches.push_back(std::move(b));
        break;
      }
      case Regime::Lambda1To2: {
        stable_piece();
        cont.chart = Chart::Phi;
        const SolutionPoint zero = newton_solve(pb, zero_field(pb.domain()), a, 0);
        Branch sharp = join_at_seed(pb, zero, down_only, cont, "M_sharp");
        sharp.end_reason = end_reason_of(sharp);
        dg.branches.push_back(std::move(sharp));
        break;
      }
      case Regime::AtLambda2: {
        Segment seg;
        seg.chart = Chart::Psi;
        seg.a = a;
        seg.t_lo = -m / beta;
        seg.t_hi = m;
        const std::vector<Real> ts = m > 0 ? t_grid(seg.t_lo, seg.t_hi, (seg.t_hi - seg.t_lo) / 4) : std::vector<Real>{0};
        for (Real t : ts) {
          const Field u = t * pb.psi();
          seg.t_samples.push_back(t);
          seg.residuals.push_back(residual(pb, u, a, 0).norm_inf());
          seg.mu.push_back(linearized_spectrum(pb, u, a).mu(1));
        }
        dg.segment = std::move(seg);

        stable_piece();
        cont.chart = Chart::Psi;
        for (int side : {1, -1}) {
          const Real t0 = side > 0 ? m : -m / beta;
          const Real t1 = side > 0 ? m + sigma : -m / beta - sigma;
          Branch chart = trace_chart(pb, a, Chart::Psi, t_grid(t0, t1, opts.chart_step), t0 * pb.psi(), 0);
          Branch b = chart;
          append(b, continue_outward(pb, chart, down_only, cont), true);
          b.label = side > 0 ? "M_sharp" : "M_flat";
          b.chart = Chart::Psi;
          b.events.insert(b.events.begin(), {"segment-end", 0, ""});
          b.end_reason = end_reason_of(b);
          dg.branches.push_back(std::move(b));
        }
        break;
      }
      case Regime::Window:
      case Regime::AboveWindow: {
        stable_piece();
        cont.chart = Chart::Psi;
        Real width = sigma;
        std::optional<std::pair<DegeneratePoint, std::size_t>> hit_up, hit_down;
        Branch up, down;
        for (int attempt = 0; attempt < 5; ++attempt) {
          up = trace_chart(pb, a, Chart::Psi, t_grid(0, m + width, opts.chart_step), zero_field(pb.domain()), 0);
          down = trace_chart(pb, a, Chart::Psi, t_grid(0, -m / beta - width, opts.chart_step), zero_field(pb.domain()), 0);
          hit_up = first_index_change(pb, up);
          hit_down = first_index_change(pb, down);
          if (hit_up && hit_down && hit_up->second + 1 < up.size() && hit_down->second + 1 < down.size()) break;
          if (dg.regime == Regime::Window) break;
          width *= Real(1.5);
        }
        if (!hit_up || !hit_down) throw NonConvergence("no index change along the psi chart within the traced range");
        if (width != sigma) dg.notes.push_back("psi chart widened to half-width " + fmt(width));
        DegeneratePoint& ps = hit_up->first;
        DegeneratePoint& pf = hit_down->first;
        const SolutionPoint sp = make_solution_point(pb, ps.u, a, ps.c);
        const SolutionPoint fp = make_solution_point(pb, pf.u, a, pf.c);

        Branch natural = single(fp, Chart::Psi);
        for (std::size_t i = hit_down->second - 1; i >= 1; --i) natural.points.push_back(down.points[i]);
        for (std::size_t i = 0; i < hit_up->second; ++i) natural.points.push_back(up.points[i]);
        natural.points.push_back(sp);
        natural.label = "M_natural";
        natural.events = {{"index-change", 0, "p_flat"}, {"index-change", static_cast<int>(natural.size()) - 1, "p_sharp"}};
        natural.degenerate = {pf, ps};
        natural.end_reason = "index-change;index-change";
        recompute_arclength(natural);

        auto outer = [&](const Branch& chart, const SolutionPoint& start, std::size_t from, const DegeneratePoint& dp,
                         const std::string& label) {
          Branch b = single(start, Chart::Psi);
          for (std::size_t i = from; i < chart.size(); ++i) b.points.push_back(chart.points[i]);
          b.events.push_back({"index-change", 0, label == "M_sharp" ? "p_sharp" : "p_flat"});
          b.degenerate.push_back(dp);
          recompute_arclength(b);
          Branch piece;
          piece.points.assign(chart.points.begin() + static_cast<long>(from), chart.points.end());
          if (piece.size() < 2) piece.points.insert(piece.points.begin(), start);
          append(b, continue_outward(pb, piece, down_only, cont), true);
          b.label = label;
          b.chart = Chart::Psi;
          b.end_reason = end_reason_of(b);
          return b;
        };
        dg.branches.push_back(outer(down, fp, hit_down->second, pf, "M_flat"));
        dg.branches.push_back(std::move(natural));
        dg.branches.push_back(outer(up, sp, hit_up->second, ps, "M_sharp"));
        add_point(ps, "p_sharp");
        add_point(pf, "p_flat");
        break;
      }
    }
  } catch (const NonConvergence& e) {
    throw AssemblyError(std::string("diagram assembly failed: ") + e.what(), std::move(dg));
  }
  return dg;
}

std::vector<SolutionPoint> branch_solutions_at(const Problem& pb, const Branch& br, Real c) {
  std::vector<SolutionPoint> out;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    const auto& p0 = br.points[i];
    const auto& p1 = br.points[i + 1];
    const Real c0 = p0.c() - c;
    const Real c1 = p1.c() - c;
    if (c0 * c1 > 0 || c0 == c1) continue;
    const Real theta = c0 / (c0 - c1);
    const Field guess = p0.u() + theta * (p1.u() - p0.u());
    try {
      SolutionPoint s = newton_solve(pb, guess, p0.a(), c);
      const bool dup = std::any_of(out.begin(), out.end(),
                                   [&](const SolutionPoint& q) { return relative_distance(q.u(), s.u()) < Real(1e-6); });
      if (!dup) out.push_back(std::move(s));
    } catch (const NonConvergence&) {
    }
  }
  return out;
}

bool VerificationReport::all_pass() const {
  return std::all_of(claims.begin(), claims.end(), [](const VerificationClaim& c) { return c.pass; });
}

const VerificationClaim* VerificationReport::find(const std::string& id) const {
  for (const auto& c : claims) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

namespace {

struct Verifier {
  const Problem& pb;
  const BifurcationDiagram& dg;
  const VerifyOptions& opts;
  VerificationReport report;

  void add(const std::string& id, const std::string& expected, const std::string& measured, Real tol, bool pass) {
    report.claims.push_back({id, expected, measured, tol, pass});
  }

  SolutionSet count(Real c) { return count_solutions(pb, dg.a, c, opts.count); }

  void check_count(const std::string& tag, Real c, int expected, const std::vector<int>& expected_indices) {
    const SolutionSet s = count(c);
    add("count@" + tag, std::to_string(expected), std::to_string(s.count()), 0, s.count() == expected);
    if (!expected_indices.empty()) {
      add("indices@" + tag, fmt_indices(expected_indices), fmt_indices(s.indices()), 0, s.indices() == expected_indices);
    }
    equivalence(tag, s);
  }

  void check_count_at_least(const std::string& tag, Real c, int minimum) {
    const SolutionSet s = count(c);
    add("count@" + tag, ">=" + std::to_string(minimum), std::to_string(s.count()), 0, s.count() >= minimum);
  }

  // Every multistart root sits on a branch and every branch crossing is found.
  void equivalence(const std::string& tag, const SolutionSet& s) {
    std::vector<SolutionPoint> on_branches;
    for (const auto& b : dg.branches) {
      for (auto& p : branch_solutions_at(pb, b, s.c)) {
        const bool dup = std::any_of(on_branches.begin(), on_branches.end(), [&](const SolutionPoint& q) {
          return relative_distance(q.u(), p.u()) < kJoinTolerance;
        });
        if (!dup) on_branches.push_back(std::move(p));
      }
    }
    Real worst = 0;
    auto nearest = [](const Field& u, const auto& pool) {
      Real best = std::numeric_limits<Real>::infinity();
      for (const auto& q : pool) best = std::min(best, relative_distance(q.u(), u));
      return best;
    };
    for (const auto& m : s.members) worst = std::max(worst, nearest(m.u(), on_branches));
    for (const auto& p : on_branches) worst = std::max(worst, nearest(p.u(), s.members));
    add("equivalence@" + tag, "<" + fmt(kJoinTolerance), fmt(worst), kJoinTolerance,
        worst < kJoinTolerance && on_branches.size() == s.members.size());
  }

  void index_sequence(const std::string& label, int expected) {
    const Branch* b = dg.branch(label);
    if (!b) {
      add("morse-sequence:" + label, "branch present", "missing", 0, false);
      return;
    }
    int bad = 0;
    for (const auto& p : b->points) {
      if (p.degenerate) continue;
      if (p.morse_index != expected) ++bad;
    }
    add("morse-sequence:" + label, "index " + std::to_string(expected) + " at every regular point",
        std::to_string(bad) + " mismatches", 0, bad == 0);
  }

  void degenerate_point(const std::string& label) {
    const DegeneratePoint* p = dg.point(label);
    if (!p) {
      add("refined:" + label, "present", "missing", 0, false);
      return;
    }
    const Real worst = std::max(p->residual, p->kernel_residual);
    add("refined:" + label, "<1e-10", fmt(worst), Real(1e-10), worst < Real(1e-10));
  }

  void fold_checks() {
    const DegeneratePoint* p = dg.point("p_star");
    if (!p) return;
    const FoldLocalCheck f = fold_local_check(pb, *p);
    const Real e1 = std::abs(f.c2_fd - f.c2_formula) / std::abs(f.c2_formula);
    const Real e2 = std::abs(f.mu_fd - f.mu_formula) / std::abs(f.mu_formula);
    add("fold-curvature", fmt(f.c2_formula), fmt(f.c2_fd), Real(0.05), e1 < Real(0.05));
    add("fold-eigenvalue-slope", fmt(f.mu_formula), fmt(f.mu_fd), Real(0.05), e2 < Real(0.05));
    const Real e3 = std::abs(f.signc_lhs - f.signc_rhs) / std::max(std::abs(f.signc_rhs), Real(1e-300));
    add("fold-sign-identity", fmt(f.signc_rhs), fmt(f.signc_lhs), Real(1e-6), e3 < Real(1e-6));
    int negative = 0;
    for (const auto& q : dg.degenerate_points) {
      if (q.kind == DegenerateKind::Fold && q.c < 0) ++negative;
    }
    add("fold-c-nonnegative", "c >= 0 at every index-0 degenerate point", std::to_string(negative) + " negative", 0,
        negative == 0);
  }

  void monotone_star() {
    const Branch* b = dg.branch("M_star");
    if (!b) return;
    int bad = 0;
    Real worst = std::numeric_limits<Real>::infinity();
    for (std::size_t i = 1; i < b->size(); ++i) {
      const auto& lo = b->points[i - 1];
      const auto& hi = b->points[i];
      if (!(hi.c() > lo.c())) {
        ++bad;
        continue;
      }
      const Real gap = (lo.u() - hi.u()).min();
      worst = std::min(worst, gap);
      if (!(gap > 0)) ++bad;
    }
    add("monotone-in-c:M_star", "u(c1) > u(c2) nodewise for c1 < c2", std::to_string(bad) + " violations (min gap " +
        fmt(worst) + ")", 0, bad == 0);
  }

  void superharmonic() {
    const Branch* b = dg.branch("M_star");
    if (!b) return;
    Real worst = std::numeric_limits<Real>::infinity();
    int found = 0;
    for (Real c : {Real(-0.01), Real(0), Real(0.01)}) {
      for (const auto& p : branch_solutions_at(pb, *b, c)) {
        ++found;
        for (int i = 0; i < p.u().size(); ++i) {
          const Real v = dg.a * p.u()[i] - eval_nonlinearity(pb.nonlinearity(), p.u()[i]).f - c * pb.harvest()[i];
          worst = std::min(worst, v);
        }
      }
    }
    add("superharmonic:|c|<=0.01", ">-1e-10", fmt(worst), Real(1e-10), found == 3 && worst > Real(-1e-10));
  }

  // Static stability criterion against the Morse index for the c = 0 roots.
  void static_criterion(const SolutionSet& s) {
    int bad = 0;
    for (const auto& p : s.members) {
      const bool stat = p.u().min() >= Real(-1e-10) && p.u().max() > pb.nonlinearity().threshold();
      if (stat != (p.morse_index == 0)) ++bad;
    }
    add("static-criterion@c=0", "stable iff u >= 0 and max u > M", std::to_string(bad) + " disagreements of " +
        std::to_string(s.count()), 0, bad == 0);
  }

  bool near(const Field& u1, Real c1, const Field& u2, Real c2) {
    return relative_distance(u1, u2) < kJoinTolerance && std::abs(c1 - c2) < kJoinTolerance;
  }

  void connectivity() {
    // Nodes: branches, then special points, then the segment ends.
    const std::size_t nb = dg.branches.size();
    const std::size_t np = dg.degenerate_points.size();
    std::vector<std::pair<Field, Real>> anchors;
    for (const auto& p : dg.degenerate_points) anchors.emplace_back(p.u, p.c);
    if (dg.segment) {
      const Field& e = dg.segment->chart == Chart::Phi ? pb.phi() : pb.psi();
      anchors.emplace_back(dg.segment->t_lo * e, 0);
      anchors.emplace_back(dg.segment->t_hi * e, 0);
    }
    const std::size_t total = nb + anchors.size();
    std::vector<std::size_t> parent(total);
    for (std::size_t i = 0; i < total; ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> root = [&](std::size_t i) {
      return parent[i] == i ? i : parent[i] = root(parent[i]);
    };
    auto unite = [&](std::size_t i, std::size_t j) { parent[root(i)] = root(j); };
    if (dg.segment) unite(nb + np, nb + np + 1);
    int loose = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      const Branch& b = dg.branches[i];
      for (const SolutionPoint* end : {&b.points.front(), &b.points.back()}) {
        bool attached = false;
        for (std::size_t k = 0; k < anchors.size(); ++k) {
          if (near(end->u(), end->c(), anchors[k].first, anchors[k].second)) {
            unite(i, nb + k);
            attached = true;
          }
        }
        for (std::size_t j = 0; j < nb; ++j) {
          if (j == i) continue;
          for (const SolutionPoint* other : {&dg.branches[j].points.front(), &dg.branches[j].points.back()}) {
            if (near(end->u(), end->c(), other->u(), other->c())) {
              unite(i, j);
              attached = true;
            }
          }
        }
        const bool at_limit = std::abs(end->c() - dg.c_min) < kJoinTolerance;
        if (!attached && !at_limit) ++loose;
      }
    }
    std::set<std::size_t> comps;
    for (std::size_t i = 0; i < total; ++i) comps.insert(root(i));
    add("connected", "1 component", std::to_string(comps.size()) + " components", 0, comps.size() == 1);
    add("branch-endpoints", "every endpoint is a c-limit, a degenerate point or a segment end",
        std::to_string(loose) + " loose endpoints", 0, loose == 0);
  }

  void pieces(const std::vector<std::string>& branches, const std::vector<std::string>& points, bool segment) {
    std::string missing;
    for (const auto& b : branches) {
      if (!dg.branch(b)) missing += " " + b;
    }
    for (const auto& p : points) {
      if (!dg.point(p)) missing += " " + p;
    }
    if (segment && !dg.segment) missing += " L";
    const std::size_t n = branches.size() + points.size() + (segment ? 1 : 0);
    add("decomposition", std::to_string(n) + " pieces", missing.empty() ? "all present" : "missing" + missing, 0,
        missing.empty());
  }

  void segment_checks() {
    if (!dg.segment) return;
    Real res = 0, mu = 0;
    for (std::size_t i = 0; i < dg.segment->t_samples.size(); ++i) {
      res = std::max(res, dg.segment->residuals[i]);
      mu = std::max(mu, std::abs(dg.segment->mu[i]));
    }
    add("segment-residual", "<1e-12", fmt(res), Real(1e-12), res < Real(1e-12));
    add("segment-degenerate", "|mu|<1e-10", fmt(mu), Real(1e-10), mu < Real(1e-10));
  }

  void run() {
    report.regime = to_string(dg.regime);
    if (opts.expected_regime) {
      add("regime", to_string(*opts.expected_regime), report.regime, 0, *opts.expected_regime == dg.regime);
    }
    const Real m = pb.nonlinearity().threshold();
    switch (dg.regime) {
      case Regime::BelowLambda1: {
        for (Real c : {Real(-5), Real(-1), Real(0), Real(1), Real(5)}) check_count("c=" + fmt(c), c, 1, {0});
        index_sequence("M_unique", 0);
        Real c = 1;
        Field u = linear_regime_solution(pb, dg.a, c);
        while (u.max() > m && c > Real(1e-12)) {
          c /= 2;
          u = linear_regime_solution(pb, dg.a, c);
        }
        const SolutionPoint pt = newton_solve(pb, u, dg.a, c);
        const Real err = (pt.u() - u).norm_inf();
        add("linear-closed-form", "<1e-8", fmt(err), Real(1e-8), err < Real(1e-8));
        break;
      }
      case Regime::AtLambda1: {
        if (dg.segment) {
          Real res = 0, mu = 0;
          for (std::size_t i = 0; i < dg.segment->t_samples.size(); ++i) {
            res = std::max(res, dg.segment->residuals[i]);
            mu = std::max(mu, std::abs(dg.segment->mu[i]));
          }
          add("half-line-residual", "<1e-12", fmt(res), Real(1e-12), res < Real(1e-12));
          add("half-line-degenerate", "|mu1|<1e-10", fmt(mu), Real(1e-10), mu < Real(1e-10));
        }
        // Testing against phi gives <f(u), phi> = -c <h, phi>, so c <= 0.
        check_count("c=-1", -1, 1, {0});
        check_count("c=1", 1, 0, {});
        index_sequence("M_lambda1", 0);
        break;
      }
      case Regime::Lambda1To2: {
        const DegeneratePoint* ps = dg.point("p_star");
        pieces({"M_star", "M_sharp"}, {"p_star"}, false);
        int folds = 0;
        for (const auto& p : dg.degenerate_points) folds += p.kind == DegenerateKind::Fold;
        add("single-fold", "1", std::to_string(folds), 0, folds == 1);
        degenerate_point("p_star");
        index_sequence("M_star", 0);
        index_sequence("M_sharp", 1);
        connectivity();
        if (ps) {
          const Real cs = ps->c;
          for (Real c : {Real(-5), Real(-1), Real(0), cs / 2}) check_count("c=" + fmt(c), c, 2, {0, 1});
          check_count("c_star+0.5", cs + Real(0.5), 0, {});
          check_count("c_star-0.1", cs - Real(0.1), 2, {0, 1});
          check_count("c_star+0.1", cs + Real(0.1), 0, {});
          const SolutionSet band = count(cs);
          std::vector<Field> roots;
          for (const auto& p : band.members) roots.push_back(p.u());
          for (const auto& p : band.degenerate) roots.push_back(p.u);
          int clusters = 0;
          for (std::size_t i = 0; i < roots.size(); ++i) {
            bool seen = false;
            for (std::size_t j = 0; j < i; ++j) seen = seen || relative_distance(roots[j], roots[i]) < Real(1e-3);
            clusters += !seen;
          }
          add("count@c_star", "1 (fold band, clustered at 1e-3)", std::to_string(clusters), 0, clusters == 1);
          static_criterion(count(0));
        }
        fold_checks();
        monotone_star();
        superharmonic();
        break;
      }
      case Regime::AtLambda2: {
        pieces({"M_flat", "M_sharp", "M_star"}, {"p_star"}, true);
        segment_checks();
        degenerate_point("p_star");
        index_sequence("M_star", 0);
        index_sequence("M_sharp", 1);
        index_sequence("M_flat", 1);
        connectivity();
        for (const auto& [label, t] : {std::pair<std::string, Real>{"M_sharp", m}, {"M_flat", -m / pb.beta()}}) {
          const Branch* b = dg.branch(label);
          if (!b) continue;
          const Real d = (b->points.front().u() - t * pb.psi()).norm_inf();
          add("joins-segment:" + label, "<1e-8", fmt(d), Real(1e-8), d < Real(1e-8) && b->points.front().c() == 0);
        }
        {
          const SolutionSet s = count(0);
          int bad = 0;
          for (const auto& p : s.members) bad += p.morse_index != 0;
          // Near the segment ends the residual grows like |t - M|^p, so the
          // residual gate resolves t only to about tol^(1/p).
          const Real band = 2 * std::pow(opts.count.newton.tolerance, Real(1) / pb.nonlinearity().exponent());
          for (const auto& st : s.degenerate) {
            const Real t = t_projection(pb, st.u, Chart::Psi);
            const bool inside = t >= -m / pb.beta() - band && t <= m + band;
            bad += !inside || relative_distance(t * pb.psi(), st.u) >= kJoinTolerance;
          }
          add("c=0-dichotomy", "every c=0 root is stable or on the segment",
              std::to_string(bad) + " exceptions (" + std::to_string(s.count()) + " regular, " +
                  std::to_string(s.degenerate.size()) + " on the segment)",
              0, bad == 0);
          static_criterion(s);
        }
        if (const DegeneratePoint* ps = dg.point("p_star")) {
          for (Real c : {Real(-1), std::min(Real(1), ps->c / 2)}) check_count("c=" + fmt(c), c, 2, {0, 1});
        }
        if (m == 0) {
          const Real dt = Real(1e-3);
          const Branch ch = trace_chart(pb, dg.a, Chart::Psi, {-dt, 0, dt}, zero_field(pb.domain()), 0);
          const Real slope = (ch.points[2].c() - ch.points[0].c()) / (2 * dt);
          add("zero-slope-at-t=0", "|dc/dt| < 1e-4", fmt(std::abs(slope)), Real(1e-4), std::abs(slope) < Real(1e-4));
        }
        fold_checks();
        monotone_star();
        superharmonic();
        break;
      }
      case Regime::Window:
      case Regime::AboveWindow: {
        pieces({"M_flat", "M_natural", "M_sharp", "M_star"}, {"p_flat", "p_sharp", "p_star"}, false);
        if (dg.delta_num) {
          add("window", dg.regime == Regime::Window ? "lambda2 < a < lambda2+delta" : "a >= lambda2+delta",
              "a-lambda2=" + fmt(dg.a - dg.lambda2) + " delta=" + fmt(*dg.delta_num), 0, true);
        }
        for (const char* p : {"p_flat", "p_sharp", "p_star"}) degenerate_point(p);
        const DegeneratePoint* ps = dg.point("p_sharp");
        const DegeneratePoint* pf = dg.point("p_flat");
        if (ps && pf) {
          add("c_sharp<0<c_flat", "true", fmt(ps->c) + " / " + fmt(pf->c), 0, ps->c < 0 && pf->c > 0);
        }
        const Real slope = branch_derivative_at_zero(pb, dg.a, Chart::Psi).dc_dt;
        add("natural-slope-at-0", "<0", fmt(slope), 0, slope < 0);
        index_sequence("M_star", 0);
        index_sequence("M_sharp", 1);
        index_sequence("M_flat", 1);
        index_sequence("M_natural", 2);
        connectivity();
        chart_signs();
        if (ps && dg.regime == Regime::Window) {
          const Real c = Real(0.2) * std::abs(ps->c);
          check_count("+0.2|c_sharp|", c, 4, {0, 1, 1, 2});
          check_count("-0.2|c_sharp|", -c, 4, {0, 1, 1, 2});
        }
        for (Real c : {Real(-0.005), Real(0.005)}) check_count_at_least("c=" + fmt(c), c, 3);
        static_criterion(count(0));
        fold_checks();
        monotone_star();
        superharmonic();
        break;
      }
    }
  }

  // Along the psi chart: sign of dc/dt against the index, and the eigenvalue
  // identity -mu <du/dt, w> = dc/dt <h, w> for the second eigenpair.
  void chart_signs() {
    int bad_sign = 0, bad_id = 0, checked = 0;
    for (const char* label : {"M_flat", "M_natural", "M_sharp"}) {
      const Branch* b = dg.branch(label);
      if (!b) continue;
      const Real limit = pb.nonlinearity().threshold() + dg.chart_halfwidth;
      for (std::size_t i = 1; i + 1 < b->size(); ++i) {
        const auto& p = b->points[i];
        const Real t0 = t_projection(pb, b->points[i - 1].u(), Chart::Psi);
        const Real t1 = t_projection(pb, b->points[i + 1].u(), Chart::Psi);
        const Real t = t_projection(pb, p.u(), Chart::Psi);
        if (p.degenerate || std::abs(t) > limit || t1 == t || t == t0) continue;
        // Second order on the uneven spacing next to the inserted turning points.
        const Real h0 = t - t0;
        const Real h1 = t1 - t;
        const Real wm = -h1 / (h0 * (h0 + h1));
        const Real w0 = (h1 - h0) / (h0 * h1);
        const Real wp = h0 / (h1 * (h0 + h1));
        const Real dc = wm * b->points[i - 1].c() + w0 * p.c() + wp * b->points[i + 1].c();
        Field du = wm * b->points[i - 1].u();
        du.axpy(w0, p.u());
        du.axpy(wp, b->points[i + 1].u());
        ++checked;
        if ((dc > 0) != (p.morse_index == 1) || (dc < 0) != (p.morse_index == 2)) ++bad_sign;
        const Real mu = p.spectrum.mu(1);
        const Field& w = p.spectrum.w(1);
        const Real lhs = -mu * inner_product(du, w);
        const Real rhs = dc * inner_product(pb.harvest(), w);
        if (std::abs(mu) > Real(1e-4) && std::abs(dc) > Real(1e-4) && std::abs(lhs - rhs) > Real(0.05) * std::abs(rhs)) {
          ++bad_id;
        }
      }
    }
    add("chart-sign-vs-index", "dc/dt>0 iff index 1, dc/dt<0 iff index 2",
        std::to_string(bad_sign) + " of " + std::to_string(checked), 0, bad_sign == 0 && checked > 0);
    add("eigenvalue-identity", "within 5%", std::to_string(bad_id) + " of " + std::to_string(checked), Real(0.05),
        bad_id == 0 && checked > 0);
  }
};

}  // namespace

VerificationReport verify_structure(const Problem& pb, const BifurcationDiagram& diagram, const VerifyOptions& opts) {
  Verifier v{pb, diagram, opts, {}};
  v.run();
  return std::move(v.report);
}

std::string to_string(StabilityOutcome o) {
  switch (o) {
    case StabilityOutcome::Pass: return "pass";
    case StabilityOutcome::Fail: return "fail";
    case StabilityOutcome::Inconclusive: return "inconclusive";
  }
  return "";
}

StabilityCheck stability_crosscheck(const Problem& pb, const SolutionPoint& point, const StabilityOptions& opts) {
  StabilityCheck out;
  const Field& u = point.u();
  const Real a = point.a();
  const Real c = point.c();
  const SpectrumSlice spec = point.spectrum.pairs.empty() ? linearized_spectrum(pb, u, a) : point.spectrum;
  const Real mu1 = spec.mu(0);
  out.morse_index = morse_index(spec).index;
  out.static_applicable = c == 0;
  out.static_stable = u.min() >= Real(-1e-10) && u.max() > pb.nonlinearity().threshold();

  if (std::abs(mu1) < spec.tolerance) {
    out.dynamics = "neither";
    out.detail = "first eigenvalue vanishes; the linear rate gives no time scale";
    return out;
  }
  const Real scale = std::max(Real(1), u.norm_inf());
  Field pert(pb.domain());
  Real horizon;
  if (mu1 > 0) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(-1, 1);
    const Real pi = std::numbers::pi_v<Real>;
    for (int k = 1; k <= 4; ++k) {
      const Real r = static_cast<Real>(unit(rng)) / k;
      for (int i = 0; i < pert.size(); ++i) pert[i] += r * std::sin(k * pi * pb.domain().node(i) / pb.domain().length());
    }
    pert *= opts.return_perturbation * scale / pert.norm_inf();
    horizon = std::min(opts.max_time, Real(6) / mu1);
  } else {
    pert = spec.w(0) * (opts.depart_perturbation * scale / spec.w(0).norm_inf());
    horizon = std::min(opts.max_time, std::log(Real(100)) / -mu1);
  }
  const Real dt = std::min({Real(1e-3), imex_dt_bound(pb, a), horizon / 200});
  const MarchResult run = time_march(pb, u + pert, a, c, dt, horizon);
  out.time = run.time;
  out.initial_distance = l2_norm(pert);
  const Field disp = run.u - u;
  out.final_distance = run.diverged ? std::numeric_limits<Real>::infinity() : l2_norm(disp);
  if (!run.diverged && out.final_distance > 0) {
    out.alignment = inner_product(disp, spec.w(0)) / (out.final_distance * l2_norm(spec.w(0)));
  }
  if (out.final_distance < Real(0.1) * out.initial_distance) {
    out.dynamics = "returns";
  } else if (out.final_distance > 10 * out.initial_distance && (run.diverged || out.alignment > Real(0.9))) {
    out.dynamics = "departs";
  } else {
    out.dynamics = "neither";
  }
  if (out.dynamics == "neither") {
    out.detail = "trajectory neither returned nor departed by the margin within T";
    return out;
  }
  const bool dyn_stable = out.dynamics == "returns";
  bool agree = dyn_stable == (out.morse_index == 0);
  if (out.static_applicable) agree = agree && (out.static_stable == (out.morse_index == 0));
  out.outcome = agree ? StabilityOutcome::Pass : StabilityOutcome::Fail;
  return out;
}

}  // namespace bifurcate
