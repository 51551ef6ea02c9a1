// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bifurcate/diagram.hpp"

using namespace bifurcate;

namespace {

constexpr Real kPi = std::numbers::pi_v<Real>;

Problem canonical(Real m) { return Problem(build_grid(399, 1.0L), {m, 3}, {HarvestProfile::Canonical, 1}); }

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

std::string g(Real x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6Lg", x);
  return buf;
}

std::string indices(const std::vector<int>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

Real rel(Real x, Real ref) { return std::abs(x - ref) / std::abs(ref); }

void require_claims(Verdict& v, const VerificationReport& rep, const std::vector<std::string>& prefixes) {
  for (const auto& c : rep.claims) {
    for (const auto& p : prefixes) {
      if (c.id.rfind(p, 0) == 0 && !c.pass) v.require(false, c.id + " expected " + c.expected + ", got " + c.measured);
    }
  }
  for (const auto& p : prefixes) {
    bool any = false;
    for (const auto& c : rep.claims) any = any || c.id.rfind(p, 0) == 0;
    v.require(any, "claim " + p + " not evaluated");
  }
}

// The three regimes the structural criteria share.
struct Fixtures {
  Problem flat = canonical(0);  // M = 0
  Problem ramp = canonical(0.2L);
  std::optional<BifurcationDiagram> d20, dl2, dwin;
  std::optional<VerificationReport> r20, rl2, rwin;

  const BifurcationDiagram& a20() {
    if (!d20) d20 = assemble_diagram(flat, 20);
    return *d20;
  }
  const BifurcationDiagram& at_lambda2() {
    if (!dl2) dl2 = assemble_diagram(ramp, ramp.lambda2());
    return *dl2;
  }
  const BifurcationDiagram& window() {
    if (!dwin) dwin = assemble_diagram(ramp, ramp.lambda2() + Real(0.5) * numerical_delta(ramp, DiagramOptions{}.chart_halfwidth));
    return *dwin;
  }
  const VerificationReport& report(std::optional<VerificationReport>& slot, const Problem& pb,
                                   const BifurcationDiagram& dg, Regime expect) {
    if (!slot) {
      VerifyOptions vo;
      vo.expected_regime = expect;
      slot = verify_structure(pb, dg, vo);
    }
    return *slot;
  }
};

void eigenvalues(Verdict& v, Fixtures& fx) {
  const Problem& pb = fx.ramp;
  const Real pi2 = kPi * kPi;
  const Real e1 = rel(pb.lambda1(), pi2), e2 = rel(pb.lambda2(), 4 * pi2), e3 = rel(pb.lambda3() - pb.lambda2(), 5 * pi2);
  v.detail << "lambda1=" << g(pb.lambda1()) << " (rel " << g(e1) << "), lambda2=" << g(pb.lambda2()) << " (rel "
           << g(e2) << "), lambda3-lambda2=" << g(pb.lambda3() - pb.lambda2()) << " (rel " << g(e3) << ")";
  v.require(e1 < 1e-4L, "lambda1");
  v.require(e2 < 1e-4L, "lambda2");
  v.require(e3 < 1e-4L, "gap to lambda3");
  v.require(pb.lambda2() - pb.lambda1() > 1 && pb.lambda3() - pb.lambda2() > 1, "lambda2 simple");
}

void theorem1(Verdict& v, Fixtures& fx) {
  const Problem& pb = fx.flat;
  const BifurcationDiagram& dg = fx.a20();
  const DegeneratePoint* p = dg.point("p_star");
  v.require(p != nullptr, "fold found");
  if (!p) return;
  const Real cs = p->c;
  v.detail << "c_star=" << g(cs);
  for (Real c : {Real(-5), Real(-1), Real(0), cs / 2}) {
    const SolutionSet s = count_solutions(pb, 20, c);
    v.detail << " N(" << g(c) << ")=" << s.count() << indices(s.indices());
    v.require(s.count() == 2, "count 2 at c=" + g(c));
    v.require(s.indices() == std::vector<int>{0, 1}, "indices {0,1} at c=" + g(c));
  }
  const SolutionSet above = count_solutions(pb, 20, cs + Real(0.5));
  v.detail << " N(c_star+0.5)=" << above.count();
  v.require(above.count() == 0, "count 0 above the fold");
  v.detail << " fold residual=" << g(p->residual) << " kernel=" << g(p->kernel_residual);
  v.require(p->residual < 1e-10L && p->kernel_residual < 1e-10L, "fold residuals < 1e-10");
  const VerificationReport& rep = fx.report(fx.r20, pb, dg, Regime::Lambda1To2);
  require_claims(v, rep, {"connected", "single-fold", "branch-endpoints", "regime"});
}

void fold_formulas(Verdict& v, Fixtures& fx) {
  const DegeneratePoint* p = fx.a20().point("p_star");
  v.require(p != nullptr, "fold found");
  if (!p) return;
  const FoldLocalCheck f = fold_local_check(fx.flat, *p);
  const Real e1 = rel(f.c2_fd, f.c2_formula), e2 = rel(f.mu_fd, f.mu_formula);
  v.detail << "c''_fd=" << g(f.c2_fd) << " formula=" << g(f.c2_formula) << " (rel " << g(e1) << "); mu'_fd=" << g(f.mu_fd)
           << " formula=" << g(f.mu_formula) << " (rel " << g(e2) << ")";
  v.require(e1 < 0.05L, "curvature within 5%");
  v.require(e2 < 0.05L, "eigenvalue slope within 5%");
}

void chart_slopes(Verdict& v, Fixtures& fx) {
  const Problem& pb = fx.ramp;
  const Real pi3 = kPi * kPi * kPi;
  struct Case {
    const char* name;
    Real a;
    Chart chart;
    Real expect;
  };
  for (const Case& cs : {Case{"phi@lambda1+1", pb.lambda1() + 1, Chart::Phi, pi3 / 4},
                         Case{"psi@lambda2-0.5", pb.lambda2() - Real(0.5), Chart::Psi, pi3 / 3},
                         Case{"psi@lambda2+0.5", pb.lambda2() + Real(0.5), Chart::Psi, -pi3 / 3}}) {
    const BranchDerivative d = branch_derivative_at_zero(pb, cs.a, cs.chart);
    const Real dt = Real(1e-3);
    const Branch br = trace_chart(pb, cs.a, cs.chart, {-dt, 0, dt}, pb.zeros(), 0);
    const Real fd = (br.points[2].c() - br.points[0].c()) / (2 * dt);
    v.detail << cs.name << ": formula=" << g(d.dc_dt) << " fd=" << g(fd) << " closed=" << g(cs.expect) << "; ";
    v.require(rel(fd, cs.expect) < 0.01L, std::string(cs.name) + " fd vs closed form");
    v.require(rel(d.dc_dt, fd) < 0.01L, std::string(cs.name) + " formula vs fd");
    v.require((fd > 0) == (cs.expect > 0), std::string(cs.name) + " sign");
  }
}

void theorem2(Verdict& v, Fixtures& fx) {
  const Problem& pb = fx.ramp;
  const Real a = pb.lambda2();
  Real worst_res = 0, worst_mu = 0;
  for (Real t : {Real(-0.2), Real(-0.1), Real(0), Real(0.1), Real(0.2)}) {
    const SolutionPoint p = make_solution_point(pb, t * pb.psi(), a, 0);
    worst_res = std::max(worst_res, p.residual_norm);
    worst_mu = std::max(worst_mu, std::abs(p.spectrum.mu(1)));
  }
  v.detail << "max residual=" << g(worst_res) << " max |mu2|=" << g(worst_mu);
  v.require(worst_res < 1e-12L, "segment residual < 1e-12");
  v.require(worst_mu < 1e-10L, "|mu2| < 1e-10");
  const BifurcationDiagram& dg = fx.at_lambda2();
  v.detail << " pieces=" << dg.branches.size() << "+segment+" << dg.degenerate_points.size() << " point(s)";
  const VerificationReport& rep = fx.report(fx.rl2, pb, dg, Regime::AtLambda2);
  require_claims(v, rep, {"decomposition", "joins-segment:M_flat", "joins-segment:M_sharp", "connected", "regime",
                          "segment-residual", "segment-degenerate"});
}

void theorem3(Verdict& v, Fixtures& fx) {
  const Problem& pb = fx.ramp;
  const BifurcationDiagram& dg = fx.window();
  const DegeneratePoint* ps = dg.point("p_sharp");
  const DegeneratePoint* pf = dg.point("p_flat");
  const DegeneratePoint* pst = dg.point("p_star");
  v.require(ps && pf && pst, "special points present");
  if (!(ps && pf && pst)) return;
  v.detail << "a=" << g(dg.a) << " c_sharp=" << g(ps->c) << " c_flat=" << g(pf->c) << " c_star=" << g(pst->c);
  CountOptions o;
  o.n_starts = 800;
  for (Real c : {Real(-0.2) * std::abs(ps->c), Real(0.2) * std::abs(ps->c)}) {
    const SolutionSet s = count_solutions(pb, dg.a, c, o);
    v.detail << " N(" << g(c) << ")=" << s.count() << indices(s.indices());
    v.require(s.count() == 4, "count 4 at c=" + g(c));
    v.require(s.indices() == std::vector<int>{0, 1, 1, 2}, "indices {0,1,1,2} at c=" + g(c));
  }
  for (const DegeneratePoint* p : {ps, pf, pst}) {
    v.require(p->residual < 1e-10L && p->kernel_residual < 1e-10L, p->label + " refined below 1e-10");
  }
  const VerificationReport& rep = fx.report(fx.rwin, pb, dg, Regime::Window);
  if (const auto* c = rep.find("natural-slope-at-0")) v.detail << " (c^nat)'(0)=" << c->measured;
  require_claims(v, rep, {"natural-slope-at-0", "decomposition", "connected", "refined:", "regime"});
}

void fold_curve(Verdict& v, Fixtures& fx) {
  const Problem& pb = fx.flat;
  const DegeneratePoint* seed = fx.a20().point("p_star");
  v.require(seed != nullptr, "seed fold");
  if (!seed) return;
  const DegenerateCurve cur = trace_fold_curve(pb, *seed, {12, 20, 30, 45, 60});
  v.require(cur.points.size() == 5, "five samples");
  if (cur.points.size() != 5) return;
  for (std::size_t i = 0; i < 5; ++i) {
    const Real e = rel(cur.slope_secant[i], cur.slope_formula[i]);
    v.detail << "c*(" << g(cur.points[i].a) << ")=" << g(cur.points[i].c) << " slope rel " << g(e) << "; ";
    v.require(e < 0.05L, "slope identity at a=" + g(cur.points[i].a));
    if (i > 0) v.require(cur.points[i].c > cur.points[i - 1].c, "increasing at a=" + g(cur.points[i].a));
  }
  v.require(cur.points[4].c > 3 * cur.points[0].c, "c*(60) > 3 c*(12)");
}

void stability(Verdict& v, Fixtures& fx) {
  int agree = 0, total = 0, inconclusive = 0, lemma = 0, lemma_total = 0;
  std::string failures;
  auto check = [&](const Problem& pb, const SolutionPoint& p, const std::string& what) {
    const StabilityCheck s = stability_crosscheck(pb, p);
    if (s.outcome == StabilityOutcome::Inconclusive) {
      ++inconclusive;
      return;
    }
    ++total;
    if (s.outcome == StabilityOutcome::Pass) {
      ++agree;
    } else {
      failures += " " + what + "(" + s.detail + ")";
    }
    if (s.static_applicable) {
      ++lemma_total;
      lemma += s.static_stable == (s.morse_index == 0);
    }
  };
  auto from_point = [](const Problem& pb, const DegeneratePoint& d) { return make_solution_point(pb, d.u, d.a, d.c); };

  // (lambda1, lambda2), M = 0: the solutions counted at c = -5, -1, 0 and the fold.
  for (Real c : {Real(-5), Real(-1), Real(0)}) {
    for (const auto& p : count_solutions(fx.flat, 20, c).members) check(fx.flat, p, "a=20,c=" + g(c));
  }
  check(fx.flat, from_point(fx.flat, *fx.a20().point("p_star")), "p_star@20");

  // a = lambda2: the segment samples, and every root at c = 0.
  const Real l2 = fx.ramp.lambda2();
  for (Real t : {Real(-0.2), Real(-0.1), Real(0), Real(0.1), Real(0.2)}) {
    check(fx.ramp, make_solution_point(fx.ramp, t * fx.ramp.psi(), l2, 0), "segment t=" + g(t));
  }
  for (const auto& p : count_solutions(fx.ramp, l2, 0).members) check(fx.ramp, p, "lambda2,c=0");
  check(fx.ramp, from_point(fx.ramp, *fx.at_lambda2().point("p_star")), "p_star@lambda2");

  // Window: the four solutions at c = +-0.2|c_sharp|, the roots at c = 0 and the three special points.
  const BifurcationDiagram& w = fx.window();
  CountOptions o;
  o.n_starts = 800;
  const Real cs = std::abs(w.point("p_sharp")->c);
  for (Real c : {Real(-0.2) * cs, Real(0), Real(0.2) * cs}) {
    for (const auto& p : count_solutions(fx.ramp, w.a, c, o).members) check(fx.ramp, p, "window,c=" + g(c));
  }
  for (const char* label : {"p_sharp", "p_flat", "p_star"}) {
    check(fx.ramp, from_point(fx.ramp, *w.point(label)), std::string(label) + "@window");
  }

  v.detail << agree << "/" << total << " agree (" << inconclusive
           << " inconclusive: zero first eigenvalue); static criterion " << lemma << "/" << lemma_total
           << " at c=0" << failures;
  v.require(total > 0 && agree == total, "index vs dynamics");
  v.require(lemma_total > 0 && lemma == lemma_total, "static criterion at c=0");
}

void linear_regime(Verdict& v, Fixtures& fx) {
  const Problem& pb = fx.ramp;
  for (Real c : {Real(-0.5), Real(0.05), Real(0.5)}) {
    const SolutionPoint p = newton_solve(pb, pb.zeros(), 5, c);
    const Real err = (p.u() - linear_regime_solution(pb, 5, c)).norm_inf();
    v.detail << "c=" << g(c) << ": max u=" << g(p.u().max()) << " err=" << g(err) << "; ";
    v.require(p.u().max() <= pb.nonlinearity().threshold(), "u <= M at c=" + g(c));
    v.require(err < 1e-8L, "closed form at c=" + g(c));
  }
}

void monotonicity(Verdict& v, Fixtures& fx) {
  const Problem& pb = fx.flat;
  const BifurcationDiagram& dg = fx.a20();
  const VerificationReport& rep = fx.report(fx.r20, pb, dg, Regime::Lambda1To2);
  for (const char* id : {"monotone-in-c:M_star", "superharmonic:|c|<=0.01"}) {
    if (const auto* c = rep.find(id)) v.detail << id << ": " << c->measured << "; ";
  }
  require_claims(v, rep, {"monotone-in-c:M_star", "superharmonic:|c|<=0.01"});
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<void(Verdict&, Fixtures&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "eigenvalue anchors", eigenvalues},
      {2, "(lambda1,lambda2) counts and single fold, a=20", theorem1},
      {3, "fold curvature and eigenvalue slope at p_star", fold_formulas},
      {4, "chart slopes at the trivial solution", chart_slopes},
      {5, "segment at a=lambda2 and five-piece decomposition", theorem2},
      {6, "window: four solutions and seven-piece decomposition", theorem3},
      {7, "fold curve trend and slope identity", fold_curve},
      {8, "Morse index vs dynamics; static criterion at c=0", stability},
      {9, "linear-regime closed form, a=5", linear_regime},
      {10, "monotonicity along M_star and superharmonicity", monotonicity},
  };
  Fixtures fx;
  int failed = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v, fx);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !v.pass;
    std::printf("criterion %2d: %s  %s (%.1fs)  %s\n", c.id, v.pass ? "PASS" : "FAIL", c.name, secs,
                v.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
