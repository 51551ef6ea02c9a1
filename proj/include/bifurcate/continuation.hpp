// Branch tracing: pseudo-arclength continuation in c, fold refinement by the
// extended system {F = 0, J w = 0, |w|^2 = const}, the degenerate curves in a
// (index 0) and in the psi-coordinate t (index 1), the c = 0 curves, and the
// local derivative formulas checked along them.
#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bifurcate/solver.hpp"

namespace bifurcate {

enum class Chart { Phi, Psi };
std::string to_string(Chart chart);
Chart parse_chart(const std::string& s);

// t = <u,e>/<e,e> with e = phi or psi.
Real t_projection(const Problem& pb, const Field& u, Chart chart);

enum class DegenerateKind { Fold, Index1 };
std::string to_string(DegenerateKind kind);
DegenerateKind parse_degenerate_kind(const std::string& s);

struct DegeneratePoint {
  Real a;
  Real c;
  Field u;
  Field w;  // kernel vector: |w|^2 = |phi|^2 (fold) or |psi|^2 (index 1)
  int morse_index;
  DegenerateKind kind;
  Real residual;         // |F(u)|_inf
  Real kernel_residual;  // |(Delta + a - f'(u)) w|_inf
  std::string label;
};

struct DegenerateCurve {
  DegenerateKind kind = DegenerateKind::Fold;
  std::string parameter;  // "a" or "t"
  std::vector<Real> values;
  std::vector<DegeneratePoint> points;
  // Fold curves only: c'(a) from <u,w>/<h,w> and from a central secant.
  std::vector<Real> slope_formula;
  std::vector<Real> slope_secant;
};

struct BranchEvent {
  std::string kind;  // fold | index-change | c-limit | max-points | degenerate | chart-end
  int point = 0;
  std::string note;
};

struct Branch {
  std::string label;
  Chart chart = Chart::Phi;
  std::vector<SolutionPoint> points;
  std::vector<Real> arclength;
  std::vector<BranchEvent> events;
  std::vector<DegeneratePoint> degenerate;  // refined along the way, in order
  std::string end_reason;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

// Thrown when the step size falls below the minimum; carries the branch so far.
class StepUnderflow : public NonConvergence {
 public:
  StepUnderflow(const std::string& what, Branch partial) : NonConvergence(what), partial_(std::move(partial)) {}
  const Branch& partial() const { return partial_; }

 private:
  Branch partial_;
};

struct ContinuationOptions {
  Real initial_step = Real(0.05);
  Real max_step = Real(0.4);
  Real min_step = Real(1e-8);
  Real growth = Real(1.3);
  int easy_iterations = 3;
  int corrector_iterations = 10;
  Real tolerance = Real(1e-10);
  int max_points = 4000;
  bool stop_at_fold = true;
  Chart chart = Chart::Phi;  // only for reporting t_proj
  int spectrum_k = 3;
};

struct CLimits {
  Real lo = -10;
  Real hi = std::numeric_limits<Real>::infinity();
};

// direction +1 starts with c increasing.
Branch continue_branch(const Problem& pb, const SolutionPoint& start, int direction, CLimits limits,
                       const ContinuationOptions& opts = {});

// Newton on {F = 0, J w = 0, |w|^2 = norm} in (u, w, c) at the bracket's a.
// The kind follows whichever of mu1 / mu2 changes sign across the bracket.
DegeneratePoint refine_fold(const Problem& pb, const SolutionPoint& left, const SolutionPoint& right);

// Same system from an explicit guess.
DegeneratePoint solve_degenerate(const Problem& pb, Real a, const Field& u_guess, const Field& w_guess,
                                 Real c_guess, DegenerateKind kind);

// Index-0 degenerate points at each target a (sorted ascending), marching
// from the seed. Slope identity samples use a secant of width 2*secant_da.
DegenerateCurve trace_fold_curve(const Problem& pb, const DegeneratePoint& seed, const std::vector<Real>& a_targets,
                                 Real max_da = Real(1), Real secant_da = Real(1e-3));

// Index-1 degenerate curve u = t psi + y, <y,psi> = 0, unknowns (y, zeta, a, c),
// solved at each t (sorted ascending) by marching out from the segment.
DegenerateCurve trace_index1_degenerate_curve(const Problem& pb, const std::vector<Real>& t_values);

enum class CZeroBranch { Dagger, DoubleDagger };

// c = 0 solutions continued in a (natural parameter). Dagger starts at
// (M + eps) phi; DoubleDagger at sign * (M + eps) psi.
Branch continue_czero_branch(const Problem& pb, CZeroBranch which, const std::vector<Real>& a_values,
                             int sign = 1);

// Solves F(u, c) = 0 with <u, e> = t <e, e> for (u, c).
SolutionPoint chart_solve(const Problem& pb, Real a, const Field& e, Real t, const Field& u_guess, Real c_guess,
                          Real tolerance = Real(1e-10), int spectrum_k = 3);

// Chart solves at each t, each seeded by the previous one.
Branch trace_chart(const Problem& pb, Real a, Chart chart, const std::vector<Real>& t_values, const Field& u_guess,
                   Real c_guess, const std::string& label = {});

struct BranchDerivative {
  Real dc_dt;
  Field v;
};

// Tangent of the solution curve through the trivial solution in the given
// chart: dc/dt = (|e|^2 / <h,e>) (a - lambda_e) and
// v = e + dc/dt (Delta + a)^{-1} (h - (<h,e>/|e|^2) e).
BranchDerivative branch_derivative_at_zero(const Problem& pb, Real a, Chart chart);

struct FoldLocalCheck {
  Real c2_fd;
  Real c2_formula;  // -<f''(u) w^3> / <h w>
  Real mu_fd;
  Real mu_formula;  // <f''(u) w^3> / <w w>
  Real signc_lhs;   // <f'(u) u - f(u), w>
  Real signc_rhs;   // c <h, w>
};

// Finite differences in the w-chart through an index-0 fold.
FoldLocalCheck fold_local_check(const Problem& pb, const DegeneratePoint& fold, Real dt = Real(1e-3));

// c times [(<h,phi>/((a - lambda1)|phi|^2)) phi + (Delta + a)^{-1}(h - (<h,phi>/|phi|^2) phi)],
// the exact solution while f is inactive.
Field linear_regime_solution(const Problem& pb, Real a, Real c);

}  // namespace bifurcate
