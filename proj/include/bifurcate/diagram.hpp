// Whole diagrams at fixed a: a multistart solution oracle at fixed (a, c),
// regime-specific assembly of the branches, and the structural verification
// report for each regime.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bifurcate/continuation.hpp"

namespace bifurcate {

// Worker threads for multistart; BIFURCATE_THREADS overrides the hardware count.
int thread_count();

struct CountOptions {
  int n_starts = 400;
  std::uint64_t seed = 20240917;
  Real dedup_threshold = Real(1e-4);  // relative L2
  int threads = 0;                    // 0: thread_count()
  NewtonOptions newton{};
};

struct SolutionSet {
  Real a = 0;
  Real c = 0;
  std::vector<SolutionPoint> members;       // regular roots, deduplicated, ordered by first start
  std::vector<ProblemState> degenerate;     // singular-Jacobian or zero-eigenvalue roots, deduplicated
  int n_starts = 0;
  int n_converged = 0;
  int n_singular = 0;
  int n_failed = 0;
  Real dedup_threshold = 0;
  Real span = 0;

  int count() const { return static_cast<int>(members.size()); }
  std::vector<int> indices() const;  // sorted Morse indices of the members
};

SolutionSet count_solutions(const Problem& pb, Real a, Real c, const CountOptions& opts = {});

// Relative L2 distance |u - v| / max(1, |u|).
Real relative_distance(const Field& u, const Field& v);

enum class Regime { BelowLambda1, AtLambda1, Lambda1To2, AtLambda2, Window, AboveWindow };
std::string to_string(Regime r);
Regime parse_regime(const std::string& s);

// Degenerate continuum at an eigenvalue: {t e : t in [t_lo, t_hi]} at c = 0.
struct Segment {
  Chart chart = Chart::Psi;
  Real a = 0;
  Real t_lo = 0;
  Real t_hi = 0;
  std::vector<Real> t_samples;
  std::vector<Real> residuals;
  std::vector<Real> mu;  // the vanishing eigenvalue at each sample
};

struct DiagramOptions {
  Real c_min = -10;
  Real c_max = 10;                    // only bounds the branches that never turn (a <= lambda1)
  Real chart_halfwidth = Real(0.8);   // sigma for the chart pieces next to the segment / the psi chart
  Real chart_step = Real(0.02);
  Real eigen_tolerance = Real(1e-9);  // |a - lambda_i| below this counts as "at" the eigenvalue
  ContinuationOptions continuation{};
};

struct BifurcationDiagram {
  Real a = 0;
  Regime regime = Regime::Lambda1To2;
  Real lambda1 = 0;
  Real lambda2 = 0;
  Real c_min = 0;
  Real chart_halfwidth = 0;
  std::optional<Real> delta_num;
  std::vector<Branch> branches;
  std::vector<DegeneratePoint> degenerate_points;
  std::optional<Segment> segment;
  std::vector<std::string> notes;

  const Branch* branch(const std::string& label) const;
  const DegeneratePoint* point(const std::string& label) const;
};

// Thrown when a piece fails to trace; carries whatever was assembled.
class AssemblyError : public NonConvergence {
 public:
  AssemblyError(const std::string& what, BifurcationDiagram partial)
      : NonConvergence(what), partial_(std::move(partial)) {}
  const BifurcationDiagram& partial() const { return partial_; }

 private:
  BifurcationDiagram partial_;
};

// min(a_sigma(M + halfwidth), a_sigma(-M/beta - halfwidth)) - lambda2 from the index-1 degenerate curve.
Real numerical_delta(const Problem& pb, Real chart_halfwidth);

Regime detect_regime(const Problem& pb, Real a, const DiagramOptions& opts, std::optional<Real>* delta_out = nullptr);

BifurcationDiagram assemble_diagram(const Problem& pb, Real a, const DiagramOptions& opts = {});

// Continuation from seed in both directions, joined into one branch that
// runs from the c-decreasing end to the c-increasing end.
Branch continue_through(const Problem& pb, const SolutionPoint& seed, CLimits limits, const ContinuationOptions& cont,
                        const std::string& label);

// Newton-polished points of the branch at level c, one per crossing.
std::vector<SolutionPoint> branch_solutions_at(const Problem& pb, const Branch& br, Real c);

struct VerificationClaim {
  std::string id;
  std::string expected;
  std::string measured;
  Real tolerance = 0;
  bool pass = false;
};

struct VerificationReport {
  std::string regime;
  std::vector<VerificationClaim> claims;

  bool all_pass() const;
  const VerificationClaim* find(const std::string& id) const;
};

struct VerifyOptions {
  CountOptions count{};
  std::optional<Regime> expected_regime;
};

VerificationReport verify_structure(const Problem& pb, const BifurcationDiagram& diagram, const VerifyOptions& opts = {});

enum class StabilityOutcome { Pass, Fail, Inconclusive };
std::string to_string(StabilityOutcome o);

struct StabilityOptions {
  std::uint64_t seed = 7;
  Real return_perturbation = Real(1e-3);  // relative to max(1, |u|_inf)
  Real depart_perturbation = Real(1e-4);
  Real max_time = 50;
};

struct StabilityCheck {
  StabilityOutcome outcome = StabilityOutcome::Inconclusive;
  int morse_index = 0;
  std::string dynamics;  // returns | departs | neither
  Real initial_distance = 0;
  Real final_distance = 0;
  Real alignment = 0;    // cosine between the final displacement and w1 (departures)
  Real time = 0;
  bool static_applicable = false;  // c == 0
  bool static_stable = false;      // u >= 0 and max u > M
  std::string detail;
};

StabilityCheck stability_crosscheck(const Problem& pb, const SolutionPoint& point, const StabilityOptions& opts = {});

}  // namespace bifurcate
