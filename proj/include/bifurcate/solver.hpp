// Steady-state residual and Jacobian, damped Newton, the truncated energy
// functional and an IMEX time integrator.
#pragma once

#include <string>
#include <vector>

#include "bifurcate/problem.hpp"
#include "bifurcate/spectral.hpp"

namespace bifurcate {

struct ProblemState {
  Field u;
  Real a;
  Real c;
};

enum class SolutionTag { Stable, Index1, Index2, HigherIndex, Degenerate0, Degenerate1 };

std::string to_string(SolutionTag tag);
SolutionTag parse_solution_tag(const std::string& s);

struct SolutionPoint {
  ProblemState state;
  Real residual_norm = 0;  // L-infinity
  int iterations = 0;
  SpectrumSlice spectrum;
  int morse_index = 0;
  bool degenerate = false;
  SolutionTag tag = SolutionTag::Stable;
  std::vector<Real> residual_history;

  const Field& u() const { return state.u; }
  Real a() const { return state.a; }
  Real c() const { return state.c; }
};

// Raised when the Newton matrix has a pivot below the threshold; the state is
// where it happened so the caller can switch to an extended system.
class SingularJacobian : public NonConvergence {
 public:
  SingularJacobian(const std::string& what, ProblemState state)
      : NonConvergence(what), state_(std::move(state)) {}
  const ProblemState& state() const { return state_; }

 private:
  ProblemState state_;
};

// Delta_h u + a u - f(u) - c h
Field residual(const Problem& pb, const Field& u, Real a, Real c);
// Delta_h + a - f'(u)
SymTridiagonal jacobian(const Problem& pb, const Field& u, Real a);

struct NewtonOptions {
  Real tolerance = Real(1e-10);
  int max_iterations = 50;
  Real armijo_factor = Real(0.5);
  Real min_step = Real(1) / Real(1 << 20);
  Real singular_pivot = Real(1e-13);
  int spectrum_k = 3;
  // Off: the returned point has an empty spectrum and morse_index -1.
  bool with_spectrum = true;
};

SolutionPoint newton_solve(const Problem& pb, const Field& init, Real a, Real c, const NewtonOptions& opts = {});

// Attaches residual, spectrum, index and tag to a state without solving.
SolutionPoint make_solution_point(const Problem& pb, const Field& u, Real a, Real c, int spectrum_k = 3);

SolutionTag classify(const SpectrumSlice& spectrum, int morse_index, bool degenerate);

// I_K(u) = 1/2 integral(|grad u|^2 - a u^2) + integral F_K(u) + c integral h u,
// where f_K continues f linearly beyond K.
Real energy_functional(const Problem& pb, const Field& u, Real a, Real c, Real cap);

struct MarchResult {
  Field u;
  bool diverged = false;
  Real time = 0;
};

// Largest dt accepted by time_march at rate a.
Real imex_dt_bound(const Problem& pb, Real a);

// Integrates u_t = Delta u + a u - f(u) - c h with (I - dt(Delta + a)) implicit
// and f, h explicit. Stops early with diverged = true once |u|_inf > 10 K_a.
MarchResult time_march(const Problem& pb, const Field& u0, Real a, Real c, Real dt, Real final_time);

}  // namespace bifurcate
