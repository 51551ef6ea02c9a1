#include "bifurcate/solver.hpp"

#include <algorithm>
#include <cmath>

#include "bifurcate/linalg.hpp"

namespace bifurcate {

std::string to_string(SolutionTag tag) {
  switch (tag) {
    case SolutionTag::Stable: return "stable";
    case SolutionTag::Index1: return "index-1";
    case SolutionTag::Index2: return "index-2";
    case SolutionTag::HigherIndex: return "index-3+";
    case SolutionTag::Degenerate0: return "degenerate-0";
    case SolutionTag::Degenerate1: return "degenerate-1";
  }
  return "stable";
}

SolutionTag parse_solution_tag(const std::string& s) {
  for (auto t : {SolutionTag::Stable, SolutionTag::Index1, SolutionTag::Index2, SolutionTag::HigherIndex,
                 SolutionTag::Degenerate0, SolutionTag::Degenerate1}) {
    if (to_string(t) == s) return t;
  }
  throw DomainError("unknown solution tag '" + s + "'");
}

Field residual(const Problem& pb, const Field& u, Real a, Real c) {
  Field r = pb.laplacian().apply(u);
  const Field& h = pb.harvest();
  for (int i = 0; i < u.size(); ++i) {
    r[i] += a * u[i] - eval_nonlinearity(pb.nonlinearity(), u[i]).f - c * h[i];
  }
  return r;
}

SymTridiagonal jacobian(const Problem& pb, const Field& u, Real a) {
  std::vector<Real> extra(u.size());
  for (int i = 0; i < u.size(); ++i) extra[i] = a - eval_nonlinearity(pb.nonlinearity(), u[i]).df;
  return pb.laplacian().plus_diagonal(extra);
}

SolutionTag classify(const SpectrumSlice& spectrum, int morse_index, bool degenerate) {
  if (degenerate) {
    if (std::abs(spectrum.mu(0)) < spectrum.tolerance) return SolutionTag::Degenerate0;
    if (std::abs(spectrum.mu(1)) < spectrum.tolerance) return SolutionTag::Degenerate1;
  }
  switch (morse_index) {
    case 0: return SolutionTag::Stable;
    case 1: return SolutionTag::Index1;
    case 2: return SolutionTag::Index2;
    default: return SolutionTag::HigherIndex;
  }
}

SolutionPoint make_solution_point(const Problem& pb, const Field& u, Real a, Real c, int spectrum_k) {
  SolutionPoint pt{ProblemState{u, a, c}, 0, 0, {}, 0, false, SolutionTag::Stable, {}};
  pt.residual_norm = residual(pb, u, a, c).norm_inf();
  pt.spectrum = linearized_spectrum(pb, u, a, spectrum_k);
  const auto info = morse_index(pt.spectrum);
  pt.morse_index = info.index;
  pt.degenerate = info.degenerate;
  pt.tag = classify(pt.spectrum, info.index, info.degenerate);
  return pt;
}

SolutionPoint newton_solve(const Problem& pb, const Field& init, Real a, Real c, const NewtonOptions& opts) {
  if (!init.all_finite()) throw DomainError("newton initial guess is not finite");
  Field u = init;
  Field r = residual(pb, u, a, c);
  Real rn = r.norm_inf();
  std::vector<Real> history{rn};
  int it = 0;
  auto check_pivots = [&](const linalg::TridiagonalLU& lu) {
    if (lu.singular(opts.singular_pivot)) {
      throw SingularJacobian("jacobian pivot ratio " + std::to_string(static_cast<double>(lu.min_pivot_ratio())) +
                                 " below threshold",
                             ProblemState{u, a, c});
    }
  };
  while (rn >= opts.tolerance) {
    if (it >= opts.max_iterations) {
      throw NonConvergence("newton did not converge in " + std::to_string(opts.max_iterations) +
                           " iterations (residual " + std::to_string(static_cast<double>(rn)) + ")");
    }
    const linalg::TridiagonalLU lu(jacobian(pb, u, a));
    check_pivots(lu);
    Field du = r;
    lu.solve_in_place(du.values());
    Real step = 1;
    while (true) {
      Field trial = u;
      trial.axpy(-step, du);
      Field rt = residual(pb, trial, a, c);
      const Real rtn = rt.norm_inf();
      if (std::isfinite(rtn) && rtn <= (1 - Real(1e-4) * step) * rn) {
        u = std::move(trial);
        r = std::move(rt);
        rn = rtn;
        break;
      }
      step *= opts.armijo_factor;
      if (step < opts.min_step) throw NonConvergence("newton line search stalled");
    }
    history.push_back(rn);
    ++it;
  }
  // A root where J is singular is a degenerate point, not a regular solution.
  check_pivots(linalg::TridiagonalLU(jacobian(pb, u, a)));
  SolutionPoint pt = opts.with_spectrum
                         ? make_solution_point(pb, u, a, c, opts.spectrum_k)
                         : SolutionPoint{ProblemState{u, a, c}, rn, 0, {}, -1, false, SolutionTag::Stable, {}};
  pt.iterations = it;
  pt.residual_history = std::move(history);
  return pt;
}

Real energy_functional(const Problem& pb, const Field& u, Real a, Real c, Real cap) {
  if (!(cap > 0)) throw DomainError("energy functional needs K > 0");
  const auto& nl = pb.nonlinearity();
  const Real hs = pb.domain().spacing();
  const int n = u.size();
  const auto atk = eval_nonlinearity(nl, cap);
  const Real big_f_k = antiderivative(nl, cap);
  Real grad = 0;
  for (int i = 0; i <= n; ++i) {
    const Real left = i > 0 ? u[i - 1] : Real(0);
    const Real right = i < n ? u[i] : Real(0);
    grad += (right - left) * (right - left);
  }
  grad /= hs;
  Real rest = 0;
  for (int i = 0; i < n; ++i) {
    Real fk;
    if (u[i] <= cap) {
      fk = antiderivative(nl, u[i]);
    } else {
      const Real d = u[i] - cap;
      fk = big_f_k + atk.f * d + atk.df * d * d / 2;
    }
    rest += -a * u[i] * u[i] / 2 + fk + c * pb.harvest()[i] * u[i];
  }
  return grad / 2 + hs * rest;
}

Real imex_dt_bound(const Problem& pb, Real a) {
  const Real cap = critical_cap(pb.nonlinearity(), std::max(a, pb.lambda1()));
  const Real growth = std::max(a - pb.lambda1(), Real(0));
  const Real stiff = eval_nonlinearity(pb.nonlinearity(), 2 * cap).df;
  return Real(1) / (growth + stiff + 1);
}

MarchResult time_march(const Problem& pb, const Field& u0, Real a, Real c, Real dt, Real final_time) {
  if (!(final_time > 0)) throw DomainError("time_march needs T > 0");
  if (!(dt > 0) || dt > imex_dt_bound(pb, a)) {
    throw DomainError("time step " + std::to_string(static_cast<double>(dt)) + " outside (0, " +
                      std::to_string(static_cast<double>(imex_dt_bound(pb, a))) + "]");
  }
  const Real cap = critical_cap(pb.nonlinearity(), std::max(a, pb.lambda1()));
  // I - dt (Delta + a)
  const auto implicit = pb.laplacian().shifted(a).scaled(-dt).shifted(1);
  const linalg::TridiagonalLU lu(implicit);
  const Field& h = pb.harvest();
  MarchResult out{u0};
  Field& u = out.u;
  const long steps = std::lround(std::ceil(final_time / dt));
  for (long s = 0; s < steps; ++s) {
    const Real step = std::min(dt, final_time - out.time);
    if (step <= 0) break;
    if (step != dt) {
      const auto last = pb.laplacian().shifted(a).scaled(-step).shifted(1);
      const linalg::TridiagonalLU lu_last(last);
      for (int i = 0; i < u.size(); ++i) u[i] -= step * (eval_nonlinearity(pb.nonlinearity(), u[i]).f + c * h[i]);
      lu_last.solve_in_place(u.values());
    } else {
      for (int i = 0; i < u.size(); ++i) u[i] -= step * (eval_nonlinearity(pb.nonlinearity(), u[i]).f + c * h[i]);
      lu.solve_in_place(u.values());
    }
    out.time += step;
    if (!u.all_finite() || u.norm_inf() > 10 * cap) {
      out.diverged = true;
      break;
    }
  }
  return out;
}

}  // namespace bifurcate
