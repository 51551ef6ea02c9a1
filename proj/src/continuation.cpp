#include "bifurcate/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "bifurcate/linalg.hpp"

namespace bifurcate {

namespace {

using Vec = std::vector<Real>;

Real max_abs(const Vec& v) {
  Real m = 0;
  for (Real x : v) m = std::max(m, std::abs(x));
  return m;
}

struct SystemSolution {
  Vec x;
  Real norm;
  int iterations;
};

// Damped Newton for a square system given residual and sparse Jacobian callbacks.
SystemSolution newton_system(Vec x, const std::function<Vec(const Vec&)>& eval,
                             const std::function<linalg::SparseSystem(const Vec&)>& assemble, Real tol,
                             int max_iter) {
  Vec r = eval(x);
  Real rn = max_abs(r);
  int it = 0;
  while (!(rn < tol)) {
    if (it >= max_iter || !std::isfinite(rn)) {
      throw NonConvergence("extended system did not converge (residual " + std::to_string(static_cast<double>(rn)) +
                           ")");
    }
    const Vec dx = assemble(x).solve(r);
    Real step = 1;
    while (true) {
      Vec trial = x;
      for (std::size_t i = 0; i < x.size(); ++i) trial[i] -= step * dx[i];
      Vec rt = eval(trial);
      const Real rtn = max_abs(rt);
      if (std::isfinite(rtn) && rtn < rn) {
        x = std::move(trial);
        r = std::move(rt);
        rn = rtn;
        break;
      }
      step /= 2;
      if (step < Real(1) / 1024) throw NonConvergence("extended system line search stalled");
    }
    ++it;
  }
  return {std::move(x), rn, it};
}

Field field_from(const Domain& d, const Vec& x, int offset) {
  return Field(d, Vec(x.begin() + offset, x.begin() + offset + d.size()));
}

// Delta u + a u - f(u) - c h into out[0..n)
void steady_residual(const Problem& pb, std::span<const Real> u, Real a, Real c, std::span<Real> out) {
  pb.laplacian().apply(u, out);
  const Field& h = pb.harvest();
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] += a * u[i] - eval_nonlinearity(pb.nonlinearity(), u[i]).f - c * h[i];
  }
}

// (Delta + a - f'(u)) w into out
void kernel_residual(const Problem& pb, std::span<const Real> u, std::span<const Real> w, Real a,
                     std::span<Real> out) {
  pb.laplacian().apply(w, out);
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] += (a - eval_nonlinearity(pb.nonlinearity(), u[i]).df) * w[i];
  }
}

SymTridiagonal jacobian_raw(const Problem& pb, std::span<const Real> u, Real a) {
  std::vector<Real> extra(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) extra[i] = a - eval_nonlinearity(pb.nonlinearity(), u[i]).df;
  return pb.laplacian().plus_diagonal(extra);
}

Real sign_of(Real x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

Real product_distance(const Field& u1, Real c1, const Field& u2, Real c2) {
  return l2_norm(u1 - u2) + std::abs(c1 - c2);
}

const Field& chart_field(const Problem& pb, Chart chart) { return chart == Chart::Phi ? pb.phi() : pb.psi(); }

DegeneratePoint finish_degenerate(const Problem& pb, Real a, Real c, Field u, Field w, DegenerateKind kind) {
  if (kind == DegenerateKind::Fold) {
    Real sum = 0;
    for (int i = 0; i < w.size(); ++i) sum += w[i];
    if (sum < 0) w *= Real(-1);
  } else if (inner_product(w, pb.psi()) < 0) {
    w *= Real(-1);
  }
  const auto spec = linearized_spectrum(pb, u, a, 3);
  int index = 0;
  for (const auto& p : spec.pairs) {
    if (p.value < -spec.tolerance) ++index;
  }
  Field kr(u.domain());
  kernel_residual(pb, u.values(), w.values(), a, kr.values());
  const Real res = residual(pb, u, a, c).norm_inf();
  return DegeneratePoint{a, c, std::move(u), std::move(w), index, kind, res, kr.norm_inf(), {}};
}

}  // namespace

std::string to_string(Chart chart) { return chart == Chart::Phi ? "phi" : "psi"; }

Chart parse_chart(const std::string& s) {
  if (s == "phi") return Chart::Phi;
  if (s == "psi") return Chart::Psi;
  throw DomainError("unknown chart '" + s + "' (expected phi or psi)");
}

std::string to_string(DegenerateKind kind) { return kind == DegenerateKind::Fold ? "fold-index0" : "degenerate-index1"; }

DegenerateKind parse_degenerate_kind(const std::string& s) {
  if (s == "fold-index0") return DegenerateKind::Fold;
  if (s == "degenerate-index1") return DegenerateKind::Index1;
  throw DomainError("unknown degenerate kind '" + s + "'");
}

Real t_projection(const Problem& pb, const Field& u, Chart chart) {
  const Field& e = chart_field(pb, chart);
  return inner_product(u, e) / inner_product(e, e);
}

DegeneratePoint solve_degenerate(const Problem& pb, Real a, const Field& u_guess, const Field& w_guess, Real c_guess,
                                 DegenerateKind kind) {
  const int n = pb.domain().size();
  const Real hs = pb.domain().spacing();
  const Real norm = kind == DegenerateKind::Fold ? pb.phi_norm_sq() : pb.psi_norm_sq();
  const Field& h = pb.harvest();

  Vec x(2 * n + 1);
  const Field w0 = renormalize_l2(w_guess, norm);
  std::copy(u_guess.values().begin(), u_guess.values().end(), x.begin());
  std::copy(w0.values().begin(), w0.values().end(), x.begin() + n);
  x[2 * n] = c_guess;

  auto eval = [&](const Vec& z) {
    Vec r(2 * n + 1);
    std::span<const Real> u(z.data(), n), w(z.data() + n, n);
    steady_residual(pb, u, a, z[2 * n], std::span<Real>(r.data(), n));
    kernel_residual(pb, u, w, a, std::span<Real>(r.data() + n, n));
    Real s = 0;
    for (int i = 0; i < n; ++i) s += w[i] * w[i];
    r[2 * n] = hs * s - norm;
    return r;
  };
  auto assemble = [&](const Vec& z) {
    std::span<const Real> u(z.data(), n), w(z.data() + n, n);
    linalg::SparseSystem m(2 * n + 1);
    const auto jac = jacobian_raw(pb, u, a);
    m.add_tridiagonal(0, 0, jac);
    m.add_tridiagonal(n, n, jac);
    for (int i = 0; i < n; ++i) {
      m.add(i, 2 * n, -h[i]);
      m.add(n + i, i, -eval_nonlinearity(pb.nonlinearity(), u[i]).d2f * w[i]);
      m.add(2 * n, n + i, 2 * hs * w[i]);
    }
    return m;
  };
  const auto sol = newton_system(std::move(x), eval, assemble, Real(1e-11), 40);
  return finish_degenerate(pb, a, sol.x[2 * n], field_from(pb.domain(), sol.x, 0), field_from(pb.domain(), sol.x, n),
                           kind);
}

DegeneratePoint refine_fold(const Problem& pb, const SolutionPoint& left, const SolutionPoint& right) {
  if (left.a() != right.a()) throw DomainError("fold bracket must share the same a");
  int m = -1;
  if (sign_of(left.spectrum.mu(0)) != sign_of(right.spectrum.mu(0))) {
    m = 0;
  } else if (sign_of(left.spectrum.mu(1)) != sign_of(right.spectrum.mu(1))) {
    m = 1;
  }
  if (m < 0) throw DomainError("bracket has no sign change in mu1 or mu2");
  const Real ml = left.spectrum.mu(m);
  const Real mr = right.spectrum.mu(m);
  const Real theta = ml / (ml - mr);
  const Field u = left.u() + theta * (right.u() - left.u());
  const Field w = left.spectrum.w(m) + theta * (right.spectrum.w(m) - left.spectrum.w(m));
  const Real c = left.c() + theta * (right.c() - left.c());
  return solve_degenerate(pb, left.a(), u, w, c, m == 0 ? DegenerateKind::Fold : DegenerateKind::Index1);
}

SolutionPoint chart_solve(const Problem& pb, Real a, const Field& e, Real t, const Field& u_guess, Real c_guess,
                          Real tolerance, int spectrum_k) {
  const int n = pb.domain().size();
  const Real hs = pb.domain().spacing();
  const Field& h = pb.harvest();
  const Real ee = inner_product(e, e);
  Vec x(n + 1);
  std::copy(u_guess.values().begin(), u_guess.values().end(), x.begin());
  x[n] = c_guess;
  auto eval = [&](const Vec& z) {
    Vec r(n + 1);
    std::span<const Real> u(z.data(), n);
    steady_residual(pb, u, a, z[n], std::span<Real>(r.data(), n));
    Real s = 0;
    for (int i = 0; i < n; ++i) s += u[i] * e[i];
    r[n] = (hs * s - t * ee);
    return r;
  };
  auto assemble = [&](const Vec& z) {
    linalg::SparseSystem m(n + 1);
    m.add_tridiagonal(0, 0, jacobian_raw(pb, std::span<const Real>(z.data(), n), a));
    for (int i = 0; i < n; ++i) {
      m.add(i, n, -h[i]);
      m.add(n, i, hs * e[i]);
    }
    return m;
  };
  const auto sol = newton_system(std::move(x), eval, assemble, tolerance, 30);
  SolutionPoint pt = make_solution_point(pb, field_from(pb.domain(), sol.x, 0), a, sol.x[n], spectrum_k);
  pt.iterations = sol.iterations;
  return pt;
}

Branch trace_chart(const Problem& pb, Real a, Chart chart, const std::vector<Real>& t_values, const Field& u_guess,
                   Real c_guess, const std::string& label) {
  Branch br;
  br.label = label;
  br.chart = chart;
  const Field& e = chart_field(pb, chart);
  if (t_values.empty()) return br;
  br.points.push_back(chart_solve(pb, a, e, t_values[0], u_guess, c_guess));
  br.arclength.push_back(0);
  Real t_prev = t_values[0];
  for (std::size_t k = 1; k < t_values.size(); ++k) {
    const Real target = t_values[k];
    // Subdivide when a full step fails.
    Real t_from = t_prev;
    SolutionPoint from = br.points.back();
    int depth = 0;
    while (true) {
      Real t_to = target;
      Real dt = t_to - t_from;
      for (int d = 0; d < depth; ++d) dt /= 2;
      t_to = t_from + dt;
      try {
        Field guess = from.u();
        Real cg = from.c();
        if (br.points.size() >= 2 && t_from == t_prev) {
          const auto& p0 = br.points[br.points.size() - 2];
          const Real t0 = t_projection(pb, p0.u(), chart);
          const Real scale = (t_to - t_from) / (t_from - t0);
          if (std::isfinite(scale) && std::abs(scale) < 4) {
            guess.axpy(scale, from.u() - p0.u());
            cg += scale * (from.c() - p0.c());
          }
        } else {
          guess.axpy(t_to - t_from, e);
        }
        SolutionPoint next = chart_solve(pb, a, e, t_to, guess, cg);
        if (t_to == target) {
          br.arclength.push_back(br.arclength.back() +
                                 product_distance(next.u(), next.c(), br.points.back().u(), br.points.back().c()));
          br.points.push_back(std::move(next));
          break;
        }
        from = std::move(next);
        t_from = t_to;
        depth = std::max(0, depth - 1);
      } catch (const NonConvergence&) {
        if (++depth > 12) throw;
      }
    }
    t_prev = target;
  }
  br.end_reason = "chart-end";
  br.events.push_back({"chart-end", static_cast<int>(br.points.size()) - 1, ""});
  return br;
}

Branch continue_branch(const Problem& pb, const SolutionPoint& start, int direction, CLimits limits,
                       const ContinuationOptions& opts) {
  if (direction != 1 && direction != -1) throw DomainError("direction must be +1 or -1");
  const int n = pb.domain().size();
  const Real hs = pb.domain().spacing();
  const Real a = start.a();
  const Field& h = pb.harvest();

  Branch br;
  br.chart = opts.chart;
  br.points.push_back(start);
  br.arclength.push_back(0);

  const linalg::TridiagonalLU lu0(jacobian(pb, start.u(), a));
  if (lu0.singular(Real(1e-13))) throw DomainError("continuation start point is degenerate");
  Field tau_u = lu0.solve(h);
  Real tau_c = 1;
  {
    const Real nrm = std::sqrt(inner_product(tau_u, tau_u) + 1);
    tau_u *= direction / nrm;
    tau_c = direction / nrm;
  }

  Real ds = opts.initial_step;
  while (static_cast<int>(br.points.size()) < opts.max_points) {
    const SolutionPoint& cur = br.points.back();
    Field pred = cur.u();
    pred.axpy(ds, tau_u);
    const Real pred_c = cur.c() + ds * tau_c;

    Vec x(n + 1);
    std::copy(pred.values().begin(), pred.values().end(), x.begin());
    x[n] = pred_c;
    const Field u_cur = cur.u();
    const Real c_cur = cur.c();
    auto eval = [&](const Vec& z) {
      Vec r(n + 1);
      std::span<const Real> u(z.data(), n);
      steady_residual(pb, u, a, z[n], std::span<Real>(r.data(), n));
      Real s = 0;
      for (int i = 0; i < n; ++i) s += (u[i] - u_cur[i]) * tau_u[i];
      r[n] = hs * s + (z[n] - c_cur) * tau_c - ds;
      return r;
    };
    auto assemble = [&](const Vec& z) {
      linalg::SparseSystem m(n + 1);
      m.add_tridiagonal(0, 0, jacobian_raw(pb, std::span<const Real>(z.data(), n), a));
      for (int i = 0; i < n; ++i) {
        m.add(i, n, -h[i]);
        m.add(n, i, hs * tau_u[i]);
      }
      m.add(n, n, tau_c);
      return m;
    };

    bool accepted = false;
    SystemSolution sol;
    try {
      sol = newton_system(x, eval, assemble, opts.tolerance, opts.corrector_iterations);
      accepted = true;
    } catch (const NonConvergence&) {
    }
    Field u_new(pb.domain());
    Real c_new = 0;
    Real dist = 0;
    if (accepted) {
      u_new = field_from(pb.domain(), sol.x, 0);
      c_new = sol.x[n];
      const Field du = u_new - u_cur;
      const Real dc = c_new - c_cur;
      const Real along = inner_product(du, tau_u) + dc * tau_c;
      dist = std::sqrt(inner_product(du, du) + dc * dc);
      const Real prod = l2_norm(du) + std::abs(dc);
      if (along <= 0 || dist > 2 * ds || prod > opts.max_step) accepted = false;
    }
    if (!accepted) {
      ds /= 2;
      if (ds < opts.min_step) {
        br.end_reason = "step-underflow";
        throw StepUnderflow("continuation step fell below " + std::to_string(static_cast<double>(opts.min_step)) +
                                " at c = " + std::to_string(static_cast<double>(c_cur)),
                            br);
      }
      continue;
    }

    // Past a c limit: land exactly on it and stop.
    if (c_new < limits.lo || c_new > limits.hi) {
      const Real limit = c_new < limits.lo ? limits.lo : limits.hi;
      const Real theta = (limit - c_cur) / (c_new - c_cur);
      const Field guess = u_cur + theta * (u_new - u_cur);
      SolutionPoint end = newton_solve(pb, guess, a, limit);
      br.arclength.push_back(br.arclength.back() + product_distance(end.u(), end.c(), u_cur, c_cur));
      br.points.push_back(std::move(end));
      br.events.push_back({"c-limit", static_cast<int>(br.points.size()) - 1, ""});
      br.end_reason = "c-limit";
      return br;
    }

    SolutionPoint next = make_solution_point(pb, u_new, a, c_new, opts.spectrum_k);
    next.iterations = sol.iterations;

    for (int m = 0; m < 2; ++m) {
      if (sign_of(cur.spectrum.mu(m)) == sign_of(next.spectrum.mu(m))) continue;
      DegeneratePoint dp = refine_fold(pb, cur, next);
      const std::string kind = dp.kind == DegenerateKind::Fold ? "fold" : "index-change";
      if (opts.stop_at_fold) {
        SolutionPoint at = make_solution_point(pb, dp.u, a, dp.c, opts.spectrum_k);
        br.arclength.push_back(br.arclength.back() + product_distance(dp.u, dp.c, u_cur, c_cur));
        br.points.push_back(std::move(at));
        br.events.push_back({kind, static_cast<int>(br.points.size()) - 1, ""});
        br.degenerate.push_back(std::move(dp));
        br.end_reason = kind;
        return br;
      }
      br.events.push_back({kind, static_cast<int>(br.points.size()), "between points"});
      br.degenerate.push_back(std::move(dp));
      break;
    }

    // Secant tangent for the next predictor.
    tau_u = (u_new - u_cur) * (1 / dist);
    tau_c = (c_new - c_cur) / dist;
    br.arclength.push_back(br.arclength.back() + product_distance(u_new, c_new, u_cur, c_cur));
    br.points.push_back(std::move(next));
    if (sol.iterations <= opts.easy_iterations) ds = std::min(ds * opts.growth, opts.max_step);
  }
  br.events.push_back({"max-points", static_cast<int>(br.points.size()) - 1, ""});
  br.end_reason = "max-points";
  return br;
}

DegenerateCurve trace_fold_curve(const Problem& pb, const DegeneratePoint& seed, const std::vector<Real>& a_targets,
                                 Real max_da, Real secant_da) {
  if (seed.kind != DegenerateKind::Fold) throw DomainError("fold curve needs an index-0 seed");
  std::vector<Real> targets = a_targets;
  std::sort(targets.begin(), targets.end());
  DegenerateCurve curve;
  curve.kind = DegenerateKind::Fold;
  curve.parameter = "a";

  // March from the seed to a target, extrapolating from the last two points.
  auto march = [&](std::vector<DegeneratePoint>& path, Real target) {
    while (path.back().a != target) {
      const DegeneratePoint& last = path.back();
      Real da = std::clamp(target - last.a, -max_da, max_da);
      int tries = 0;
      while (true) {
        const Real a_next = std::abs(target - last.a) <= std::abs(da) ? target : last.a + da;
        Field ug = last.u;
        Field wg = last.w;
        Real cg = last.c;
        if (path.size() >= 2) {
          const DegeneratePoint& prev = path[path.size() - 2];
          const Real s = (a_next - last.a) / (last.a - prev.a);
          if (std::isfinite(s) && std::abs(s) <= 4) {
            ug.axpy(s, last.u - prev.u);
            wg.axpy(s, last.w - prev.w);
            cg += s * (last.c - prev.c);
          }
        }
        try {
          path.push_back(solve_degenerate(pb, a_next, ug, wg, cg, DegenerateKind::Fold));
          break;
        } catch (const NonConvergence&) {
          da /= 2;
          if (++tries > 16) throw;
        }
      }
    }
  };

  std::vector<DegeneratePoint> up{seed};
  std::vector<DegeneratePoint> down{seed};
  std::vector<DegeneratePoint> found;
  for (Real t : targets) {
    if (t >= seed.a) {
      march(up, t);
      found.push_back(up.back());
    }
  }
  std::vector<DegeneratePoint> below;
  for (auto it = targets.rbegin(); it != targets.rend(); ++it) {
    if (*it < seed.a) {
      march(down, *it);
      below.push_back(down.back());
    }
  }
  std::reverse(below.begin(), below.end());
  below.insert(below.end(), found.begin(), found.end());

  for (auto& p : below) {
    const DegeneratePoint plus = solve_degenerate(pb, p.a + secant_da, p.u, p.w, p.c, DegenerateKind::Fold);
    const DegeneratePoint minus = solve_degenerate(pb, p.a - secant_da, p.u, p.w, p.c, DegenerateKind::Fold);
    curve.slope_secant.push_back((plus.c - minus.c) / (2 * secant_da));
    curve.slope_formula.push_back(inner_product(p.u, p.w) / inner_product(pb.harvest(), p.w));
    curve.values.push_back(p.a);
    curve.points.push_back(std::move(p));
  }
  return curve;
}

namespace {

struct Index1State {
  Field y;
  Field zeta;
  Real a;
  Real c;
};

Index1State solve_index1(const Problem& pb, Real t, const Index1State& guess) {
  const int n = pb.domain().size();
  const Real hs = pb.domain().spacing();
  const Field& h = pb.harvest();
  const Field& psi = pb.psi();
  const Real norm = pb.psi_norm_sq();
  Vec x(2 * n + 2);
  std::copy(guess.y.values().begin(), guess.y.values().end(), x.begin());
  std::copy(guess.zeta.values().begin(), guess.zeta.values().end(), x.begin() + n);
  x[2 * n] = guess.a;
  x[2 * n + 1] = guess.c;
  auto u_of = [&](const Vec& z) {
    Vec u(n);
    for (int i = 0; i < n; ++i) u[i] = t * psi[i] + z[i];
    return u;
  };
  auto eval = [&](const Vec& z) {
    Vec r(2 * n + 2);
    const Vec u = u_of(z);
    std::span<const Real> zeta(z.data() + n, n);
    steady_residual(pb, u, z[2 * n], z[2 * n + 1], std::span<Real>(r.data(), n));
    kernel_residual(pb, u, zeta, z[2 * n], std::span<Real>(r.data() + n, n));
    Real p = 0, q = 0;
    for (int i = 0; i < n; ++i) {
      p += z[i] * psi[i];
      q += zeta[i] * zeta[i];
    }
    r[2 * n] = hs * p;
    r[2 * n + 1] = hs * q - norm;
    return r;
  };
  auto assemble = [&](const Vec& z) {
    const Vec u = u_of(z);
    const Real a = z[2 * n];
    linalg::SparseSystem m(2 * n + 2);
    const auto jac = jacobian_raw(pb, u, a);
    m.add_tridiagonal(0, 0, jac);
    m.add_tridiagonal(n, n, jac);
    for (int i = 0; i < n; ++i) {
      const Real zeta = z[n + i];
      m.add(i, 2 * n, u[i]);
      m.add(i, 2 * n + 1, -h[i]);
      m.add(n + i, i, -eval_nonlinearity(pb.nonlinearity(), u[i]).d2f * zeta);
      m.add(n + i, 2 * n, zeta);
      m.add(2 * n, i, hs * psi[i]);
      m.add(2 * n + 1, n + i, 2 * hs * zeta);
    }
    return m;
  };
  const auto sol = newton_system(std::move(x), eval, assemble, Real(1e-11), 40);
  return {field_from(pb.domain(), sol.x, 0), field_from(pb.domain(), sol.x, n), sol.x[2 * n], sol.x[2 * n + 1]};
}

}  // namespace

DegenerateCurve trace_index1_degenerate_curve(const Problem& pb, const std::vector<Real>& t_values) {
  std::vector<Real> ts = t_values;
  std::sort(ts.begin(), ts.end());
  DegenerateCurve curve;
  curve.kind = DegenerateKind::Index1;
  curve.parameter = "t";
  const Index1State seed{pb.zeros(), renormalize_l2(pb.psi(), pb.psi_norm_sq()), pb.lambda2(), 0};
  const Real max_dt = Real(0.02);

  struct Node {
    Real t;
    Index1State s;
  };
  auto march = [&](std::vector<Node>& path, Real target) {
    while (path.back().t != target) {
      const Node& last = path.back();
      Real dt = std::clamp(target - last.t, -max_dt, max_dt);
      int tries = 0;
      while (true) {
        const Real t_next = std::abs(target - last.t) <= std::abs(dt) ? target : last.t + dt;
        Index1State g = last.s;
        if (path.size() >= 2) {
          const Node& prev = path[path.size() - 2];
          const Real s = (t_next - last.t) / (last.t - prev.t);
          if (std::isfinite(s) && std::abs(s) <= 4) {
            g.y.axpy(s, last.s.y - prev.s.y);
            g.zeta.axpy(s, last.s.zeta - prev.s.zeta);
            g.a += s * (last.s.a - prev.s.a);
            g.c += s * (last.s.c - prev.s.c);
          }
        }
        try {
          path.push_back({t_next, solve_index1(pb, t_next, g)});
          break;
        } catch (const NonConvergence&) {
          dt /= 2;
          if (++tries > 16) throw;
        }
      }
    }
  };

  std::vector<Node> up{{0, solve_index1(pb, 0, seed)}};
  std::vector<Node> down = up;
  std::vector<Node> result;
  for (auto it = ts.rbegin(); it != ts.rend(); ++it) {
    if (*it < 0) {
      march(down, *it);
      result.push_back(down.back());
    }
  }
  std::reverse(result.begin(), result.end());
  for (Real t : ts) {
    if (t >= 0) {
      march(up, t);
      result.push_back(up.back());
    }
  }
  for (auto& node : result) {
    Field u = node.t * pb.psi() + node.s.y;
    curve.values.push_back(node.t);
    curve.points.push_back(finish_degenerate(pb, node.s.a, node.s.c, std::move(u), node.s.zeta, DegenerateKind::Index1));
  }
  return curve;
}

Branch continue_czero_branch(const Problem& pb, CZeroBranch which, const std::vector<Real>& a_values, int sign) {
  if (a_values.empty()) throw DomainError("czero branch needs at least one a value");
  const Real m = pb.nonlinearity().threshold();
  const bool dagger = which == CZeroBranch::Dagger;
  const Chart chart = dagger ? Chart::Phi : Chart::Psi;
  const Field& e = chart_field(pb, chart);
  const Real a0 = a_values.front();

  auto acceptable = [&](const SolutionPoint& p) {
    const Real t = t_projection(pb, p.u(), chart);
    if (dagger) return p.morse_index == 0 && p.u().min() >= Real(-1e-10) && p.u().max() > m;
    return sign * t > 0 && (t > m || t < -m / pb.beta()) && p.u().norm_inf() > 0;
  };

  std::optional<SolutionPoint> seed;
  for (Real eps : {Real(0.05), Real(0.1), Real(0.3), Real(0.6), Real(1), Real(2), Real(4)}) {
    try {
      SolutionPoint p = newton_solve(pb, (sign * (m + eps)) * e, a0, 0);
      if (acceptable(p)) {
        seed = std::move(p);
        break;
      }
    } catch (const NonConvergence&) {
    }
  }
  if (!seed && dagger) {
    // Positive solutions attract everything positive; march then polish.
    const Real cap = critical_cap(pb.nonlinearity(), a0);
    const auto run = time_march(pb, cap * e, a0, 0, std::min(Real(1e-3), imex_dt_bound(pb, a0)), 200);
    if (!run.diverged) {
      try {
        SolutionPoint p = newton_solve(pb, run.u, a0, 0);
        if (acceptable(p)) seed = std::move(p);
      } catch (const NonConvergence&) {
      }
    }
  }
  if (!seed) throw NonConvergence("could not seed the c = 0 branch at a = " + std::to_string(static_cast<double>(a0)));

  Branch br;
  br.label = dagger ? "C_dagger" : "C_ddagger";
  br.chart = chart;
  br.points.push_back(std::move(*seed));
  br.arclength.push_back(0);
  for (std::size_t k = 1; k < a_values.size(); ++k) {
    const Real target = a_values[k];
    Real a_from = br.points.back().a();
    Field u_from = br.points.back().u();
    int depth = 0;
    while (true) {
      Real da = target - a_from;
      for (int d = 0; d < depth; ++d) da /= 2;
      const Real a_to = a_from + da;
      Field guess = u_from;
      if (br.points.size() >= 2 && a_from == br.points.back().a()) {
        const auto& p0 = br.points[br.points.size() - 2];
        const Real s = (a_to - a_from) / (a_from - p0.a());
        if (std::isfinite(s) && std::abs(s) <= 4) guess.axpy(s, u_from - p0.u());
      }
      try {
        SolutionPoint p = newton_solve(pb, guess, a_to, 0);
        if (!acceptable(p)) throw NonConvergence("jumped to another branch");
        if (a_to == target) {
          br.arclength.push_back(br.arclength.back() + l2_norm(p.u() - br.points.back().u()) +
                                 std::abs(p.a() - br.points.back().a()));
          br.points.push_back(std::move(p));
          break;
        }
        u_from = p.u();
        a_from = a_to;
        depth = std::max(0, depth - 1);
      } catch (const NonConvergence&) {
        if (++depth > 14) throw;
      }
    }
  }
  br.end_reason = "a-range";
  return br;
}

BranchDerivative branch_derivative_at_zero(const Problem& pb, Real a, Chart chart) {
  const Real lambda = chart == Chart::Phi ? pb.lambda1() : pb.lambda2();
  if (std::abs(a - lambda) < Real(1e-6)) {
    throw DomainError("a is within 1e-6 of the chart eigenvalue; the chart derivative is undefined there");
  }
  const Field& e = chart_field(pb, chart);
  const Real ee = inner_product(e, e);
  const Real he = inner_product(pb.harvest(), e);
  const Real dc_dt = ee / he * (a - lambda);
  Field rhs = pb.harvest();
  rhs.axpy(-he / ee, e);
  const linalg::TridiagonalLU lu(pb.laplacian().shifted(a));
  Field v = e;
  v.axpy(dc_dt, lu.solve(rhs));
  return {dc_dt, std::move(v)};
}

FoldLocalCheck fold_local_check(const Problem& pb, const DegeneratePoint& fold, Real dt) {
  const Field& w = fold.w;
  const Real t0 = inner_product(fold.u, w) / inner_product(w, w);
  const SolutionPoint mid = chart_solve(pb, fold.a, w, t0, fold.u, fold.c);
  const SolutionPoint plus = chart_solve(pb, fold.a, w, t0 + dt, fold.u + dt * w, fold.c);
  const SolutionPoint minus = chart_solve(pb, fold.a, w, t0 - dt, fold.u - dt * w, fold.c);
  Real fw3 = 0, hw = 0, ww = 0, lhs = 0;
  const Field& h = pb.harvest();
  for (int i = 0; i < w.size(); ++i) {
    const auto v = eval_nonlinearity(pb.nonlinearity(), fold.u[i]);
    fw3 += v.d2f * w[i] * w[i] * w[i];
    hw += h[i] * w[i];
    ww += w[i] * w[i];
    lhs += (v.df * fold.u[i] - v.f) * w[i];
  }
  const Real hs = pb.domain().spacing();
  FoldLocalCheck out{};
  out.c2_fd = (plus.c() - 2 * mid.c() + minus.c()) / (dt * dt);
  out.c2_formula = -fw3 / hw;
  out.mu_fd = (plus.spectrum.mu(0) - minus.spectrum.mu(0)) / (2 * dt);
  out.mu_formula = fw3 / ww;
  out.signc_lhs = hs * lhs;
  out.signc_rhs = fold.c * hs * hw;
  return out;
}

Field linear_regime_solution(const Problem& pb, Real a, Real c) {
  if (std::abs(a - pb.lambda1()) < Real(1e-6)) throw DomainError("closed form needs a away from lambda1");
  const Field& phi = pb.phi();
  const Real pp = pb.phi_norm_sq();
  const Real hp = pb.h_phi();
  Field rest = pb.harvest();
  rest.axpy(-hp / pp, phi);
  const linalg::TridiagonalLU lu(pb.laplacian().shifted(a));
  Field u = lu.solve(rest);
  u.axpy(hp / ((a - pb.lambda1()) * pp), phi);
  return c * u;
}

}  // namespace bifurcate
