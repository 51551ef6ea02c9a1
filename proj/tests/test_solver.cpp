#include <cmath>
#include <random>

#include "bifurcate/solver.hpp"
#include "doctest.h"

using namespace bifurcate;

namespace {
Problem canonical(Real m = 0.2L) { return Problem(build_grid(399, 1.0L), {m, 3}, {HarvestProfile::Canonical, 1}); }

Field random_field(const Domain& d, Real amplitude, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1, 1);
  Field f(d);
  for (int i = 0; i < d.size(); ++i) f[i] = amplitude * dist(rng);
  return f;
}
}  // namespace

TEST_CASE("residual special cases") {
  const Problem pb = canonical();
  const Field zero = pb.zeros();
  CHECK(residual(pb, zero, 20, 0).norm_inf() == 0);
  for (Real t : {0.05L, 0.2L}) {
    CHECK(residual(pb, t * pb.phi(), pb.lambda1(), 0).norm_inf() < 1e-12L);
  }
  Field r = residual(pb, zero, 20, 1);
  r += pb.harvest();
  CHECK(r.norm_inf() == 0);
}

TEST_CASE("jacobian structure and finite-difference check") {
  const Problem pb = canonical(0.0L);
  const Real inv_h2 = 1 / (pb.domain().spacing() * pb.domain().spacing());
  const auto j0 = jacobian(pb, pb.zeros(), 20);
  CHECK(std::abs(j0.diag()[7] - (-2 * inv_h2 + 20)) < 1e-9L);
  CHECK(std::abs(j0.off()[3] - inv_h2) < 1e-9L);

  Field two(pb.domain(), std::vector<Real>(399, 2));
  const auto jc = jacobian(pb, two, 20);
  CHECK(std::abs(jc.diag()[100] - (-2 * inv_h2 + 20 - 12)) < 1e-9L);

  // Positive u keeps every node away from the ramp kink at 0.
  const Field u = Field::sample(pb.domain(), [](Real x) { return 1 + 2 * std::sin(3.14159265358979L * x); });
  const Field v = Field::sample(pb.domain(), [](Real x) { return std::sin(2 * 3.14159265358979L * x) * x; });
  const auto jac = jacobian(pb, u, 20);
  for (Real eps : {1e-3L, 1e-4L}) {
    Field fd = residual(pb, u + eps * v, 20, 0.3L) - residual(pb, u, 20, 0.3L);
    fd *= 1 / eps;
    fd -= jac.apply(v);
    CHECK(fd.norm_inf() < 50 * eps);
  }
  for (int i = 0; i + 1 < 399; ++i) CHECK(jac.off()[i] == j0.off()[i]);
}

TEST_CASE("newton from zero at a=20 returns the trivial solution") {
  const Problem pb = canonical(0.0L);
  const auto pt = newton_solve(pb, pb.zeros(), 20, 0);
  CHECK(pt.u().norm_inf() == 0);
  CHECK(pt.morse_index == 1);
  CHECK(pt.tag == SolutionTag::Index1);
}

TEST_CASE("newton finds the positive stable solution, confirmed by time march") {
  const Problem pb = canonical(0.0L);
  const Field init = 3 * pb.phi();
  const auto pt = newton_solve(pb, init, 20, 0);
  CHECK(pt.residual_norm < 1e-10L);
  CHECK(pt.morse_index == 0);
  CHECK(pt.tag == SolutionTag::Stable);
  CHECK(pt.u().min() > 0);
  CHECK(pt.u().max() < std::sqrt(20.0L));

  const auto march = time_march(pb, init, 20, 0, 1e-3L, 20);
  CHECK_FALSE(march.diverged);
  CHECK(l2_norm(march.u - pt.u()) < 1e-6L);

  // Quadratic convergence over the last iterates.
  const auto& r = pt.residual_history;
  REQUIRE(r.size() >= 4);
  const std::size_t n = r.size();
  for (std::size_t k = n - 3; k + 1 < n; ++k) {
    if (r[k] < 1) CHECK(r[k + 1] <= 1e3L * r[k] * r[k] + 1e-13L);
  }
}

TEST_CASE("newton at an eigenvalue reports a singular jacobian") {
  const Problem pb = canonical();
  try {
    newton_solve(pb, pb.zeros(), pb.lambda1(), 0);
    FAIL("expected SingularJacobian");
  } catch (const SingularJacobian& e) {
    CHECK(e.state().a == pb.lambda1());
    CHECK(e.state().u.norm_inf() == 0);
  }
}

TEST_CASE("newton iteration cap") {
  const Problem pb = canonical(0.0L);
  NewtonOptions opts;
  opts.max_iterations = 1;
  CHECK_THROWS_AS(newton_solve(pb, 3 * pb.phi(), 20, 0, opts), NonConvergence);
}

TEST_CASE("energy functional") {
  const Problem pb = canonical();
  const Real cap = critical_cap(pb.nonlinearity(), 20);
  CHECK(energy_functional(pb, pb.zeros(), 20, 1, cap) == 0);
  // Quadratic terms cancel exactly for the discrete mode below the threshold.
  CHECK(std::abs(energy_functional(pb, 0.15L * pb.phi(), pb.lambda1(), 0, cap)) < 1e-15L);
  const Field s = Field::sample(pb.domain(), [](Real x) { return 0.15L * std::sin(3.14159265358979323846L * x); });
  const Real pi2 = 3.14159265358979323846L * 3.14159265358979323846L;
  CHECK(std::abs(energy_functional(pb, s, pi2, 0, cap)) < 1e-6L);

  // Critical point: directional derivatives vanish at a converged solution.
  const auto pt = newton_solve(pb, 3 * pb.phi(), 20, 0.5L);
  REQUIRE(pt.u().max() < cap);
  for (unsigned seed : {1u, 2u, 3u}) {
    const Field v = random_field(pb.domain(), 1, seed);
    const Real e = 1e-5L;
    const Real d = (energy_functional(pb, pt.u() + e * v, 20, 0.5L, cap) -
                    energy_functional(pb, pt.u() - e * v, 20, 0.5L, cap)) / (2 * e);
    CHECK(std::abs(d) < 1e-6L);
  }
  CHECK_THROWS_AS(energy_functional(pb, pb.zeros(), 20, 0, 0), DomainError);
}

TEST_CASE("time march dynamics") {
  const Problem pb = canonical();
  const Field noise = random_field(pb.domain(), 0.01L, 7);

  const auto decay = time_march(pb, noise, 5, 0, 1e-3L, 10);
  CHECK_FALSE(decay.diverged);
  CHECK(l2_norm(decay.u) < 1e-6L);

  const Problem zero_m = canonical(0.0L);
  const auto dagger = newton_solve(zero_m, 3 * zero_m.phi(), 20, 0);
  const auto back = time_march(zero_m, dagger.u() + noise, 20, 0, 1e-3L, 5);
  CHECK(l2_norm(back.u - dagger.u()) < 1e-5L);

  // Leaves u = 0 along phi, monotonically in the phi coordinate.
  Field u = 0.01L * zero_m.phi();
  Real prev = inner_product(u, zero_m.phi());
  for (int k = 0; k < 5; ++k) {
    u = time_march(zero_m, u, 20, 0, 1e-3L, 0.05L).u;
    const Real now = inner_product(u, zero_m.phi());
    CHECK(now > prev);
    prev = now;
  }

  CHECK_THROWS_AS(time_march(pb, noise, 20, 0, 1.0L, 1), DomainError);
  CHECK_THROWS_AS(time_march(pb, noise, 20, 0, 1e-3L, 0), DomainError);
}

TEST_CASE("time march fixed point is the steady state") {
  const Problem pb = canonical();
  const auto pt = newton_solve(pb, 3 * pb.phi(), 20, -1);
  const auto m = time_march(pb, pt.u(), 20, -1, 1e-3L, 0.5L);
  CHECK((m.u - pt.u()).norm_inf() < 1e-12L);
}

TEST_CASE("solution tags round trip") {
  for (auto t : {SolutionTag::Stable, SolutionTag::Index1, SolutionTag::Index2, SolutionTag::Degenerate0,
                 SolutionTag::Degenerate1, SolutionTag::HigherIndex}) {
    CHECK(parse_solution_tag(to_string(t)) == t);
  }
  CHECK_THROWS_AS(parse_solution_tag("unstable"), DomainError);
}
