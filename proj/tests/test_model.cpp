#include <cmath>
#include <numbers>

#include "bifurcate/model.hpp"
#include "doctest.h"

using namespace bifurcate;

TEST_CASE("ramp nonlinearity values") {
  const Nonlinearity nl(0.2L, 3);
  auto v = eval_nonlinearity(nl, 0.1L);
  CHECK(v.f == 0);
  CHECK(v.df == 0);
  CHECK(v.d2f == 0);
  v = eval_nonlinearity(nl, 2.2L);
  CHECK(std::abs(v.f - 8) < 1e-15L);
  CHECK(std::abs(v.df - 12) < 1e-15L);
  CHECK(std::abs(v.d2f - 12) < 1e-15L);
  const Nonlinearity zero(0.0L, 3);
  v = eval_nonlinearity(zero, -1.0L);
  CHECK(v.f == 0);
  CHECK(v.df == 0);
  CHECK(v.d2f == 0);
  CHECK(std::abs(antiderivative(nl, 2.2L) - 4) < 1e-15L);
}

TEST_CASE("derivatives agree with finite differences") {
  const Nonlinearity nl(0.2L, 4);
  for (Real u : {0.5L, 1.0L, 3.7L}) {
    const Real e = 1e-6L;
    const auto v = eval_nonlinearity(nl, u);
    const Real df = (eval_nonlinearity(nl, u + e).f - eval_nonlinearity(nl, u - e).f) / (2 * e);
    const Real d2f = (eval_nonlinearity(nl, u + e).df - eval_nonlinearity(nl, u - e).df) / (2 * e);
    const Real big = (antiderivative(nl, u + e) - antiderivative(nl, u - e)) / (2 * e);
    CHECK(std::abs(df - v.df) < 1e-8L * (1 + std::abs(v.df)));
    CHECK(std::abs(d2f - v.d2f) < 1e-8L * (1 + std::abs(v.d2f)));
    CHECK(std::abs(big - v.f) < 1e-8L * (1 + std::abs(v.f)));
  }
}

TEST_CASE("invalid nonlinearity parameters") {
  CHECK_THROWS_AS(Nonlinearity(0.2L, 2), ModelError);
  CHECK_THROWS_AS(Nonlinearity(-0.1L, 3), ModelError);
}

TEST_CASE("critical cap") {
  const Nonlinearity zero(0.0L, 3);
  CHECK(std::abs(critical_cap(zero, 20) - std::sqrt(20.0L)) < 1e-15L);
  const Real pi = std::numbers::pi_v<Real>;
  CHECK(std::abs(critical_cap(zero, pi * pi) - pi) < 1e-15L);

  const Nonlinearity nl(0.2L, 3);
  const Real k = critical_cap(nl, 20);
  CHECK(k > std::sqrt(20.0L));
  CHECK(std::abs(20 * k - eval_nonlinearity(nl, k).f) < 1e-12L);
  // Root of 20K = (K - 0.2)^3 from a 30-digit secant solve.
  CHECK(std::abs(k - 4.76896828268906927422L) < 1e-15L);
  CHECK_THROWS_AS(critical_cap(nl, 0), ModelError);
}

TEST_CASE("hypothesis report for the canonical model") {
  const Domain d = build_grid(399, 1.0L);
  const auto report = check_hypotheses({0.2L, 3}, {HarvestProfile::Canonical, 1}, d);
  CHECK(report.all_pass());
  const Real pi3 = std::pow(std::numbers::pi_v<Real>, 3);
  CHECK(std::abs(report.get("(c)").value + 3 / (4 * pi3)) < 1e-5L);
  CHECK(std::abs(report.get("(b)''").value - 2 / pi3) < 1e-5L);
  for (const char* tag : {"(i)", "(ii)", "(iii)", "(iv)", "(a)", "(b)", "(b)'", "(b)''", "(c)", "(alpha)"}) {
    CHECK(report.get(tag).pass);
  }
  CHECK_THROWS_AS(report.get("(z)"), DomainError);
}

TEST_CASE("hypothesis failures are reported, not thrown") {
  const Domain d = build_grid(399, 1.0L);
  const auto sine = check_hypotheses({0.2L, 3}, {HarvestProfile::FirstMode, 1}, d);
  CHECK_FALSE(sine.get("(c)").pass);
  CHECK(std::abs(sine.get("(c)").value) < 1e-8L);
  CHECK_FALSE(sine.all_pass());

  const auto square = check_hypotheses({0.2L, 2}, {HarvestProfile::Canonical, 1}, d);
  CHECK_FALSE(square.get("(i)").pass);
  CHECK(square.get("(c)").pass);

  const auto flat = check_hypotheses({0.0L, 3}, {HarvestProfile::Constant, 1}, d);
  CHECK(flat.get("(b)'").pass);
  CHECK_FALSE(flat.get("(c)").pass);  // constant h is orthogonal to the odd mode
}

TEST_CASE("harvest profile names") {
  CHECK(parse_harvest_profile("canonical") == HarvestProfile::Canonical);
  CHECK(parse_harvest_profile(to_string(HarvestProfile::FirstMode)) == HarvestProfile::FirstMode);
  CHECK_THROWS_AS(parse_harvest_profile("gaussian"), ModelError);
  CHECK(harvest_value({HarvestProfile::Canonical, 2}, 0.5L, 1) == 0.25L);
}
