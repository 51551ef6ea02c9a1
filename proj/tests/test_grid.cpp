#include <cmath>
#include <numbers>

#include "bifurcate/grid.hpp"
#include "bifurcate/linalg.hpp"
#include "doctest.h"

using namespace bifurcate;

namespace {
constexpr Real kPi = std::numbers::pi_v<Real>;

Real harvest(Real x) { return x * (1 - x) * (1 - x); }

// Composite Simpson on [0,1] with 20000 panels, used as an independent oracle.
Real simpson(Real (*fn)(Real)) {
  const int n = 20000;
  const Real h = Real(1) / n;
  Real s = fn(0) + fn(1);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * fn(i * h);
  return s * h / 3;
}
}  // namespace

TEST_CASE("build_grid spacing and nodes") {
  const Domain d = build_grid(399, 1.0L);
  CHECK(d.spacing() == doctest::Approx(1.0 / 400));
  CHECK(std::abs(d.spacing() * 400 - 1) < 1e-18L);
  CHECK(d.node(0) == doctest::Approx(1.0 / 400));
  CHECK(d.node(398) == doctest::Approx(399.0 / 400));

  const Domain small = build_grid(3, 1.0L);
  const auto x = small.nodes();
  CHECK(x[0] == doctest::Approx(0.25));
  CHECK(x[1] == doctest::Approx(0.5));
  CHECK(x[2] == doctest::Approx(0.75));

  CHECK_THROWS_AS(build_grid(2, 1.0L), DomainError);
  CHECK_THROWS_AS(build_grid(10, 0.0L), DomainError);
  CHECK_THROWS_AS(build_grid(10, -1.0L), DomainError);
}

TEST_CASE("field construction rejects bad data") {
  const Domain d = build_grid(5, 1.0L);
  CHECK_THROWS_AS(Field(d, std::vector<Real>(4, 0)), DomainError);
  std::vector<Real> v(5, 0);
  v[2] = std::nanl("");
  CHECK_THROWS_AS(Field(d, v), DomainError);
  const Field a(d);
  const Field b(build_grid(6, 1.0L));
  CHECK_THROWS_AS(inner_product(a, b), DomainError);
}

TEST_CASE("assemble_laplacian stencil") {
  const Domain d = build_grid(3, 1.0L);
  const auto lap = assemble_laplacian(d);
  for (Real v : lap.diag()) CHECK(static_cast<double>(v) == doctest::Approx(-32));
  for (Real v : lap.off()) CHECK(static_cast<double>(v) == doctest::Approx(16));

  const Domain g = build_grid(399, 1.0L);
  const auto big = assemble_laplacian(g);
  const Field s = Field::sample(g, [](Real x) { return std::sin(kPi * x); });
  const Field ls = big.apply(s);
  const Real h = g.spacing();
  const Real exact_factor = -(2 / (h * h)) * (1 - std::cos(kPi * h));
  Real err_exact = 0;
  Real err_cont = 0;
  for (int i = 0; i < g.size(); ++i) {
    err_exact = std::max(err_exact, std::abs(ls[i] - exact_factor * s[i]));
    err_cont = std::max(err_cont, std::abs(ls[i] + kPi * kPi * s[i]));
  }
  CHECK(err_exact < 1e-9L);
  CHECK(err_cont < 1e-3L);  // O(h^2) * pi^4 / 12

  const Field zero(g);
  CHECK(big.apply(zero).norm_inf() == 0);
}

TEST_CASE("inner_product quadrature") {
  const Domain d = build_grid(399, 1.0L);
  const Field phi = Field::sample(d, [](Real x) { return std::sin(kPi * x); });
  const Field psi = Field::sample(d, [](Real x) { return std::sin(2 * kPi * x); });
  const Field h = Field::sample(d, harvest);
  CHECK(std::abs(inner_product(phi, phi) - 0.5L) < 1e-6L);
  CHECK(std::abs(inner_product(phi, psi)) < 1e-12L);

  const Real oracle = simpson([](Real x) { return harvest(x) * std::sin(kPi * x); });
  CHECK(std::abs(oracle - 2 / (kPi * kPi * kPi)) < 1e-12L);
  CHECK(std::abs(inner_product(h, phi) - 2 / (kPi * kPi * kPi)) < 1e-6L);
}

TEST_CASE("inner_product symmetric, bilinear, positive") {
  const Domain d = build_grid(50, 1.0L);
  const Field f = Field::sample(d, [](Real x) { return std::exp(x) - 1; });
  const Field g = Field::sample(d, [](Real x) { return x * x - 0.3L; });
  CHECK(inner_product(f, g) == inner_product(g, f));
  CHECK(std::abs(inner_product(2 * f + g, g) - (2 * inner_product(f, g) + inner_product(g, g))) < 1e-15L);
  CHECK(inner_product(f, f) > 0);
  CHECK(inner_product(Field(d), Field(d)) == 0);
}

TEST_CASE("laplacian eigenpairs match the discrete closed form") {
  const Domain d = build_grid(399, 1.0L);
  const auto modes = laplacian_eigenpairs(d, 10);
  REQUIRE(modes.pairs.size() == 10);
  for (int k = 1; k <= 10; ++k) {
    const Real closed = discrete_dirichlet_eigenvalue(d, k);
    const Real alt = (2 / (d.spacing() * d.spacing())) * (1 - std::cos(k * kPi * d.spacing()));
    CHECK(std::abs(closed - alt) < 1e-8L * closed);
    CHECK(std::abs(modes.pairs[k - 1].value - closed) < 1e-10L);
  }
  CHECK(std::abs(modes.pairs[0].value / (kPi * kPi) - 1) < 1e-4L);
  CHECK(std::abs(modes.pairs[1].value / (4 * kPi * kPi) - 1) < 1e-4L);
  CHECK(std::abs(modes.pairs[2].value / (9 * kPi * kPi) - 1) < 1e-4L);

  // Orthogonality and eigen-residual.
  const auto lap = assemble_laplacian(d);
  for (int i = 0; i < 10; ++i) {
    const auto& wi = modes.pairs[i].function;
    CHECK(std::abs(wi.max() - 1) < 1e-15L);
    Field r = lap.apply(wi);
    r.axpy(modes.pairs[i].value, wi);
    CHECK(r.norm_inf() < 1e-10L);
    for (int j = 0; j < i; ++j) {
      CHECK(std::abs(inner_product(wi, modes.pairs[j].function)) < 1e-10L);
    }
  }
  // First mode positive.
  CHECK(modes.pairs[0].function.min() > 0);
}

TEST_CASE("second eigenfunction orientation against the harvest profile") {
  const Domain d = build_grid(399, 1.0L);
  const Field h = Field::sample(d, harvest);
  const auto modes = laplacian_eigenpairs(d, 3, &h);
  CHECK_FALSE(modes.second_mode_sign_ambiguous);
  const Field& psi = modes.pairs[1].function;
  const Real ihpsi = inner_product(h, psi);
  CHECK(ihpsi < 0);
  CHECK(std::abs(ihpsi - (-3 / (4 * kPi * kPi * kPi))) < 1e-6L);
  // psi ~ -sin(2 pi x), so beta = -min psi = 1.
  CHECK(std::abs(-psi.min() - 1) < 1e-6L);
  CHECK(psi[50] < 0);
  CHECK(modes.pairs[2].value - modes.pairs[1].value > 1e-6L);

  const Field s = Field::sample(d, [](Real x) { return std::sin(kPi * x); });
  const auto flat = laplacian_eigenpairs(d, 2, &s);
  CHECK(flat.second_mode_sign_ambiguous);

  CHECK_THROWS_AS(laplacian_eigenpairs(d, 0), DomainError);
  CHECK_THROWS_AS(laplacian_eigenpairs(d, 400), DomainError);
}

TEST_CASE("tridiagonal LU solves and reports singularity") {
  const Domain d = build_grid(40, 1.0L);
  const auto lap = assemble_laplacian(d);
  const Field rhs = Field::sample(d, [](Real x) { return x * (1 - x); });
  const linalg::TridiagonalLU lu(lap);
  const Field x = lu.solve(rhs);
  Field r = lap.apply(x);
  r -= rhs;
  CHECK(r.norm_inf() < 1e-12L);
  CHECK_FALSE(lu.singular(1e-13L));

  // Shift onto the first eigenvalue: nearly singular.
  const Real lam1 = discrete_dirichlet_eigenvalue(d, 1);
  const linalg::TridiagonalLU sing(lap.shifted(lam1));
  CHECK(sing.singular(1e-13L));

  // Indefinite system needing row interchanges.
  const auto shifted = lap.shifted(discrete_dirichlet_eigenvalue(d, 3) + 7);
  const linalg::TridiagonalLU piv(shifted);
  Field y = piv.solve(rhs);
  Field r2 = shifted.apply(y);
  r2 -= rhs;
  CHECK(r2.norm_inf() < 1e-12L * (1 + y.norm_inf()) * 1e3L);
}

TEST_CASE("sparse system solve") {
  linalg::SparseSystem s(3);
  s.add(0, 0, 2);
  s.add(0, 2, 1);
  s.add(1, 1, 3);
  s.add(2, 0, 1);
  s.add(2, 2, 4);
  std::vector<Real> rhs{3, 6, 5};
  const auto x = s.solve(rhs);
  CHECK(std::abs(x[0] - 1) < 1e-15L);
  CHECK(std::abs(x[1] - 2) < 1e-15L);
  CHECK(std::abs(x[2] - 1) < 1e-15L);

  linalg::SparseSystem z(2);
  z.add(0, 0, 1);
  z.add(1, 0, 1);
  std::vector<Real> r2{1, 1};
  CHECK_THROWS_AS(z.solve(r2), NonConvergence);
}
