#include <cmath>

#include "bifurcate/diagram.hpp"
#include "doctest.h"

using namespace bifurcate;

namespace {
Problem canonical(Real m = 0.2L) { return Problem(build_grid(399, 1.0L), {m, 3}, {HarvestProfile::Canonical, 1}); }

// tests/oracles/discrete_oracle.py
constexpr double kFoldC20 = 110.714875465719;

SolutionPoint dagger_at(const Problem& pb, Real a, Real c = 0) { return newton_solve(pb, 3 * pb.phi(), a, c); }
}  // namespace

TEST_CASE("multistart counts at a=20, M=0") {
  const Problem pb = canonical(0);
  const SolutionSet at0 = count_solutions(pb, 20, 0);
  CHECK(at0.count() == 2);
  CHECK(at0.indices() == std::vector<int>{0, 1});
  CHECK(at0.n_converged + at0.n_failed + at0.n_singular == at0.n_starts);
  CHECK(count_solutions(pb, 20, kFoldC20 + 0.5).count() == 0);
  CHECK(count_solutions(pb, 20, kFoldC20 - 0.1).count() == 2);
}

TEST_CASE("four solutions in the window at a=40") {
  const Problem pb = canonical();
  CountOptions o;
  o.n_starts = 800;
  const SolutionSet s = count_solutions(pb, 40, -0.005L, o);
  CHECK(s.count() == 4);
  CHECK(s.indices() == std::vector<int>{0, 1, 1, 2});
  for (std::size_t i = 0; i < s.members.size(); ++i) {
    CHECK(s.members[i].residual_norm < 1e-10L);
    for (std::size_t j = 0; j < i; ++j) {
      CHECK(relative_distance(s.members[i].u(), s.members[j].u()) > o.dedup_threshold);
    }
  }
}

TEST_CASE("multistart is independent of the thread count") {
  const Problem pb = canonical();
  CountOptions o;
  o.n_starts = 120;
  o.threads = 1;
  const SolutionSet one = count_solutions(pb, 40, 0.01L, o);
  o.threads = 5;
  const SolutionSet five = count_solutions(pb, 40, 0.01L, o);
  REQUIRE(one.count() == five.count());
  CHECK(one.n_converged == five.n_converged);
  for (std::size_t i = 0; i < one.members.size(); ++i) CHECK(one.members[i].u() == five.members[i].u());
}

TEST_CASE("regime detection") {
  const Problem pb = canonical();
  const DiagramOptions o;
  std::optional<Real> delta;
  CHECK(detect_regime(pb, 5, o) == Regime::BelowLambda1);
  CHECK(detect_regime(pb, pb.lambda1(), o) == Regime::AtLambda1);
  CHECK(detect_regime(pb, 20, o) == Regime::Lambda1To2);
  CHECK(detect_regime(pb, pb.lambda2(), o) == Regime::AtLambda2);
  CHECK(detect_regime(pb, 40, o, &delta) == Regime::Window);
  REQUIRE(delta);
  CHECK(*delta == doctest::Approx(0.6284462099).epsilon(1e-7));
  CHECK(detect_regime(pb, 45, o) == Regime::AboveWindow);
  CHECK_THROWS_AS(detect_regime(pb, pb.lambda3(), o), DomainError);
  CHECK(parse_regime("theorem1") == Regime::Lambda1To2);
  CHECK(parse_regime(to_string(Regime::Window)) == Regime::Window);
  CHECK_THROWS_AS(parse_regime("theorem9"), DomainError);
}

TEST_CASE("index and dynamics agree at a=20") {
  const Problem pb = canonical(0);
  const StabilityCheck stable = stability_crosscheck(pb, dagger_at(pb, 20));
  CHECK(stable.outcome == StabilityOutcome::Pass);
  CHECK(stable.dynamics == "returns");
  CHECK(stable.static_applicable);
  CHECK(stable.static_stable);

  const StabilityCheck saddle = stability_crosscheck(pb, newton_solve(pb, pb.zeros(), 20, 0));
  CHECK(saddle.outcome == StabilityOutcome::Pass);
  CHECK(saddle.morse_index == 1);
  CHECK(saddle.dynamics == "departs");
  CHECK(!saddle.static_stable);

  const StabilityCheck off = stability_crosscheck(pb, dagger_at(pb, 20, -5));
  CHECK(off.outcome == StabilityOutcome::Pass);
  CHECK(!off.static_applicable);
}

TEST_CASE("a=20 diagram verifies") {
  const Problem pb = canonical(0);
  const BifurcationDiagram dg = assemble_diagram(pb, 20);
  VerifyOptions vo;
  vo.expected_regime = Regime::Lambda1To2;
  const VerificationReport rep = verify_structure(pb, dg, vo);
  for (const auto& c : rep.claims) {
    INFO(c.id << ": expected " << c.expected << ", measured " << c.measured);
    CHECK(c.pass);
  }
  REQUIRE(rep.find("single-fold"));

  VerifyOptions wrong;
  wrong.expected_regime = Regime::Window;
  CHECK(!verify_structure(pb, dg, wrong).all_pass());
}

TEST_CASE("below lambda1 the branch is unique and crosses the threshold") {
  const Problem pb = canonical();
  const BifurcationDiagram dg = assemble_diagram(pb, 5);
  REQUIRE(dg.branches.size() == 1);
  const Branch& b = dg.branches.front();
  CHECK(b.label == "M_unique");
  for (const auto& p : b.points) CHECK(p.morse_index == 0);
  CHECK(b.points.front().c() == doctest::Approx(-10));
  CHECK(b.points.back().c() == doctest::Approx(10));
}
