// Competition term f(u) = ((u - M)^+)^p, harvest profiles, and a numerical
// checker for the structural hypotheses on (f, h).
#pragma once

#include <string>
#include <vector>

#include "bifurcate/grid.hpp"

namespace bifurcate {

struct NonlinearitySpec {
  Real threshold = 0.2L;  // M
  int exponent = 3;      // p
};

class Nonlinearity {
 public:
  // Throws ModelError unless M >= 0 and p >= 3 (f must be C^2).
  explicit Nonlinearity(NonlinearitySpec spec);
  Nonlinearity(Real threshold, int exponent) : Nonlinearity(NonlinearitySpec{threshold, exponent}) {}

  Real threshold() const { return spec_.threshold; }
  int exponent() const { return spec_.exponent; }
  const NonlinearitySpec& spec() const { return spec_; }

 private:
  NonlinearitySpec spec_;
};

struct NonlinearityValue {
  Real f;
  Real df;
  Real d2f;
};

NonlinearityValue eval_nonlinearity(const Nonlinearity& nl, Real u);
// F(u) = integral of f from 0 to u.
Real antiderivative(const Nonlinearity& nl, Real u);

// Positive root K of a*K = f(K). Throws ModelError for a <= 0.
Real critical_cap(const Nonlinearity& nl, Real a);

enum class HarvestProfile { Canonical, Constant, FirstMode };

std::string to_string(HarvestProfile p);
// Accepts "canonical", "constant", "first_mode"; throws ModelError otherwise.
HarvestProfile parse_harvest_profile(const std::string& name);

struct HarvestSpec {
  HarvestProfile profile = HarvestProfile::Canonical;
  Real scale = 1;
};

// Canonical: s*xi*(1-xi)^2, constant: s, first mode: s*sin(pi*xi), xi = x/length.
Real harvest_value(const HarvestSpec& hs, Real x, Real length);
Field sample_harvest(const HarvestSpec& hs, const Domain& domain);

struct HypothesisCheck {
  std::string tag;
  bool pass = false;
  std::string witness;  // what the value measures
  Real value = 0;
  std::string note;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;

  bool all_pass() const;
  // Throws DomainError for an unknown tag.
  const HypothesisCheck& get(const std::string& tag) const;
};

// Never throws for model problems: an invalid exponent shows up as a failed (i).
HypothesisReport check_hypotheses(const NonlinearitySpec& nl, const HarvestSpec& hs, const Domain& domain);

}  // namespace bifurcate
