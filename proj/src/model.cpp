#include "bifurcate/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace bifurcate {

Nonlinearity::Nonlinearity(NonlinearitySpec spec) : spec_(spec) {
  if (spec.exponent < 3) {
    throw ModelError("exponent " + std::to_string(spec.exponent) +
                     " gives f'' discontinuous at M; need p >= 3 for f in C^2");
  }
  if (!(spec.threshold >= 0) || !std::isfinite(spec.threshold)) {
    throw ModelError("threshold M must be finite and nonnegative");
  }
}

NonlinearityValue eval_nonlinearity(const Nonlinearity& nl, Real u) {
  const Real s = u - nl.threshold();
  if (!(s > 0)) return {0, 0, 0};
  const int p = nl.exponent();
  const Real s_pm2 = std::pow(s, p - 2);
  return {s_pm2 * s * s, p * s_pm2 * s, Real(p) * (p - 1) * s_pm2};
}

Real antiderivative(const Nonlinearity& nl, Real u) {
  const Real s = u - nl.threshold();
  if (!(s > 0)) return 0;
  const int p = nl.exponent();
  return std::pow(s, p + 1) / (p + 1);
}

Real critical_cap(const Nonlinearity& nl, Real a) {
  if (!(a > 0) || !std::isfinite(a)) throw ModelError("critical cap needs a > 0");
  const Real m = nl.threshold();
  const int p = nl.exponent();
  if (m == 0) return std::pow(a, Real(1) / (p - 1));
  // g(K) = a*K - f(K) is positive at K = M and negative for large K.
  auto g = [&](Real k) { return a * k - eval_nonlinearity(nl, k).f; };
  Real lo = m;
  Real hi = m + 1;
  while (g(hi) > 0) hi = m + 2 * (hi - m);
  for (int i = 0; i < 300; ++i) {
    const Real mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    (g(mid) > 0 ? lo : hi) = mid;
  }
  return lo + (hi - lo) / 2;
}

std::string to_string(HarvestProfile p) {
  switch (p) {
    case HarvestProfile::Canonical: return "canonical";
    case HarvestProfile::Constant: return "constant";
    case HarvestProfile::FirstMode: return "first_mode";
  }
  return "canonical";
}

HarvestProfile parse_harvest_profile(const std::string& name) {
  if (name == "canonical") return HarvestProfile::Canonical;
  if (name == "constant") return HarvestProfile::Constant;
  if (name == "first_mode") return HarvestProfile::FirstMode;
  throw ModelError("unknown harvest profile '" + name + "' (expected canonical, constant or first_mode)");
}

Real harvest_value(const HarvestSpec& hs, Real x, Real length) {
  const Real xi = x / length;
  switch (hs.profile) {
    case HarvestProfile::Canonical: return hs.scale * xi * (1 - xi) * (1 - xi);
    case HarvestProfile::Constant: return hs.scale;
    case HarvestProfile::FirstMode: return hs.scale * std::sin(std::numbers::pi_v<Real> * xi);
  }
  return 0;
}

Field sample_harvest(const HarvestSpec& hs, const Domain& domain) {
  if (!(hs.scale > 0) || !std::isfinite(hs.scale)) throw ModelError("harvest scale must be positive");
  return Field::sample(domain, [&](Real x) { return harvest_value(hs, x, domain.length()); });
}

bool HypothesisReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.pass; });
}

const HypothesisCheck& HypothesisReport::get(const std::string& tag) const {
  for (const auto& c : checks) {
    if (c.tag == tag) return c;
  }
  throw DomainError("no hypothesis tagged " + tag);
}

HypothesisReport check_hypotheses(const NonlinearitySpec& spec, const HarvestSpec& hs, const Domain& domain) {
  HypothesisReport report;
  auto add = [&](std::string tag, bool pass, std::string witness, Real value, std::string note = {}) {
    report.checks.push_back({std::move(tag), pass, std::move(witness), value, std::move(note)});
  };

  const Field h = sample_harvest(hs, domain);
  const auto modes = laplacian_eigenpairs(domain, 3, &h);
  const Field& phi = modes.pairs[0].function;
  const Field& psi = modes.pairs[1].function;
  const Real lambda2 = modes.pairs[1].value;
  const Real lambda3 = modes.pairs[2].value;

  bool valid = true;
  try {
    Nonlinearity probe(spec);
  } catch (const ModelError& e) {
    valid = false;
    add("(i)", false, "exponent p", spec.exponent, e.what());
  }

  if (valid) {
    const Nonlinearity nl(spec);
    const Real m = nl.threshold();
    add("(i)", true, "exponent p", spec.exponent, "ramp power >= 3 is C^2");

    // u-grid spanning [-2K, 2K] with K the cap at the largest in-scope rate.
    const Real cap = std::max(critical_cap(nl, lambda3), Real(1));
    const int samples = 4001;
    std::vector<Real> us(samples);
    for (int i = 0; i < samples; ++i) us[i] = -2 * cap + 4 * cap * i / (samples - 1);

    bool sign_ok = true;
    bool convex = true;
    bool monotone_slope = true;
    bool ratio_ok = true;
    Real min_d2f = std::numeric_limits<Real>::infinity();
    Real prev_df = -std::numeric_limits<Real>::infinity();
    Real prev_ratio = -std::numeric_limits<Real>::infinity();
    for (Real u : us) {
      const auto v = eval_nonlinearity(nl, u);
      if (u <= m && v.f != 0) sign_ok = false;
      if (u > m && !(v.f > 0)) sign_ok = false;
      min_d2f = std::min(min_d2f, v.d2f);
      if (v.d2f < 0) convex = false;
      if (v.df < prev_df) monotone_slope = false;
      prev_df = v.df;
      if (u >= 0 && v.df * u - v.f < 0) ratio_ok = false;
      if (u > m && u > 0) {
        const Real ratio = v.f / u;
        if (ratio <= prev_ratio) ratio_ok = false;
        prev_ratio = ratio;
      }
    }
    add("(ii)", sign_ok, "f = 0 on u <= M, f > 0 on u > M over [-2K, 2K]; K", cap);
    add("(iii)", convex && monotone_slope, "min f'' over [-2K, 2K]", min_d2f);
    add("(iii)'", ratio_ok, "f'u - f >= 0 and f(u)/u increasing above M; K", cap);
    const Real big = 1000;
    const Real growth = eval_nonlinearity(nl, big).f / big;
    add("(iv)", growth > big, "f(u)/u at u = 1e3", growth, "finite-sample proxy for superlinear growth");
  } else {
    add("(ii)", false, "not evaluated", 0, "nonlinearity rejected");
    add("(iii)", false, "not evaluated", 0, "nonlinearity rejected");
    add("(iii)'", false, "not evaluated", 0, "nonlinearity rejected");
    add("(iv)", false, "not evaluated", 0, "nonlinearity rejected");
  }

  add("(a)", h.all_finite(), "max |h|", h.norm_inf());
  add("(b)", h.min() >= 0, "min h over nodes", h.min());
  add("(b)'", h.min() > 0, "min h over interior nodes", h.min());
  const Real ihphi = inner_product(h, phi);
  add("(b)''", ihphi > 0, "integral h*phi", ihphi, "weaker sign condition on h");
  const Real ihpsi = inner_product(h, psi);
  add("(c)", std::abs(ihpsi) > Real(1e-8), "integral h*psi", ihpsi);
  add("(alpha)", lambda3 - lambda2 > Real(1e-6), "lambda3 - lambda2", lambda3 - lambda2);
  return report;
}

}  // namespace bifurcate
