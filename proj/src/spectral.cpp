#include "bifurcate/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "bifurcate/linalg.hpp"

namespace bifurcate {

Real degeneracy_tolerance(Real a) { return Real(1e-6) * std::max(Real(1), std::abs(a)); }

SymTridiagonal linearized_operator(const Problem& pb, const Field& u, Real a) {
  std::vector<Real> extra(u.size());
  for (int i = 0; i < u.size(); ++i) extra[i] = eval_nonlinearity(pb.nonlinearity(), u[i]).df - a;
  return pb.laplacian().scaled(-1).plus_diagonal(extra);
}

SpectrumSlice linearized_spectrum(const Problem& pb, const Field& u, Real a, int k) {
  if (k < 2 || k > u.size()) throw DomainError("linearized spectrum needs 2 <= k <= n");
  const auto op = linearized_operator(pb, u, a);
  const auto eig = linalg::smallest_eigenpairs(op, k);
  SpectrumSlice out;
  out.tolerance = degeneracy_tolerance(a);
  for (int j = 0; j < k; ++j) {
    Field w(u.domain(), eig.vectors[j]);
    if (j == 0) {
      Real sum = 0;
      for (int i = 0; i < w.size(); ++i) sum += w[i];
      if (sum < 0) w *= Real(-1);
      w = renormalize_l2(w, pb.phi_norm_sq());
    } else {
      const Real against = j == 1 ? inner_product(w, pb.psi()) : w[0];
      if (against < 0) w *= Real(-1);
      w = renormalize_l2(w, pb.psi_norm_sq());
    }
    out.pairs.push_back({eig.values[j], std::move(w)});
  }
  return out;
}

Real quadratic_form(const Problem& pb, const Field& u, Real a, const Field& v) {
  const Real h = pb.domain().spacing();
  const int n = v.size();
  Real grad = 0;
  for (int i = 0; i <= n; ++i) {
    const Real left = i > 0 ? v[i - 1] : Real(0);
    const Real right = i < n ? v[i] : Real(0);
    grad += (right - left) * (right - left);
  }
  grad /= h;
  Real rest = 0;
  for (int i = 0; i < n; ++i) rest += (eval_nonlinearity(pb.nonlinearity(), u[i]).df - a) * v[i] * v[i];
  return grad + h * rest;
}

MorseInfo morse_index(const SpectrumSlice& spectrum) {
  MorseInfo info;
  for (const auto& p : spectrum.pairs) {
    if (p.value < -spectrum.tolerance) ++info.index;
    if (std::abs(p.value) < spectrum.tolerance) info.degenerate = true;
  }
  if (info.index >= static_cast<int>(spectrum.pairs.size())) {
    throw InsufficientSpectrum("all " + std::to_string(spectrum.pairs.size()) +
                               " computed eigenvalues are negative; raise k");
  }
  return info;
}

}  // namespace bifurcate
