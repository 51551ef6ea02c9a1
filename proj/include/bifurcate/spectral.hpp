// Leading eigenpairs of the linearization -(Laplacian + a - f'(u)) and the
// Morse index derived from them.
#pragma once

#include <vector>

#include "bifurcate/problem.hpp"

namespace bifurcate {

class InsufficientSpectrum : public Error {
 public:
  using Error::Error;
};

// |mu| below this counts as zero: 1e-6 * max(1, |a|).
Real degeneracy_tolerance(Real a);

struct SpectrumSlice {
  // Ascending. First eigenfunction positive with integral w^2 = integral phi^2;
  // the rest carry integral w^2 = integral psi^2, the second one oriented so
  // that its inner product with psi is nonnegative.
  std::vector<EigenPair> pairs;
  Real tolerance = 0;

  Real mu(int i) const { return pairs.at(i).value; }
  const Field& w(int i) const { return pairs.at(i).function; }
};

// The linearized operator as a symmetric tridiagonal matrix.
SymTridiagonal linearized_operator(const Problem& pb, const Field& u, Real a);

// k >= 2 smallest eigenpairs.
SpectrumSlice linearized_spectrum(const Problem& pb, const Field& u, Real a, int k = 3);

// Q_a(v) = integral(|grad v|^2 - a v^2 + f'(u) v^2) with forward differences.
Real quadratic_form(const Problem& pb, const Field& u, Real a, const Field& v);

struct MorseInfo {
  int index = 0;
  bool degenerate = false;
};

// Throws InsufficientSpectrum when every computed eigenvalue is negative.
MorseInfo morse_index(const SpectrumSlice& spectrum);

}  // namespace bifurcate
