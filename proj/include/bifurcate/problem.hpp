// Immutable problem context: grid, operator, model and the Laplacian modes
// that every other module projects onto.
#pragma once

#include "bifurcate/grid.hpp"
#include "bifurcate/model.hpp"

namespace bifurcate {

class Problem {
 public:
  Problem(const Domain& domain, NonlinearitySpec nl, HarvestSpec hs);

  const Domain& domain() const { return domain_; }
  const SymTridiagonal& laplacian() const { return laplacian_; }
  const Nonlinearity& nonlinearity() const { return nl_; }
  const HarvestSpec& harvest_spec() const { return hs_; }
  const Field& harvest() const { return h_; }

  // Max-normalized first and second modes of -Laplacian_h, psi oriented by
  // the harvest profile.
  const Field& phi() const { return phi_; }
  const Field& psi() const { return psi_; }
  Real lambda1() const { return lambda_[0]; }
  Real lambda2() const { return lambda_[1]; }
  Real lambda3() const { return lambda_[2]; }
  // beta = -min psi
  Real beta() const { return beta_; }
  bool psi_sign_ambiguous() const { return psi_ambiguous_; }

  Real phi_norm_sq() const { return phi_norm_sq_; }
  Real psi_norm_sq() const { return psi_norm_sq_; }
  Real h_phi() const { return h_phi_; }
  Real h_psi() const { return h_psi_; }

  Field zeros() const { return Field(domain_); }

 private:
  Domain domain_;
  SymTridiagonal laplacian_;
  Nonlinearity nl_;
  HarvestSpec hs_;
  Field h_;
  Field phi_;
  Field psi_;
  Real lambda_[3];
  Real beta_;
  bool psi_ambiguous_;
  Real phi_norm_sq_, psi_norm_sq_, h_phi_, h_psi_;
};

}  // namespace bifurcate
