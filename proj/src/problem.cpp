#include "bifurcate/problem.hpp"

namespace bifurcate {

namespace {
LaplacianModes modes_for(const Domain& domain, const Field& h) { return laplacian_eigenpairs(domain, 3, &h); }
}  // namespace

Problem::Problem(const Domain& domain, NonlinearitySpec nl, HarvestSpec hs)
    : domain_(domain),
      laplacian_(assemble_laplacian(domain)),
      nl_(nl),
      hs_(hs),
      h_(sample_harvest(hs, domain)),
      phi_(domain),
      psi_(domain) {
  const auto modes = modes_for(domain_, h_);
  phi_ = modes.pairs[0].function;
  psi_ = modes.pairs[1].function;
  for (int k = 0; k < 3; ++k) lambda_[k] = modes.pairs[k].value;
  psi_ambiguous_ = modes.second_mode_sign_ambiguous;
  beta_ = -psi_.min();
  phi_norm_sq_ = inner_product(phi_, phi_);
  psi_norm_sq_ = inner_product(psi_, psi_);
  h_phi_ = inner_product(h_, phi_);
  h_psi_ = inner_product(h_, psi_);
}

}  // namespace bifurcate
