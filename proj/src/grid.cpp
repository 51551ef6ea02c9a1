#include "bifurcate/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "bifurcate/linalg.hpp"

namespace bifurcate {

Domain::Domain(int n_interior, Real length) : n_(n_interior), length_(length), spacing_(0) {
  if (n_interior < 3) {
    throw DomainError("grid needs at least 3 interior nodes, got " + std::to_string(n_interior));
  }
  if (!(length > 0) || !std::isfinite(length)) {
    throw DomainError("domain length must be positive and finite");
  }
  spacing_ = length / static_cast<Real>(n_interior + 1);
}

std::vector<Real> Domain::nodes() const {
  std::vector<Real> x(n_);
  for (int i = 0; i < n_; ++i) x[i] = node(i);
  return x;
}

Domain build_grid(int n_interior, Real length) { return Domain(n_interior, length); }

Field::Field(const Domain& domain) : domain_(domain), values_(domain.size(), Real(0)) {}

Field::Field(const Domain& domain, std::vector<Real> values)
    : domain_(domain), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != domain_.size()) {
    throw DomainError("field has " + std::to_string(values_.size()) + " values, domain has " +
                      std::to_string(domain_.size()) + " nodes");
  }
  if (!all_finite()) throw DomainError("field contains non-finite values");
}

Field Field::sample(const Domain& domain, const std::function<Real(Real)>& fn) {
  std::vector<Real> v(domain.size());
  for (int i = 0; i < domain.size(); ++i) v[i] = fn(domain.node(i));
  return Field(domain, std::move(v));
}

Real Field::max() const { return *std::max_element(values_.begin(), values_.end()); }
Real Field::min() const { return *std::min_element(values_.begin(), values_.end()); }

Real Field::norm_inf() const {
  Real m = 0;
  for (Real v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](Real v) { return std::isfinite(v); });
}

namespace {
void require_same(const Domain& a, const Domain& b) {
  if (!(a == b)) throw DomainError("fields live on different domains");
}
}  // namespace

Field& Field::operator+=(const Field& other) {
  require_same(domain_, other.domain_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same(domain_, other.domain_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(Real s) {
  for (Real& v : values_) v *= s;
  return *this;
}

Field& Field::axpy(Real s, const Field& other) {
  require_same(domain_, other.domain_);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += s * other.values_[i];
  return *this;
}

Real inner_product(const Field& f1, const Field& f2) {
  require_same(f1.domain(), f2.domain());
  Real sum = 0;
  for (int i = 0; i < f1.size(); ++i) sum += f1[i] * f2[i];
  return f1.domain().spacing() * sum;
}

Real l2_norm(const Field& f) { return std::sqrt(inner_product(f, f)); }

Field renormalize_l2(const Field& f, Real target_norm_sq) {
  const Real n2 = inner_product(f, f);
  if (!(n2 > 0)) throw DomainError("cannot normalize the zero field");
  return f * std::sqrt(target_norm_sq / n2);
}

Field renormalize_max(const Field& f) {
  const Real m = f.max();
  if (!(m > 0)) throw DomainError("field has no positive maximum to normalize");
  return f * (Real(1) / m);
}

SymTridiagonal::SymTridiagonal(std::vector<Real> diag, std::vector<Real> off)
    : diag_(std::move(diag)), off_(std::move(off)) {
  if (diag_.empty() || off_.size() + 1 != diag_.size()) {
    throw DomainError("tridiagonal needs n diagonal and n-1 off-diagonal entries");
  }
}

void SymTridiagonal::apply(std::span<const Real> x, std::span<Real> y) const {
  const int n = size();
  for (int i = 0; i < n; ++i) {
    Real s = diag_[i] * x[i];
    if (i > 0) s += off_[i - 1] * x[i - 1];
    if (i + 1 < n) s += off_[i] * x[i + 1];
    y[i] = s;
  }
}

Field SymTridiagonal::apply(const Field& x) const {
  if (x.size() != size()) throw DomainError("operator/field size mismatch");
  Field y(x.domain());
  apply(x.values(), y.values());
  return y;
}

SymTridiagonal SymTridiagonal::shifted(Real sigma) const {
  auto d = diag_;
  for (Real& v : d) v += sigma;
  return SymTridiagonal(std::move(d), off_);
}

SymTridiagonal SymTridiagonal::plus_diagonal(std::span<const Real> extra) const {
  auto d = diag_;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += extra[i];
  return SymTridiagonal(std::move(d), off_);
}

SymTridiagonal SymTridiagonal::scaled(Real s) const {
  auto d = diag_;
  auto o = off_;
  for (Real& v : d) v *= s;
  for (Real& v : o) v *= s;
  return SymTridiagonal(std::move(d), std::move(o));
}

SymTridiagonal assemble_laplacian(const Domain& domain) {
  const Real inv_h2 = Real(1) / (domain.spacing() * domain.spacing());
  return SymTridiagonal(std::vector<Real>(domain.size(), -2 * inv_h2),
                        std::vector<Real>(domain.size() - 1, inv_h2));
}

Real discrete_dirichlet_eigenvalue(const Domain& domain, int k) {
  const Real h = domain.spacing();
  const Real s = std::sin(static_cast<Real>(k) * std::numbers::pi_v<Real> * h / (2 * domain.length()));
  return 4 * s * s / (h * h);
}

LaplacianModes laplacian_eigenpairs(const Domain& domain, int k, const Field* harvest) {
  if (k < 1 || k > domain.size()) {
    throw DomainError("requested " + std::to_string(k) + " eigenpairs on a grid of " +
                      std::to_string(domain.size()) + " nodes");
  }
  const auto minus_laplacian = assemble_laplacian(domain).scaled(-1);
  const auto eig = linalg::smallest_eigenpairs(minus_laplacian, k);

  LaplacianModes modes;
  for (int j = 0; j < k; ++j) {
    Field v(domain, eig.vectors[j]);
    bool flip = false;
    if (j == 0) {
      Real sum = 0;
      for (int i = 0; i < v.size(); ++i) sum += v[i];
      flip = sum < 0;
    } else {
      flip = v[0] < 0;
      if (j == 1 && harvest != nullptr) {
        const Real ih = inner_product(*harvest, v);
        const Real scale = l2_norm(*harvest) * l2_norm(v);
        if (std::abs(ih) <= Real(1e-10) * scale) {
          modes.second_mode_sign_ambiguous = true;
        } else {
          flip = ih > 0;
        }
      }
    }
    if (flip) v *= Real(-1);
    modes.pairs.push_back({eig.values[j], renormalize_max(v)});
  }
  return modes;
}

}  // namespace bifurcate
