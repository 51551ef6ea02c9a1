// Uniform interior grid on (0, length), grid functions with implicit zero
// boundary values, and the second-order Dirichlet Laplacian.
#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bifurcate/core.hpp"

namespace bifurcate {

class Domain {
 public:
  Domain(int n_interior, Real length);

  int size() const { return n_; }
  Real length() const { return length_; }
  Real spacing() const { return spacing_; }
  // Interior node i = 0..size()-1 sits at (i+1)*spacing.
  Real node(int i) const { return static_cast<Real>(i + 1) * spacing_; }
  std::vector<Real> nodes() const;

  bool operator==(const Domain&) const = default;

 private:
  int n_;
  Real length_;
  Real spacing_;
};

Domain build_grid(int n_interior, Real length);

class Field {
 public:
  explicit Field(const Domain& domain);
  Field(const Domain& domain, std::vector<Real> values);

  static Field sample(const Domain& domain, const std::function<Real(Real)>& fn);

  const Domain& domain() const { return domain_; }
  int size() const { return domain_.size(); }

  Real& operator[](std::size_t i) { return values_[i]; }
  Real operator[](std::size_t i) const { return values_[i]; }
  std::span<Real> values() { return values_; }
  std::span<const Real> values() const { return values_; }

  Real max() const;
  Real min() const;
  Real norm_inf() const;
  bool all_finite() const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(Real s);
  // this += s * other
  Field& axpy(Real s, const Field& other);

  friend Field operator+(Field lhs, const Field& rhs) { return lhs += rhs; }
  friend Field operator-(Field lhs, const Field& rhs) { return lhs -= rhs; }
  friend Field operator*(Real s, Field f) { return f *= s; }
  friend Field operator*(Field f, Real s) { return f *= s; }
  friend Field operator-(Field f) { return f *= Real(-1); }

  bool operator==(const Field&) const = default;

 private:
  Domain domain_;
  std::vector<Real> values_;
};

// Trapezoid rule with zero boundary values: spacing * sum of products.
Real inner_product(const Field& f1, const Field& f2);
Real l2_norm(const Field& f);
// Scale f so that inner_product(f, f) == target_norm_sq.
Field renormalize_l2(const Field& f, Real target_norm_sq);
// Scale f so that its maximum nodal value is 1.
Field renormalize_max(const Field& f);

// Symmetric tridiagonal operator; off[i] couples nodes i and i+1.
class SymTridiagonal {
 public:
  SymTridiagonal(std::vector<Real> diag, std::vector<Real> off);

  int size() const { return static_cast<int>(diag_.size()); }
  std::span<const Real> diag() const { return diag_; }
  std::span<const Real> off() const { return off_; }

  Field apply(const Field& x) const;
  void apply(std::span<const Real> x, std::span<Real> y) const;

  SymTridiagonal shifted(Real sigma) const;                 // A + sigma*I
  SymTridiagonal plus_diagonal(std::span<const Real> d) const;  // A + diag(d)
  SymTridiagonal scaled(Real s) const;

 private:
  std::vector<Real> diag_;
  std::vector<Real> off_;
};

// Central-difference Dirichlet Laplacian (negative definite).
SymTridiagonal assemble_laplacian(const Domain& domain);

struct EigenPair {
  Real value;
  Field function;
};

struct LaplacianModes {
  // k smallest eigenpairs of -Laplacian, ascending, max-normalized.
  std::vector<EigenPair> pairs;
  // Set when the harvest profile is orthogonal to the second mode, so its
  // sign could not be fixed by the integral convention.
  bool second_mode_sign_ambiguous = false;
};

// Eigenfunctions are scaled to max value 1. When a harvest field is given
// and k >= 2 the second mode is oriented so that its integral against the
// harvest is negative.
LaplacianModes laplacian_eigenpairs(const Domain& domain, int k, const Field* harvest = nullptr);

// Closed-form eigenvalue of -Laplacian_h: (4/h^2) sin^2(k pi h / (2 L)).
Real discrete_dirichlet_eigenvalue(const Domain& domain, int k);

}  // namespace bifurcate
