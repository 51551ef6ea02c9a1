// Tridiagonal factorizations, symmetric tridiagonal eigen-solver, and a thin
// sparse direct solve for bordered/extended systems.
#pragma once

#include <span>
#include <vector>

#include "bifurcate/grid.hpp"

namespace bifurcate::linalg {

// LU with partial pivoting of a (symmetric) tridiagonal matrix, following the
// classic gttrf layout: two upper diagonals after pivoting.
class TridiagonalLU {
 public:
  explicit TridiagonalLU(const SymTridiagonal& a);

  // Smallest |pivot| relative to the largest |entry| of the input.
  Real min_pivot_ratio() const { return min_pivot_ratio_; }
  bool singular(Real threshold) const { return min_pivot_ratio_ < threshold; }

  void solve_in_place(std::span<Real> rhs) const;
  Field solve(const Field& rhs) const;

 private:
  int n_;
  std::vector<Real> dl_, d_, du_, du2_;
  std::vector<int> ipiv_;
  Real min_pivot_ratio_;
};

// Number of eigenvalues strictly below x.
int sturm_count(const SymTridiagonal& a, Real x);

// k smallest eigenpairs with eigenvectors of unit Euclidean norm, ascending.
struct TridiagonalEigen {
  std::vector<Real> values;
  std::vector<std::vector<Real>> vectors;
};
TridiagonalEigen smallest_eigenpairs(const SymTridiagonal& a, int k);

// Sparse square system assembled from triplets and solved by sparse LU.
class SparseSystem {
 public:
  explicit SparseSystem(int dim);

  int dim() const { return dim_; }
  void add(int row, int col, Real value);
  // Places a tridiagonal block with its top-left corner at (row0, col0).
  void add_tridiagonal(int row0, int col0, const SymTridiagonal& block);
  std::vector<Real> solve(std::span<const Real> rhs) const;

 private:
  int dim_;
  struct Entry {
    int row, col;
    Real value;
  };
  std::vector<Entry> entries_;
};

}  // namespace bifurcate::linalg
