#include "bifurcate/linalg.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bifurcate::linalg {

namespace {
constexpr Real kEps = std::numeric_limits<Real>::epsilon();

Real matrix_scale(const SymTridiagonal& a) {
  Real m = 0;
  for (Real v : a.diag()) m = std::max(m, std::abs(v));
  for (Real v : a.off()) m = std::max(m, std::abs(v));
  return m;
}
}  // namespace

TridiagonalLU::TridiagonalLU(const SymTridiagonal& a)
    : n_(a.size()),
      dl_(a.off().begin(), a.off().end()),
      d_(a.diag().begin(), a.diag().end()),
      du_(a.off().begin(), a.off().end()),
      du2_(std::max(0, n_ - 2), Real(0)),
      ipiv_(n_),
      min_pivot_ratio_(0) {
  for (int i = 0; i < n_; ++i) ipiv_[i] = i;
  for (int i = 0; i < n_ - 1; ++i) {
    if (std::abs(d_[i]) >= std::abs(dl_[i])) {
      if (d_[i] != 0) {
        const Real fact = dl_[i] / d_[i];
        dl_[i] = fact;
        d_[i + 1] -= fact * du_[i];
      }
    } else {
      const Real fact = d_[i] / dl_[i];
      d_[i] = dl_[i];
      dl_[i] = fact;
      const Real temp = du_[i];
      du_[i] = d_[i + 1];
      d_[i + 1] = temp - fact * d_[i + 1];
      if (i < n_ - 2) {
        du2_[i] = du_[i + 1];
        du_[i + 1] = -fact * du_[i + 1];
      }
      ipiv_[i] = i + 1;
    }
  }
  const Real scale = matrix_scale(a);
  Real min_pivot = std::numeric_limits<Real>::infinity();
  for (Real p : d_) min_pivot = std::min(min_pivot, std::abs(p));
  min_pivot_ratio_ = scale > 0 ? min_pivot / scale : Real(0);
  // Exact zero pivots are nudged so that inverse iteration on a shifted
  // matrix still produces a usable direction.
  for (Real& p : d_) {
    if (p == 0) p = kEps * std::max(scale, Real(1));
  }
}

void TridiagonalLU::solve_in_place(std::span<Real> b) const {
  if (static_cast<int>(b.size()) != n_) throw DomainError("tridiagonal solve size mismatch");
  for (int i = 0; i < n_ - 1; ++i) {
    const int ip = ipiv_[i];
    const Real temp = b[i + 1 - ip + i] - dl_[i] * b[ip];
    b[i] = b[ip];
    b[i + 1] = temp;
  }
  b[n_ - 1] /= d_[n_ - 1];
  if (n_ > 1) b[n_ - 2] = (b[n_ - 2] - du_[n_ - 2] * b[n_ - 1]) / d_[n_ - 2];
  for (int i = n_ - 3; i >= 0; --i) {
    b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
  }
}

Field TridiagonalLU::solve(const Field& rhs) const {
  Field x = rhs;
  solve_in_place(x.values());
  return x;
}

int sturm_count(const SymTridiagonal& a, Real x) {
  const auto d = a.diag();
  const auto e = a.off();
  const Real tiny = kEps * std::max(matrix_scale(a), Real(1)) * kEps;
  int count = 0;
  Real q = d[0] - x;
  if (q == 0) q = -tiny;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q == 0) q = -tiny;
    if (q < 0) ++count;
  }
  return count;
}

namespace {

Real bisect_eigenvalue(const SymTridiagonal& a, int j, Real lo, Real hi) {
  // Invariant: count(lo) <= j < count(hi).
  for (int iter = 0; iter < 400; ++iter) {
    const Real mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    if (sturm_count(a, mid) > j) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

std::vector<Real> inverse_iteration(const SymTridiagonal& a, Real lambda,
                                    const std::vector<std::vector<Real>>& previous) {
  const int n = a.size();
  const Real scale = std::max(matrix_scale(a), Real(1));
  // A tiny offset keeps the shifted factorization from hitting an exact zero.
  const TridiagonalLU lu(a.shifted(-(lambda + 4 * kEps * scale)));
  std::vector<Real> x(n);
  for (int i = 0; i < n; ++i) x[i] = Real(1) + Real(0.01) * std::sin(Real(1.3) * (i + 1));
  auto orthonormalize = [&]() {
    for (const auto& p : previous) {
      Real dot = 0;
      for (int i = 0; i < n; ++i) dot += p[i] * x[i];
      for (int i = 0; i < n; ++i) x[i] -= dot * p[i];
    }
    Real nrm = 0;
    for (Real v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (Real& v : x) v /= nrm;
  };
  orthonormalize();
  for (int iter = 0; iter < 4; ++iter) {
    lu.solve_in_place(x);
    orthonormalize();
  }
  return x;
}

}  // namespace

TridiagonalEigen smallest_eigenpairs(const SymTridiagonal& a, int k) {
  const int n = a.size();
  if (k < 1 || k > n) throw DomainError("eigenpair count out of range: " + std::to_string(k));
  const auto d = a.diag();
  const auto e = a.off();
  Real lo = std::numeric_limits<Real>::infinity();
  Real hi = -lo;
  for (int i = 0; i < n; ++i) {
    Real r = 0;
    if (i > 0) r += std::abs(e[i - 1]);
    if (i + 1 < n) r += std::abs(e[i]);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const Real pad = 4 * kEps * std::max({std::abs(lo), std::abs(hi), Real(1)});
  lo -= pad;
  hi += pad;

  TridiagonalEigen out;
  for (int j = 0; j < k; ++j) {
    const Real value = bisect_eigenvalue(a, j, lo, hi);
    out.vectors.push_back(inverse_iteration(a, value, out.vectors));
    out.values.push_back(value);
  }
  return out;
}

SparseSystem::SparseSystem(int dim) : dim_(dim) {}

void SparseSystem::add(int row, int col, Real value) {
  if (value != 0) entries_.push_back({row, col, value});
}

void SparseSystem::add_tridiagonal(int row0, int col0, const SymTridiagonal& block) {
  const auto d = block.diag();
  const auto e = block.off();
  const int n = block.size();
  for (int i = 0; i < n; ++i) {
    add(row0 + i, col0 + i, d[i]);
    if (i + 1 < n) {
      add(row0 + i, col0 + i + 1, e[i]);
      add(row0 + i + 1, col0 + i, e[i]);
    }
  }
}

std::vector<Real> SparseSystem::solve(std::span<const Real> rhs) const {
  using Matrix = Eigen::SparseMatrix<Real>;
  using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  std::vector<Eigen::Triplet<Real>> triplets;
  triplets.reserve(entries_.size());
  for (const auto& t : entries_) triplets.emplace_back(t.row, t.col, t.value);
  Matrix m(dim_, dim_);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  Eigen::SparseLU<Matrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) throw NonConvergence("sparse factorization failed (singular system)");
  Vector b(dim_);
  for (int i = 0; i < dim_; ++i) b[i] = rhs[i];
  Vector x = lu.solve(b);
  // One step of iterative refinement.
  Vector r = b - m * x;
  x += lu.solve(r);
  if (!x.allFinite()) throw NonConvergence("sparse solve produced non-finite values");
  return std::vector<Real>(x.data(), x.data() + dim_);
}

}  // namespace bifurcate::linalg
