#include "ddg/cholesky.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ddg {

namespace {

// A pivot is rejected when it falls below this fraction of the original
// diagonal entry; exact singularity rarely survives rounding as a clean zero.
constexpr double kPivotTol = 1e-13;

std::vector<Index> amd_ordering(const CsrMatrix& a) {
  using SpMat = Eigen::SparseMatrix<double, Eigen::ColMajor, Index>;
  std::vector<Eigen::Triplet<double, Index>> trips;
  trips.reserve(a.nnz());
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index c : a.row_cols(i)) trips.emplace_back(i, c, 1.0);
  }
  SpMat pattern(a.rows(), a.cols());
  pattern.setFromTriplets(trips.begin(), trips.end());
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, Index> pinv;
  Eigen::AMDOrdering<Index> amd;
  amd(pattern, pinv);
  std::vector<Index> perm(a.rows());
  for (Index k = 0; k < a.rows(); ++k) perm[k] = pinv.indices()[k];
  return perm;
}

}  // namespace

CholeskyFactor CholeskyFactor::factorize(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("cholesky_factorize: matrix must be square");
  const Index n = a.rows();
  CholeskyFactor f;
  f.kind_ = Kind::dense;
  f.n_ = n;
  f.perm_.resize(n);
  std::iota(f.perm_.begin(), f.perm_.end(), Index{0});
  f.dense_.assign(a.values().begin(), a.values().end());
  auto& l = f.dense_;
  // Left-looking column Cholesky on the lower triangle.
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < j; ++k) {
      const double ljk = l[k * n + j];
      if (ljk == 0.0) continue;
      for (Index i = j; i < n; ++i) l[j * n + i] -= l[k * n + i] * ljk;
    }
    const double d = l[j * n + j];
    if (!(d > kPivotTol * std::abs(a(j, j)))) throw NotPositiveDefinite(j);
    const double s = std::sqrt(d);
    l[j * n + j] = s;
    for (Index i = j + 1; i < n; ++i) l[j * n + i] /= s;
  }
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) l[j * n + i] = 0.0;
  }
  return f;
}

CholeskyFactor CholeskyFactor::factorize(const CsrMatrix& a, Index dense_threshold) {
  if (a.rows() != a.cols()) throw DimensionError("cholesky_factorize: matrix must be square");
  const Index n = a.rows();
  if (n <= dense_threshold) {
    DenseMatrix d(n, n);
    for (Index i = 0; i < n; ++i) {
      const auto cols = a.row_cols(i);
      const auto vals = a.row_values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) d(i, cols[k]) = vals[k];
    }
    return factorize(d);
  }

  CholeskyFactor f;
  f.kind_ = Kind::sparse;
  f.n_ = n;
  f.perm_ = amd_ordering(a);
  std::vector<Index> iperm(n);
  for (Index k = 0; k < n; ++k) iperm[f.perm_[k]] = k;

  // Upper triangle of column k of C = P A P^T, i.e. entries C(i,k) with i <= k,
  // read from row perm[k] of A by symmetry.
  std::vector<Index> up_ptr(n + 1, 0);
  for (Index k = 0; k < n; ++k) {
    Index count = 0;
    for (Index c : a.row_cols(f.perm_[k])) count += iperm[c] <= k;
    up_ptr[k + 1] = up_ptr[k] + count;
  }
  std::vector<Index> up_idx(up_ptr[n]);
  std::vector<double> up_val(up_ptr[n]);
  std::vector<double> diag(n, 0.0);
  for (Index k = 0; k < n; ++k) {
    Index dst = up_ptr[k];
    const auto cols = a.row_cols(f.perm_[k]);
    const auto vals = a.row_values(f.perm_[k]);
    for (std::size_t q = 0; q < cols.size(); ++q) {
      const Index i = iperm[cols[q]];
      if (i > k) continue;
      up_idx[dst] = i;
      up_val[dst++] = vals[q];
      if (i == k) diag[k] = vals[q];
    }
  }

  // Elimination tree.
  std::vector<Index> parent(n, -1);
  std::vector<Index> ancestor(n, -1);
  for (Index k = 0; k < n; ++k) {
    for (Index p = up_ptr[k]; p < up_ptr[k + 1]; ++p) {
      Index i = up_idx[p];
      while (i != -1 && i < k) {
        const Index next = ancestor[i];
        ancestor[i] = k;
        if (next == -1) parent[i] = k;
        i = next;
      }
    }
  }

  // Row pattern of L(k, :) via the elimination tree, written to stack[top..n).
  std::vector<Index> flag(n, -1);
  std::vector<Index> stack(n);
  auto ereach = [&](Index k) {
    Index top = n;
    flag[k] = k;
    for (Index p = up_ptr[k]; p < up_ptr[k + 1]; ++p) {
      Index i = up_idx[p];
      Index len = 0;
      while (flag[i] != k) {
        stack[len++] = i;
        flag[i] = k;
        i = parent[i];
      }
      while (len > 0) stack[--top] = stack[--len];
    }
    return top;
  };

  std::vector<Index> counts(n, 1);
  for (Index k = 0; k < n; ++k) {
    const Index top = ereach(k);
    for (Index q = top; q < n; ++q) ++counts[stack[q]];
  }
  f.col_ptr_.assign(n + 1, 0);
  for (Index j = 0; j < n; ++j) f.col_ptr_[j + 1] = f.col_ptr_[j] + counts[j];
  f.row_idx_.resize(f.col_ptr_[n]);
  f.lvals_.resize(f.col_ptr_[n]);

  // Up-looking numeric factorization: row k of L from a sparse triangular solve.
  std::fill(flag.begin(), flag.end(), -1);
  std::vector<Index> next(f.col_ptr_.begin(), f.col_ptr_.end() - 1);
  std::vector<double> x(n, 0.0);
  for (Index k = 0; k < n; ++k) {
    const Index top = ereach(k);
    for (Index p = up_ptr[k]; p < up_ptr[k + 1]; ++p) x[up_idx[p]] = up_val[p];
    double d = x[k];
    x[k] = 0.0;
    for (Index q = top; q < n; ++q) {
      const Index i = stack[q];
      const double lki = x[i] / f.lvals_[f.col_ptr_[i]];
      x[i] = 0.0;
      for (Index p = f.col_ptr_[i] + 1; p < next[i]; ++p) x[f.row_idx_[p]] -= f.lvals_[p] * lki;
      d -= lki * lki;
      const Index p = next[i]++;
      f.row_idx_[p] = k;
      f.lvals_[p] = lki;
    }
    if (!(d > kPivotTol * std::abs(diag[k]))) throw NotPositiveDefinite(f.perm_[k]);
    const Index p = next[k]++;
    f.row_idx_[p] = k;
    f.lvals_[p] = std::sqrt(d);
  }
  return f;
}

Index CholeskyFactor::factor_nnz() const noexcept {
  if (kind_ == Kind::dense) return n_ * (n_ + 1) / 2;
  return static_cast<Index>(lvals_.size());
}

std::vector<double> CholeskyFactor::solve(std::span<const double> b) const {
  if (static_cast<Index>(b.size()) != n_) {
    throw DimensionError("cholesky solve: rhs length " + std::to_string(b.size()) + " vs " +
                         std::to_string(n_));
  }
  std::vector<double> x(b.begin(), b.end());
  std::vector<double> work(n_);
  solve_in_place(x, work);
  return x;
}

void CholeskyFactor::solve_in_place(std::span<double> b, std::span<double> work) const {
  const Index n = n_;
  if (kind_ == Kind::dense) {
    const double* l = dense_.data();
    for (Index j = 0; j < n; ++j) {
      const double yj = b[j] / l[j * n + j];
      b[j] = yj;
      for (Index i = j + 1; i < n; ++i) b[i] -= l[j * n + i] * yj;
    }
    for (Index j = n - 1; j >= 0; --j) {
      double s = b[j];
      for (Index i = j + 1; i < n; ++i) s -= l[j * n + i] * b[i];
      b[j] = s / l[j * n + j];
    }
    return;
  }
  for (Index k = 0; k < n; ++k) work[k] = b[perm_[k]];
  for (Index j = 0; j < n; ++j) {
    const double yj = work[j] / lvals_[col_ptr_[j]];
    work[j] = yj;
    for (Index p = col_ptr_[j] + 1; p < col_ptr_[j + 1]; ++p) work[row_idx_[p]] -= lvals_[p] * yj;
  }
  for (Index j = n - 1; j >= 0; --j) {
    double s = work[j];
    for (Index p = col_ptr_[j] + 1; p < col_ptr_[j + 1]; ++p) s -= lvals_[p] * work[row_idx_[p]];
    work[j] = s / lvals_[col_ptr_[j]];
  }
  for (Index k = 0; k < n; ++k) b[perm_[k]] = work[k];
}

}  // namespace ddg
