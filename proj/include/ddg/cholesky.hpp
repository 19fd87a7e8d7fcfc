#pragma once

#include <span>
#include <vector>

#include "ddg/dense.hpp"
#include "ddg/sparse.hpp"

namespace ddg {

/// Sparse inputs at or below this dimension are factored densely.
inline constexpr Index kDenseCholeskyThreshold = 64;

/// Cholesky factor P^T L L^T P of a symmetric positive definite matrix.
///
/// The dense variant stores L column-major with the identity ordering. The
/// sparse variant uses an AMD fill-reducing ordering and stores L in
/// compressed-column form with the diagonal first in every column.
class CholeskyFactor {
 public:
  enum class Kind { dense, sparse };

  /// Throws NotPositiveDefinite (carrying the original row index) on a
  /// non-positive pivot.
  static CholeskyFactor factorize(const CsrMatrix& a,
                                  Index dense_threshold = kDenseCholeskyThreshold);
  static CholeskyFactor factorize(const DenseMatrix& a);

  Kind kind() const noexcept { return kind_; }
  Index size() const noexcept { return n_; }
  /// ordering[k] = original index eliminated at step k.
  std::span<const Index> ordering() const noexcept { return perm_; }
  /// Stored entries of L.
  Index factor_nnz() const noexcept;

  std::vector<double> solve(std::span<const double> b) const;
  /// Overwrites b with A^{-1} b. `work` must have size() entries.
  void solve_in_place(std::span<double> b, std::span<double> work) const;

 private:
  Kind kind_ = Kind::dense;
  Index n_ = 0;
  std::vector<Index> perm_;
  // dense: column-major n x n lower triangle
  std::vector<double> dense_;
  // sparse: CSC lower triangle
  std::vector<Index> col_ptr_;
  std::vector<Index> row_idx_;
  std::vector<double> lvals_;
};

}  // namespace ddg
