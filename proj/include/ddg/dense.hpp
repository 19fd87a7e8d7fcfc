#pragma once

#include <span>
#include <vector>

#include "ddg/errors.hpp"

namespace ddg {

/// Column-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(Index nrows, Index ncols) : nrows_(nrows), ncols_(ncols), values_(nrows * ncols, 0.0) {}
  DenseMatrix(Index nrows, Index ncols, std::vector<double> values);

  Index rows() const noexcept { return nrows_; }
  Index cols() const noexcept { return ncols_; }

  double& operator()(Index i, Index j) noexcept { return values_[j * nrows_ + i]; }
  double operator()(Index i, Index j) const noexcept { return values_[j * nrows_ + i]; }

  std::span<double> col(Index j) noexcept { return {values_.data() + j * nrows_, static_cast<std::size_t>(nrows_)}; }
  std::span<const double> col(Index j) const noexcept {
    return {values_.data() + j * nrows_, static_cast<std::size_t>(nrows_)};
  }
  std::span<const double> values() const noexcept { return values_; }

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<double> values_;
};

struct OrthonormalizeResult {
  DenseMatrix q;
  /// Indices (into the input columns) that survived the rank test, in order.
  std::vector<Index> kept;
};

inline constexpr double kDefaultRankTol = 1e-8;

/// Orthonormalizes the columns of `m` left to right by Gram-Schmidt with one
/// reorthogonalization pass. A column is dropped when its remaining norm
/// (the diagonal of the implied R factor) falls below rank_tol times the
/// largest input column norm.
OrthonormalizeResult qr_orthonormalize(const DenseMatrix& m, double rank_tol = kDefaultRankTol);

/// Eigenvalues (ascending) of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal, by Sturm-sequence bisection.
std::vector<double> tridiagonal_eigenvalues(std::span<const double> diag,
                                            std::span<const double> offdiag);

}  // namespace ddg
