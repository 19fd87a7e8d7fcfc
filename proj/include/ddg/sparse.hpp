#pragma once

#include <span>
#include <vector>

#include "ddg/errors.hpp"

namespace ddg {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row matrix in canonical form: column indices strictly
/// increasing within each row, no duplicates. Immutable after construction.
class CsrMatrix {
 public:
  CsrMatrix() : row_offsets_{0} {}

  /// Takes ownership of already-assembled CSR arrays. Throws InvalidArgument
  /// unless the arrays are canonical.
  CsrMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets,
            std::vector<Index> col_indices, std::vector<double> values,
            bool symmetric = false);

  /// Builds from unordered triplets; duplicates are summed. Explicit zeros
  /// produced by summation are kept so the pattern reflects the assembly.
  static CsrMatrix from_triplets(Index nrows, Index ncols, std::span<const Triplet> triplets,
                                 bool symmetric = false);
  static CsrMatrix identity(Index n);

  Index rows() const noexcept { return nrows_; }
  Index cols() const noexcept { return ncols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }
  bool is_symmetric() const noexcept { return symmetric_; }

  std::span<const Index> row_offsets() const noexcept { return row_offsets_; }
  std::span<const Index> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  std::span<const Index> row_cols(Index i) const noexcept {
    return {col_indices_.data() + row_offsets_[i],
            static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i])};
  }
  std::span<const double> row_values(Index i) const noexcept {
    return {values_.data() + row_offsets_[i],
            static_cast<std::size_t>(row_offsets_[i + 1] - row_offsets_[i])};
  }

  /// Entry lookup by binary search; zero when not stored.
  double at(Index i, Index j) const;
  double max_abs() const noexcept;

  /// Returns a copy with the symmetric flag set, after checking that for every
  /// stored (i,j,v) there is (j,i,v') with |v - v'| <= tol * max|values|.
  CsrMatrix as_symmetric(double tol = 1e-12) const;

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> row_offsets_;
  std::vector<Index> col_indices_;
  std::vector<double> values_;
  bool symmetric_ = false;
};

/// y = A x.
std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x);
/// y = A x into a caller-provided buffer (no allocation).
void spmv_into(const CsrMatrix& a, std::span<const double> x, std::span<double> y);
/// y = A^T x.
std::vector<double> spmv_transpose(const CsrMatrix& a, std::span<const double> x);

CsrMatrix transpose(const CsrMatrix& a);
/// Sparse-sparse product (Gustavson).
CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b);

/// Galerkin triple product R A R^T for symmetric A. The result is exactly
/// symmetric (values averaged with the transpose) and flagged as such; entries
/// below 1e-14 * max|entry| are dropped.
CsrMatrix triple_product(const CsrMatrix& r, const CsrMatrix& a);

/// A[idx, idx] for a strictly increasing index set.
CsrMatrix extract_principal_submatrix(const CsrMatrix& a, std::span<const Index> idx);

/// True when the pattern and values are symmetric to tol * max|values|.
bool is_numerically_symmetric(const CsrMatrix& a, double tol = 1e-12);

// Small vector helpers shared across modules.
double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// sqrt(x^T A x).
double energy_norm(const CsrMatrix& a, std::span<const double> x);

}  // namespace ddg
