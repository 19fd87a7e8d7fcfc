#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ddg/cholesky.hpp"
#include "ddg/dense.hpp"
#include "ddg/partition.hpp"
#include "ddg/sparse.hpp"

namespace ddg {

/// Identifies one generating vector: a monomial in one solution component,
/// optionally masked to one material.
struct ColumnLabel {
  Index component = 0;
  /// 0 for the unmasked polynomial; m >= 1 for the polynomial times the
  /// indicator of material m.
  Index material = 0;
  std::vector<int> exponents;

  bool operator==(const ColumnLabel&) const = default;
};

/// Dense n x k generating vectors F spanning piecewise degree-p polynomials.
struct GeneratingBasis {
  DenseMatrix columns;
  int degree = 0;
  int dimension = 0;
  Index num_components = 1;
  Index num_materials = 1;
  std::vector<ColumnLabel> labels;
};

/// Exponent tuples of all monomials of total degree <= degree in `dimension`
/// variables, graded lexicographic (lower degree first; x before y before z).
std::vector<std::vector<int>> graded_monomials(int dimension, int degree);

/// Evaluates monomials of the coordinates after mapping the bounding box of
/// `coords` affinely onto [-1, 1]^d. With `num_components` > 1 the rows are
/// interleaved dofs (node-major). A non-empty `material_of_node` adds, for
/// every material m >= 1, a copy of the columns masked to nodes of material m.
GeneratingBasis build_generating_basis(const DenseMatrix& coords, int degree,
                                       Index num_components = 1,
                                       std::span<const Index> material_of_node = {});

struct Restriction {
  /// R0: rows grouped by part, orthonormal, each row supported in one part.
  CsrMatrix matrix;
  /// Number of rows kept for each part.
  std::vector<Index> block_ranks;
  /// First row of each part's block; size num_parts + 1.
  std::vector<Index> block_offsets;
  /// Columns of F discarded by the rank test, per part.
  std::vector<std::vector<Index>> dropped_columns;
};

Restriction build_restriction(const DenseMatrix& generators, const Partition& part,
                              double rank_tol = kDefaultRankTol);

/// Coarse space: restriction R0, Galerkin matrix A0 = R0 A R0^T, and the
/// factor of A0 (omitted when the coarse problem is solved by a nested level).
struct CoarseSpace {
  Restriction restriction;
  CsrMatrix coarse_matrix;
  std::optional<CholeskyFactor> coarse_factor;
  Partition partition;

  Index rank() const noexcept { return restriction.matrix.rows(); }
  Index fine_size() const noexcept { return restriction.matrix.cols(); }
  /// Part owning coarse row `row`.
  Index block_of(Index row) const;
};

CoarseSpace build_coarse_space(const CsrMatrix& a, const DenseMatrix& generators,
                               const Partition& part, double rank_tol = kDefaultRankTol,
                               bool factorize = true);

/// R0^T A0^{-1} R0 r.
std::vector<double> coarse_correct(const CoarseSpace& cs, std::span<const double> r);

/// F0 = R0 F, keeping F's labels.
GeneratingBasis coarsen_generators(const CoarseSpace& cs, const GeneratingBasis& generators);
DenseMatrix coarsen_generators(const CoarseSpace& cs, const DenseMatrix& generators);

/// ||R0^T u0 - reference||_A with A0 u0 = R0 f.
double coarse_solution_error(const CsrMatrix& a, std::span<const double> f, const CoarseSpace& cs,
                             std::span<const double> reference);

}  // namespace ddg
