#include "ddg/coarse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ddg {

namespace {

void append_monomials(int dimension, int degree, int var, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
  if (var == dimension - 1) {
    current[var] = degree;
    out.push_back(current);
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[var] = e;
    append_monomials(dimension, degree - e, var + 1, current, out);
  }
}

}  // namespace

std::vector<std::vector<int>> graded_monomials(int dimension, int degree) {
  if (dimension < 1) throw InvalidArgument("graded_monomials: dimension must be positive");
  if (degree < 0) throw InvalidArgument("graded_monomials: degree must be non-negative");
  std::vector<std::vector<int>> out;
  std::vector<int> current(dimension, 0);
  for (int t = 0; t <= degree; ++t) append_monomials(dimension, t, 0, current, out);
  return out;
}

GeneratingBasis build_generating_basis(const DenseMatrix& coords, int degree, Index num_components,
                                       std::span<const Index> material_of_node) {
  const Index nodes = coords.rows();
  const int d = static_cast<int>(coords.cols());
  if (num_components < 1) throw InvalidArgument("build_generating_basis: need at least one component");
  if (!material_of_node.empty() && static_cast<Index>(material_of_node.size()) != nodes) {
    throw DimensionError("build_generating_basis: material array length differs from node count");
  }
  Index num_materials = 1;
  for (Index m : material_of_node) {
    if (m < 0) throw InvalidArgument("build_generating_basis: negative material id");
    num_materials = std::max(num_materials, m + 1);
  }

  // Affine map of the bounding box onto [-1, 1]^d.
  std::vector<std::vector<double>> scaled(d, std::vector<double>(nodes));
  for (int k = 0; k < d; ++k) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index v = 0; v < nodes; ++v) {
      if (!std::isfinite(coords(v, k))) throw InvalidArgument("build_generating_basis: non-finite coordinate");
      lo = std::min(lo, coords(v, k));
      hi = std::max(hi, coords(v, k));
    }
    for (Index v = 0; v < nodes; ++v) {
      scaled[k][v] = hi > lo ? 2.0 * (coords(v, k) - lo) / (hi - lo) - 1.0 : 0.0;
    }
  }

  const auto monomials = graded_monomials(d, degree);
  GeneratingBasis basis;
  basis.degree = degree;
  basis.dimension = d;
  basis.num_components = num_components;
  basis.num_materials = num_materials;
  const Index k = num_materials * num_components * static_cast<Index>(monomials.size());
  basis.columns = DenseMatrix(nodes * num_components, k);

  Index col = 0;
  for (Index m = 0; m < num_materials; ++m) {
    for (Index c = 0; c < num_components; ++c) {
      for (const auto& alpha : monomials) {
        for (Index v = 0; v < nodes; ++v) {
          double x = 1.0;
          for (int dim = 0; dim < d; ++dim) {
            for (int e = 0; e < alpha[dim]; ++e) x *= scaled[dim][v];
          }
          if (m > 0 && material_of_node[v] != m) x = 0.0;
          basis.columns(v * num_components + c, col) = x;
        }
        basis.labels.push_back({c, m, alpha});
        ++col;
      }
    }
  }
  return basis;
}

Restriction build_restriction(const DenseMatrix& generators, const Partition& part, double rank_tol) {
  if (generators.rows() != part.size()) {
    throw DimensionError("build_restriction: generators have " + std::to_string(generators.rows()) +
                         " rows but the partition covers " + std::to_string(part.size()) + " nodes");
  }
  const auto parts = part.parts();
  const Index k = generators.cols();
  Restriction out;
  out.block_offsets.assign(1, 0);
  std::vector<Index> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  for (Index p = 0; p < part.num_parts; ++p) {
    const auto& members = parts[p];
    DenseMatrix block(static_cast<Index>(members.size()), k);
    bool any_nonzero = false;
    for (Index j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        const double v = generators(members[i], j);
        block(static_cast<Index>(i), j) = v;
        any_nonzero = any_nonzero || v != 0.0;
      }
    }
    if (!any_nonzero || members.empty()) {
      throw InvalidArgument("build_restriction: generating vectors vanish on part " + std::to_string(p));
    }
    const auto qr = qr_orthonormalize(block, rank_tol);
    std::vector<Index> dropped;
    for (Index j = 0, q = 0; j < k; ++j) {
      if (q < static_cast<Index>(qr.kept.size()) && qr.kept[q] == j) {
        ++q;
      } else {
        dropped.push_back(j);
      }
    }
    for (Index j = 0; j < qr.q.cols(); ++j) {
      for (std::size_t i = 0; i < members.size(); ++i) {
        const double v = qr.q(static_cast<Index>(i), j);
        if (v == 0.0) continue;  // other components of vector problems, other materials
        cols.push_back(members[i]);
        vals.push_back(v);
      }
      offsets.push_back(static_cast<Index>(cols.size()));
    }
    out.block_ranks.push_back(qr.q.cols());
    out.block_offsets.push_back(out.block_offsets.back() + qr.q.cols());
    out.dropped_columns.push_back(std::move(dropped));
  }
  const Index rows = out.block_offsets.back();
  out.matrix = CsrMatrix(rows, part.size(), std::move(offsets), std::move(cols), std::move(vals));
  return out;
}

Index CoarseSpace::block_of(Index row) const {
  const auto& off = restriction.block_offsets;
  return static_cast<Index>(std::upper_bound(off.begin(), off.end(), row) - off.begin()) - 1;
}

CoarseSpace build_coarse_space(const CsrMatrix& a, const DenseMatrix& generators, const Partition& part,
                               double rank_tol, bool factorize) {
  if (a.rows() != a.cols() || a.rows() != generators.rows()) {
    throw DimensionError("build_coarse_space: matrix and generators disagree in size");
  }
  CoarseSpace cs;
  cs.partition = part;
  cs.restriction = build_restriction(generators, part, rank_tol);
  cs.coarse_matrix = triple_product(cs.restriction.matrix, a);

  // Block sparsity of A0 must sit inside the subdomain adjacency pattern.
  const CsrMatrix adjacency = subdomain_adjacency(part, a);
  for (Index i = 0; i < cs.coarse_matrix.rows(); ++i) {
    const Index bi = cs.block_of(i);
    for (Index j : cs.coarse_matrix.row_cols(i)) {
      const Index bj = cs.block_of(j);
      const auto adj = adjacency.row_cols(bi);
      if (!std::binary_search(adj.begin(), adj.end(), bj)) {
        throw Error("build_coarse_space: coarse coupling between non-adjacent parts " +
                    std::to_string(bi) + " and " + std::to_string(bj));
      }
    }
  }

  if (factorize) {
    try {
      cs.coarse_factor = CholeskyFactor::factorize(cs.coarse_matrix);
    } catch (const NotPositiveDefinite& e) {
      throw NotPositiveDefinite(e.pivot(), cs.block_of(e.pivot()));
    }
  }
  return cs;
}

std::vector<double> coarse_correct(const CoarseSpace& cs, std::span<const double> r) {
  if (!cs.coarse_factor) throw Error("coarse_correct: coarse space was built without a factorization");
  auto w = spmv(cs.restriction.matrix, r);
  w = cs.coarse_factor->solve(w);
  return spmv_transpose(cs.restriction.matrix, w);
}

DenseMatrix coarsen_generators(const CoarseSpace& cs, const DenseMatrix& generators) {
  const CsrMatrix& r0 = cs.restriction.matrix;
  if (generators.rows() != r0.cols()) throw DimensionError("coarsen_generators: size mismatch");
  DenseMatrix out(r0.rows(), generators.cols());
  for (Index j = 0; j < generators.cols(); ++j) {
    const auto col = spmv(r0, generators.col(j));
    std::copy(col.begin(), col.end(), out.col(j).begin());
  }
  return out;
}

GeneratingBasis coarsen_generators(const CoarseSpace& cs, const GeneratingBasis& generators) {
  GeneratingBasis out = generators;
  out.columns = coarsen_generators(cs, generators.columns);
  return out;
}

double coarse_solution_error(const CsrMatrix& a, std::span<const double> f, const CoarseSpace& cs,
                             std::span<const double> reference) {
  if (static_cast<Index>(reference.size()) != a.rows()) {
    throw DimensionError("coarse_solution_error: reference length mismatch");
  }
  auto e = coarse_correct(cs, f);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] -= reference[i];
  return energy_norm(a, e);
}

}  // namespace ddg
