#include "ddg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ddg {

namespace {

void require_same(Index expected, Index got, const char* what) {
  if (expected != got) {
    throw DimensionError(std::string(what) + ": expected " + std::to_string(expected) + ", got " +
                         std::to_string(got));
  }
}

}  // namespace

CsrMatrix::CsrMatrix(Index nrows, Index ncols, std::vector<Index> row_offsets,
                     std::vector<Index> col_indices, std::vector<double> values, bool symmetric)
    : nrows_(nrows),
      ncols_(ncols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)),
      symmetric_(symmetric) {
  if (nrows_ < 0 || ncols_ < 0) throw InvalidArgument("CsrMatrix: negative dimension");
  if (static_cast<Index>(row_offsets_.size()) != nrows_ + 1) {
    throw InvalidArgument("CsrMatrix: row_offsets must have nrows+1 entries");
  }
  if (row_offsets_.front() != 0 || row_offsets_.back() != static_cast<Index>(col_indices_.size()) ||
      col_indices_.size() != values_.size()) {
    throw InvalidArgument("CsrMatrix: inconsistent array lengths");
  }
  for (Index i = 0; i < nrows_; ++i) {
    if (row_offsets_[i + 1] < row_offsets_[i]) {
      throw InvalidArgument("CsrMatrix: row_offsets decreasing at row " + std::to_string(i));
    }
    for (Index k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const Index c = col_indices_[k];
      if (c < 0 || c >= ncols_) {
        throw InvalidArgument("CsrMatrix: column index out of range in row " + std::to_string(i));
      }
      if (k > row_offsets_[i] && col_indices_[k - 1] >= c) {
        throw InvalidArgument("CsrMatrix: row " + std::to_string(i) +
                              " is not strictly increasing in column index");
      }
    }
  }
  if (symmetric_ && nrows_ != ncols_) throw InvalidArgument("CsrMatrix: symmetric flag on non-square");
}

CsrMatrix CsrMatrix::from_triplets(Index nrows, Index ncols, std::span<const Triplet> triplets,
                                   bool symmetric) {
  std::vector<Index> counts(nrows + 1, 0);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= nrows || t.col < 0 || t.col >= ncols) {
      throw InvalidArgument("from_triplets: entry (" + std::to_string(t.row) + "," +
                            std::to_string(t.col) + ") out of range");
    }
    ++counts[t.row + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  std::vector<Index> cols(triplets.size());
  std::vector<double> vals(triplets.size());
  std::vector<Index> cursor(counts.begin(), counts.end() - 1);
  for (const auto& t : triplets) {
    const Index k = cursor[t.row]++;
    cols[k] = t.col;
    vals[k] = t.value;
  }

  std::vector<Index> offsets(nrows + 1, 0);
  std::vector<Index> out_cols;
  std::vector<double> out_vals;
  out_cols.reserve(triplets.size());
  out_vals.reserve(triplets.size());
  std::vector<Index> order;
  for (Index i = 0; i < nrows; ++i) {
    const Index begin = counts[i];
    const Index end = counts[i + 1];
    order.resize(end - begin);
    std::iota(order.begin(), order.end(), begin);
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return cols[a] < cols[b]; });
    for (std::size_t k = 0; k < order.size(); ++k) {
      const Index src = order[k];
      if (k > 0 && cols[src] == out_cols.back()) {
        out_vals.back() += vals[src];
      } else {
        out_cols.push_back(cols[src]);
        out_vals.push_back(vals[src]);
      }
    }
    offsets[i + 1] = static_cast<Index>(out_cols.size());
  }
  return CsrMatrix(nrows, ncols, std::move(offsets), std::move(out_cols), std::move(out_vals),
                   symmetric);
}

CsrMatrix CsrMatrix::identity(Index n) {
  std::vector<Index> offsets(n + 1);
  std::iota(offsets.begin(), offsets.end(), Index{0});
  std::vector<Index> cols(n);
  std::iota(cols.begin(), cols.end(), Index{0});
  return CsrMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0), true);
}

double CsrMatrix::at(Index i, Index j) const {
  if (i < 0 || i >= nrows_ || j < 0 || j >= ncols_) throw DimensionError("CsrMatrix::at out of range");
  const auto cols = row_cols(i);
  const auto it = std::lower_bound(cols.begin(), cols.end(), j);
  if (it == cols.end() || *it != j) return 0.0;
  return values_[row_offsets_[i] + (it - cols.begin())];
}

double CsrMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

CsrMatrix CsrMatrix::as_symmetric(double tol) const {
  if (!is_numerically_symmetric(*this, tol)) {
    throw InvalidArgument("as_symmetric: matrix is not symmetric to tolerance");
  }
  CsrMatrix copy = *this;
  copy.symmetric_ = true;
  return copy;
}

bool is_numerically_symmetric(const CsrMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = tol * a.max_abs();
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const Index j = cols[k];
      const auto other = a.row_cols(j);
      const auto it = std::lower_bound(other.begin(), other.end(), i);
      if (it == other.end() || *it != i) {
        if (std::abs(vals[k]) > scale) return false;
        continue;
      }
      if (std::abs(vals[k] - a.row_values(j)[it - other.begin()]) > scale) return false;
    }
  }
  return true;
}

void spmv_into(const CsrMatrix& a, std::span<const double> x, std::span<double> y) {
  require_same(a.cols(), static_cast<Index>(x.size()), "spmv: x length vs matrix columns");
  require_same(a.rows(), static_cast<Index>(y.size()), "spmv: y length vs matrix rows");
  const auto offsets = a.row_offsets();
  const auto cols = a.col_indices();
  const auto vals = a.values();
  for (Index i = 0; i < a.rows(); ++i) {
    double sum = 0.0;
    for (Index k = offsets[i]; k < offsets[i + 1]; ++k) sum += vals[k] * x[cols[k]];
    y[i] = sum;
  }
}

std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows());
  spmv_into(a, x, y);
  return y;
}

std::vector<double> spmv_transpose(const CsrMatrix& a, std::span<const double> x) {
  require_same(a.rows(), static_cast<Index>(x.size()), "spmv_transpose: x length vs matrix rows");
  std::vector<double> y(a.cols(), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) y[cols[k]] += vals[k] * x[i];
  }
  return y;
}

CsrMatrix transpose(const CsrMatrix& a) {
  std::vector<Index> offsets(a.cols() + 1, 0);
  for (Index c : a.col_indices()) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<Index> cursor(offsets.begin(), offsets.end() - 1);
  std::vector<Index> cols(a.nnz());
  std::vector<double> vals(a.nnz());
  // Rows are visited in increasing order, so each output row comes out sorted.
  for (Index i = 0; i < a.rows(); ++i) {
    const auto rc = a.row_cols(i);
    const auto rv = a.row_values(i);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const Index dst = cursor[rc[k]]++;
      cols[dst] = i;
      vals[dst] = rv[k];
    }
  }
  return CsrMatrix(a.cols(), a.rows(), std::move(offsets), std::move(cols), std::move(vals),
                   a.is_symmetric());
}

CsrMatrix multiply(const CsrMatrix& a, const CsrMatrix& b) {
  require_same(a.cols(), b.rows(), "multiply: inner dimension");
  std::vector<Index> offsets(a.rows() + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  std::vector<double> accum(b.cols(), 0.0);
  std::vector<Index> marker(b.cols(), -1);
  std::vector<Index> row_pattern;
  for (Index i = 0; i < a.rows(); ++i) {
    row_pattern.clear();
    const auto ac = a.row_cols(i);
    const auto av = a.row_values(i);
    for (std::size_t ka = 0; ka < ac.size(); ++ka) {
      const auto bc = b.row_cols(ac[ka]);
      const auto bv = b.row_values(ac[ka]);
      for (std::size_t kb = 0; kb < bc.size(); ++kb) {
        const Index j = bc[kb];
        if (marker[j] != i) {
          marker[j] = i;
          accum[j] = 0.0;
          row_pattern.push_back(j);
        }
        accum[j] += av[ka] * bv[kb];
      }
    }
    std::sort(row_pattern.begin(), row_pattern.end());
    for (Index j : row_pattern) {
      cols.push_back(j);
      vals.push_back(accum[j]);
    }
    offsets[i + 1] = static_cast<Index>(cols.size());
  }
  return CsrMatrix(a.rows(), b.cols(), std::move(offsets), std::move(cols), std::move(vals));
}

CsrMatrix triple_product(const CsrMatrix& r, const CsrMatrix& a) {
  require_same(a.rows(), r.cols(), "triple_product: R columns vs A rows");
  require_same(a.rows(), a.cols(), "triple_product: A must be square");
  const CsrMatrix ra = multiply(r, a);
  const CsrMatrix rar = multiply(ra, transpose(r));
  const CsrMatrix rar_t = transpose(rar);

  const double cutoff = 1e-14 * rar.max_abs();
  std::vector<Index> offsets(rar.rows() + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(rar.nnz());
  vals.reserve(rar.nnz());
  for (Index i = 0; i < rar.rows(); ++i) {
    // Merge row i of C and row i of C^T, averaging to enforce exact symmetry.
    const auto c1 = rar.row_cols(i);
    const auto v1 = rar.row_values(i);
    const auto c2 = rar_t.row_cols(i);
    const auto v2 = rar_t.row_values(i);
    std::size_t k1 = 0;
    std::size_t k2 = 0;
    while (k1 < c1.size() || k2 < c2.size()) {
      Index j;
      double v;
      if (k2 == c2.size() || (k1 < c1.size() && c1[k1] < c2[k2])) {
        j = c1[k1];
        v = 0.5 * v1[k1++];
      } else if (k1 == c1.size() || c2[k2] < c1[k1]) {
        j = c2[k2];
        v = 0.5 * v2[k2++];
      } else {
        j = c1[k1];
        v = 0.5 * (v1[k1++] + v2[k2++]);
      }
      if (std::abs(v) > cutoff || i == j) {
        cols.push_back(j);
        vals.push_back(v);
      }
    }
    offsets[i + 1] = static_cast<Index>(cols.size());
  }
  return CsrMatrix(rar.rows(), rar.cols(), std::move(offsets), std::move(cols), std::move(vals),
                   true);
}

CsrMatrix extract_principal_submatrix(const CsrMatrix& a, std::span<const Index> idx) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] < 0 || idx[k] >= a.rows() || idx[k] >= a.cols()) {
      throw InvalidArgument("extract_principal_submatrix: index " + std::to_string(idx[k]) +
                            " out of range");
    }
    if (k > 0 && idx[k - 1] >= idx[k]) {
      throw InvalidArgument("extract_principal_submatrix: index set must be strictly increasing");
    }
  }
  const Index m = static_cast<Index>(idx.size());
  std::vector<Index> offsets(m + 1, 0);
  std::vector<Index> cols;
  std::vector<double> vals;
  for (Index r = 0; r < m; ++r) {
    const auto rc = a.row_cols(idx[r]);
    const auto rv = a.row_values(idx[r]);
    // Both lists are sorted, so the search window only moves forward.
    auto lo = idx.begin();
    for (std::size_t k = 0; k < rc.size(); ++k) {
      lo = std::lower_bound(lo, idx.end(), rc[k]);
      if (lo == idx.end()) break;
      if (*lo == rc[k]) {
        cols.push_back(lo - idx.begin());
        vals.push_back(rv[k]);
      }
    }
    offsets[r + 1] = static_cast<Index>(cols.size());
  }
  return CsrMatrix(m, m, std::move(offsets), std::move(cols), std::move(vals), a.is_symmetric());
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same(static_cast<Index>(a.size()), static_cast<Index>(b.size()), "dot: lengths");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double energy_norm(const CsrMatrix& a, std::span<const double> x) {
  const auto ax = spmv(a, x);
  return std::sqrt(std::max(0.0, dot(x, ax)));
}

}  // namespace ddg
