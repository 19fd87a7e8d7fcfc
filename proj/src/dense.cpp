#include "ddg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ddg {

DenseMatrix::DenseMatrix(Index nrows, Index ncols, std::vector<double> values)
    : nrows_(nrows), ncols_(ncols), values_(std::move(values)) {
  if (static_cast<Index>(values_.size()) != nrows_ * ncols_) {
    throw DimensionError("DenseMatrix: expected " + std::to_string(nrows_ * ncols_) + " values, got " +
                         std::to_string(values_.size()));
  }
}

OrthonormalizeResult qr_orthonormalize(const DenseMatrix& m, double rank_tol) {
  if (m.rows() < 1) throw InvalidArgument("qr_orthonormalize: matrix must have at least one row");
  const Index n = m.rows();

  double largest = 0.0;
  for (Index j = 0; j < m.cols(); ++j) {
    double s = 0.0;
    for (double v : m.col(j)) s += v * v;
    largest = std::max(largest, std::sqrt(s));
  }

  std::vector<std::vector<double>> basis;
  std::vector<Index> kept;
  std::vector<double> w(n);
  if (largest > 0.0) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::copy(m.col(j).begin(), m.col(j).end(), w.begin());
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) {
          double c = 0.0;
          for (Index i = 0; i < n; ++i) c += q[i] * w[i];
          for (Index i = 0; i < n; ++i) w[i] -= c * q[i];
        }
      }
      double norm = 0.0;
      for (double v : w) norm += v * v;
      norm = std::sqrt(norm);
      if (norm < rank_tol * largest) continue;
      for (double& v : w) v /= norm;
      basis.push_back(w);
      kept.push_back(j);
    }
  }

  DenseMatrix q(n, static_cast<Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    std::copy(basis[j].begin(), basis[j].end(), q.col(static_cast<Index>(j)).begin());
  }
  return {std::move(q), std::move(kept)};
}

namespace {

// Number of eigenvalues strictly less than x.
Index sturm_count(std::span<const double> diag, std::span<const double> off, double x) {
  Index count = 0;
  double q = 1.0;
  const double tiny = std::numeric_limits<double>::min();
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const double b2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
    q = diag[i] - x - (i == 0 ? 0.0 : b2 / q);
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

}  // namespace

std::vector<double> tridiagonal_eigenvalues(std::span<const double> diag,
                                            std::span<const double> offdiag) {
  const std::size_t n = diag.size();
  if (n == 0) return {};
  if (offdiag.size() + 1 != n) {
    throw DimensionError("tridiagonal_eigenvalues: off-diagonal must have n-1 entries");
  }
  // Gershgorin interval.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(offdiag[i - 1]) : 0.0) + (i + 1 < n ? std::abs(offdiag[i]) : 0.0);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  const double span = std::max(hi - lo, std::abs(hi) + std::abs(lo));
  lo -= 1e-12 * span + std::numeric_limits<double>::min();
  hi += 1e-12 * span + std::numeric_limits<double>::min();

  std::vector<double> eig(n);
  for (std::size_t k = 0; k < n; ++k) {
    double a = lo;
    double b = hi;
    // Find x with count(x) <= k < count(b), i.e. the (k+1)-th smallest eigenvalue.
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (sturm_count(diag, offdiag, mid) > static_cast<Index>(k)) {
        b = mid;
      } else {
        a = mid;
      }
    }
    eig[k] = 0.5 * (a + b);
  }
  return eig;
}

}  // namespace ddg
