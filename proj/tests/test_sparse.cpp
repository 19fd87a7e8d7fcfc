#include <gtest/gtest.h>

#include <sstream>

#include "ddg/cholesky.hpp"
#include "ddg/dense.hpp"
#include "ddg/errors.hpp"
#include "ddg/matrix_market.hpp"
#include "ddg/sparse.hpp"
#include "oracle.hpp"

using namespace ddg;
using oracle::dense;

namespace {

double rel_err(const Eigen::VectorXd& x, const Eigen::VectorXd& ref) {
  const double s = ref.norm();
  return (x - ref).norm() / (s > 0 ? s : 1.0);
}

}  // namespace

TEST(Csr, CanonicalFormSumsDuplicates) {
  const std::vector<Triplet> t{{1, 0, 2.0}, {0, 1, 1.0}, {1, 0, 3.0}, {0, 0, -1.0}};
  const auto a = CsrMatrix::from_triplets(2, 2, t);
  EXPECT_EQ(a.nnz(), 3);
  EXPECT_DOUBLE_EQ(a.at(1, 0), 5.0);
  EXPECT_DOUBLE_EQ(a.at(1, 1), 0.0);
  EXPECT_EQ(a.row_cols(0)[0], 0);
  EXPECT_EQ(a.row_cols(0)[1], 1);
}

TEST(Csr, RejectsUnsortedColumns) {
  EXPECT_THROW(CsrMatrix(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), InvalidArgument);
  EXPECT_THROW(CsrMatrix(1, 3, {0, 2}, {1, 1}, {1.0, 1.0}), InvalidArgument);
}

TEST(Spmv, Identity) {
  const auto y = spmv(CsrMatrix::identity(3), std::vector<double>{1, 2, 3});
  EXPECT_EQ(y, (std::vector<double>{1, 2, 3}));
}

TEST(Spmv, LaplacianOnConstant) {
  const auto y = spmv(oracle::laplacian_1d(3), std::vector<double>{1, 1, 1});
  EXPECT_EQ(y, (std::vector<double>{1, 0, 1}));
}

TEST(Spmv, Random20MatchesDense) {
  std::mt19937_64 rng(20);
  const Eigen::MatrixXd m = oracle::random_sparse_dense(20, 20, 0.2, rng);
  const auto x = oracle::random_vector(20, rng);
  const auto y = spmv(oracle::to_csr(m), x);
  EXPECT_LE(rel_err(oracle::vec(y), m * oracle::vec(x)), 1e-13);
}

TEST(Spmv, PropertyAllSmallShapesMatchDense) {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> dim(1, 64);
    std::uniform_real_distribution<double> dens(0.0, 0.5);
    const Index r = dim(rng), c = dim(rng);
    const Eigen::MatrixXd m = oracle::random_sparse_dense(r, c, dens(rng), rng);
    const auto a = oracle::to_csr(m);
    const auto x = oracle::random_vector(c, rng);
    const auto y = spmv(a, x);
    EXPECT_LE(rel_err(oracle::vec(y), m * oracle::vec(x)), 1e-13) << "seed " << seed;
    const auto xt = oracle::random_vector(r, rng);
    EXPECT_LE(rel_err(oracle::vec(spmv_transpose(a, xt)), m.transpose() * oracle::vec(xt)), 1e-13);
  }
}

TEST(Multiply, MatchesDense) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd a = oracle::random_sparse_dense(15, 12, 0.3, rng);
  const Eigen::MatrixXd b = oracle::random_sparse_dense(12, 9, 0.3, rng);
  const auto c = multiply(oracle::to_csr(a), oracle::to_csr(b));
  EXPECT_LE(oracle::max_abs(dense(c) - a * b), 1e-14);
  EXPECT_LE(oracle::max_abs(dense(transpose(oracle::to_csr(a))) - a.transpose()), 0.0);
}

TEST(TripleProduct, IdentityRestrictionGivesA) {
  const auto a = oracle::laplacian_2d(4);
  const auto out = triple_product(CsrMatrix::identity(16), a);
  EXPECT_EQ(dense(out), dense(a));
  EXPECT_TRUE(out.is_symmetric());
}

TEST(TripleProduct, ConstantRowOnLaplacian) {
  std::vector<Triplet> t;
  for (Index j = 0; j < 4; ++j) t.push_back({0, j, 0.5});
  const auto r = CsrMatrix::from_triplets(1, 4, t);
  const auto out = triple_product(r, oracle::laplacian_1d(4));
  ASSERT_EQ(out.rows(), 1);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(4);
  const double expected = ones.dot(dense(oracle::laplacian_1d(4)) * ones) / 4.0;
  EXPECT_NEAR(out.at(0, 0), expected, 1e-15);
  EXPECT_NEAR(out.at(0, 0), 0.5, 1e-15);
}

TEST(TripleProduct, OrthonormalRowsMatchDense) {
  std::mt19937_64 rng(8);
  // 8 rows on disjoint supports of a 20-vector, each normalized.
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(8, 20);
  std::vector<Index> perm(20);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::normal_distribution<double> g;
  for (Index k = 0; k < 20; ++k) r(k % 8, perm[k]) = g(rng);
  for (Index i = 0; i < 8; ++i) r.row(i).normalize();
  ASSERT_LE(oracle::max_abs(r * r.transpose() - Eigen::MatrixXd::Identity(8, 8)), 1e-14);
  const Eigen::MatrixXd a = oracle::random_spd(20, 0.2, rng);
  const auto out = triple_product(oracle::to_csr(r), oracle::to_csr(a, true));
  const Eigen::MatrixXd ref = r * a * r.transpose();
  EXPECT_LE(oracle::max_abs(dense(out) - ref) / oracle::max_abs(ref), 1e-12);
}

TEST(TripleProduct, PropertySymmetricAndPsdPreserving) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Index> dim(2, 200);
    const Index n = dim(rng);
    const Index k = std::uniform_int_distribution<Index>(1, n)(rng);
    // PSD but singular A: B^T B with a short B.
    const Eigen::MatrixXd b = oracle::random_sparse_dense(std::max<Index>(1, n / 2), n, 0.1, rng);
    const Eigen::MatrixXd a = b.transpose() * b;
    // Orthonormal rows with general (overlapping) supports.
    const Eigen::MatrixXd g = oracle::random_sparse_dense(n, k, 0.3, rng) + Eigen::MatrixXd::Identity(n, k);
    const Eigen::MatrixXd r = oracle::orth(g, 1e-12).transpose();
    const auto out = triple_product(oracle::to_csr(r), oracle::to_csr(a, true));
    const Eigen::MatrixXd d = dense(out);
    // exact pattern and value symmetry
    EXPECT_TRUE(is_numerically_symmetric(out, 0.0)) << "seed " << seed;
    EXPECT_EQ(d, d.transpose());
    const double amax = std::max(oracle::max_abs(a), 1e-300);
    const Eigen::MatrixXd ref = r * a * r.transpose();
    EXPECT_LE(oracle::max_abs(d - ref), 1e-12 * amax * n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * a.norm()) << "seed " << seed;
  }
}

TEST(Submatrix, AllRowsGivesA) {
  const auto a = oracle::laplacian_2d(3);
  std::vector<Index> idx(9);
  std::iota(idx.begin(), idx.end(), 0);
  EXPECT_EQ(dense(extract_principal_submatrix(a, idx)), dense(a));
}

TEST(Submatrix, LaplacianBlock) {
  const std::vector<Index> idx{1, 2};
  const auto s = extract_principal_submatrix(oracle::laplacian_1d(5), idx);
  Eigen::MatrixXd ref(2, 2);
  ref << 2, -1, -1, 2;
  EXPECT_EQ(dense(s), ref);
}

TEST(Submatrix, RandomMatchesDenseSlice) {
  std::mt19937_64 rng(30);
  Eigen::MatrixXd m = oracle::random_sparse_dense(30, 30, 0.3, rng);
  m = m + m.transpose().eval();
  std::vector<Index> all(30);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  std::vector<Index> idx(all.begin(), all.begin() + 12);
  std::sort(idx.begin(), idx.end());
  const auto s = extract_principal_submatrix(oracle::to_csr(m, true), idx);
  Eigen::MatrixXd ref(12, 12);
  for (Index i = 0; i < 12; ++i) {
    for (Index j = 0; j < 12; ++j) ref(i, j) = m(idx[i], idx[j]);
  }
  EXPECT_EQ(dense(s), ref);
}

TEST(Submatrix, RejectsUnsortedIndex) {
  const std::vector<Index> idx{2, 1};
  EXPECT_THROW(extract_principal_submatrix(oracle::laplacian_1d(5), idx), InvalidArgument);
}

TEST(Cholesky, ScaledIdentity) {
  const auto f = CholeskyFactor::factorize(oracle::to_csr(2.0 * Eigen::MatrixXd::Identity(2, 2), true));
  const auto x = f.solve(std::vector<double>{4, 6});
  EXPECT_DOUBLE_EQ(x[0], 2.0);
  EXPECT_DOUBLE_EQ(x[1], 3.0);
}

TEST(Cholesky, TwoByTwo) {
  Eigen::MatrixXd a(2, 2);
  a << 4, 2, 2, 3;
  const Eigen::VectorXd ref = a.llt().solve(Eigen::Vector2d(8, 7));
  const auto x = CholeskyFactor::factorize(oracle::to_csr(a, true)).solve(std::vector<double>{8, 7});
  EXPECT_NEAR(x[0], 1.25, 1e-15);
  EXPECT_NEAR(x[1], 1.5, 1e-15);
  EXPECT_NEAR(x[0], ref(0), 1e-15);
}

TEST(Cholesky, SingularNeumannLaplacianRejected) {
  for (Index n : {5, 200}) {
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) {
      t.push_back({i, i, (i == 0 || i == n - 1) ? 1.0 : 2.0});
      if (i > 0) t.push_back({i, i - 1, -1.0});
      if (i + 1 < n) t.push_back({i, i + 1, -1.0});
    }
    const auto a = CsrMatrix::from_triplets(n, n, t, true);
    EXPECT_THROW(CholeskyFactor::factorize(a), NotPositiveDefinite) << n;
  }
}

TEST(Cholesky, IndefiniteReportsPivot) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 3);
  a(2, 2) = -1.0;
  try {
    CholeskyFactor::factorize(oracle::to_csr(a, true));
    FAIL();
  } catch (const NotPositiveDefinite& e) {
    EXPECT_EQ(e.pivot(), 2);
  }
}

TEST(Cholesky, PropertyResidualOnConditionedSpd) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const Index n = std::uniform_int_distribution<Index>(2, 120)(rng);
    const double kappa = std::pow(10.0, std::uniform_real_distribution<double>(0.0, 8.0)(rng));
    const Eigen::MatrixXd a = oracle::spd_with_condition(n, kappa, rng);
    const Eigen::MatrixXd as = 0.5 * (a + a.transpose());
    // manufactured rhs; for an arbitrary b the rounding of x alone leaves a
    // residual near eps * kappa / sqrt(n)
    const auto b = oracle::stdvec(as * oracle::vec(oracle::random_vector(n, rng)));
    for (Index threshold : {Index{0}, n}) {
      const auto f = CholeskyFactor::factorize(oracle::to_csr(as, true), threshold);
      const auto x = f.solve(b);
      const double res = (as * oracle::vec(x) - oracle::vec(b)).norm() / oracle::vec(b).norm();
      EXPECT_LE(res, 1e-10) << "seed " << seed << " kappa " << kappa << " threshold " << threshold;
    }
  }
}

TEST(Cholesky, SparsePathOnGridMatchesDense) {
  const auto a = oracle::laplacian_2d(20);
  const auto f = CholeskyFactor::factorize(a);
  EXPECT_EQ(f.kind(), CholeskyFactor::Kind::sparse);
  std::mt19937_64 rng(1);
  const auto b = oracle::random_vector(a.rows(), rng);
  const Eigen::VectorXd ref = dense(a).llt().solve(oracle::vec(b));
  EXPECT_LE(rel_err(oracle::vec(f.solve(b)), ref), 1e-12);
  // fill stays far below dense
  EXPECT_LT(f.factor_nnz(), a.rows() * a.rows() / 8);
}

TEST(Qr, DuplicateColumnsDropped) {
  DenseMatrix m(3, 2, {1, 2, 3, 1, 2, 3});
  const auto r = qr_orthonormalize(m);
  EXPECT_EQ(r.q.cols(), 1);
  EXPECT_EQ(r.kept, (std::vector<Index>{0}));
}

TEST(Qr, OnesColumnNormalized) {
  const auto r = qr_orthonormalize(DenseMatrix(4, 1, {1, 1, 1, 1}));
  ASSERT_EQ(r.q.cols(), 1);
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(std::abs(r.q(i, 0)), 0.5);
}

TEST(Qr, RandomFullRankReconstructs) {
  std::mt19937_64 rng(50);
  Eigen::MatrixXd m(50, 6);
  std::normal_distribution<double> g;
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  const auto r = qr_orthonormalize(oracle::to_ddg(m));
  ASSERT_EQ(r.q.cols(), 6);
  const Eigen::MatrixXd q = dense(r.q);
  EXPECT_LE(oracle::max_abs(q.transpose() * q - Eigen::MatrixXd::Identity(6, 6)), 1e-12);
  EXPECT_LE((m - q * (q.transpose() * m)).norm() / m.norm(), 1e-10);
}

TEST(Qr, PropertyOrthonormalAndSpanning) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    const Index n = std::uniform_int_distribution<Index>(1, 40)(rng);
    const Index k = std::uniform_int_distribution<Index>(1, 12)(rng);
    const Index rank = std::uniform_int_distribution<Index>(1, std::min(n, k))(rng);
    Eigen::MatrixXd a(n, rank), b(rank, k);
    std::normal_distribution<double> g;
    for (Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
    for (Index i = 0; i < b.size(); ++i) b.data()[i] = g(rng);
    const Eigen::MatrixXd m = a * b;
    const auto r = qr_orthonormalize(oracle::to_ddg(m));
    const Eigen::MatrixXd q = dense(r.q);
    EXPECT_EQ(q.cols(), rank) << "seed " << seed;
    EXPECT_LE(oracle::max_abs(q.transpose() * q - Eigen::MatrixXd::Identity(q.cols(), q.cols())), 1e-12);
    EXPECT_LE((m - q * (q.transpose() * m)).norm(), 1e-9 * m.norm());
  }
}

TEST(Tridiagonal, EigenvaluesMatchDense) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  const Index n = 30;
  std::vector<double> d(n), e(n - 1);
  for (auto& x : d) x = g(rng);
  for (auto& x : e) x = g(rng);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i) t(i, i) = d[i];
  for (Index i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = e[i];
  const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t).eigenvalues();
  const auto ev = tridiagonal_eigenvalues(d, e);
  ASSERT_EQ(static_cast<Index>(ev.size()), n);
  for (Index i = 0; i < n; ++i) EXPECT_NEAR(ev[i], ref(i), 1e-12);
}

TEST(MatrixMarket, SymmetricRoundTrip) {
  const auto a = oracle::laplacian_2d(5);
  std::stringstream ss;
  mm::write_coordinate(ss, a);
  EXPECT_NE(ss.str().find("symmetric"), std::string::npos);
  const auto b = mm::read_coordinate(ss);
  EXPECT_TRUE(b.is_symmetric());
  EXPECT_EQ(dense(a), dense(b));
}

TEST(MatrixMarket, GeneralAndArrayRoundTrip) {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd m = oracle::random_sparse_dense(7, 5, 0.4, rng);
  std::stringstream ss;
  mm::write_coordinate(ss, oracle::to_csr(m));
  EXPECT_EQ(dense(mm::read_coordinate(ss)), m);
  std::stringstream sa;
  mm::write_array(sa, oracle::to_ddg(m));
  EXPECT_EQ(dense(mm::read_array(sa)), m);
}

TEST(MatrixMarket, MalformedInputRejected) {
  std::stringstream bad("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n");
  EXPECT_THROW(mm::read_coordinate(bad), ParseError);
  std::stringstream nobanner("2 2 1\n1 1 1.0\n");
  EXPECT_THROW(mm::read_coordinate(nobanner), ParseError);
}

TEST(MatrixMarket, SymmetricFileExpandsBothTriangles) {
  std::stringstream ss("%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n2 1 -1.0\n");
  const auto a = mm::read_coordinate(ss);
  EXPECT_DOUBLE_EQ(a.at(0, 1), -1.0);
  EXPECT_DOUBLE_EQ(a.at(1, 0), -1.0);
}
