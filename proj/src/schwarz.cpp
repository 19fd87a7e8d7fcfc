#include "ddg/schwarz.hpp"

#include <algorithm>
#include <chrono>
#include <string>

namespace ddg {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void check_size(std::span<const double> v, Index n, const char* what) {
  if (static_cast<Index>(v.size()) != n) {
    throw DimensionError(std::string(what) + ": expected length " + std::to_string(n) + ", got " +
                         std::to_string(v.size()));
  }
}

}  // namespace

SubdomainSolver::SubdomainSolver(const CsrMatrix& a, std::vector<Index> indices, InnerSolve inner)
    : indices_(std::move(indices)), inner_(inner) {
  if (indices_.empty()) throw InvalidArgument("SubdomainSolver: empty subdomain");
  CsrMatrix local = extract_principal_submatrix(a, indices_);
  if (inner_.kind == InnerSolve::Kind::cholesky) {
    factor_ = CholeskyFactor::factorize(local);
  } else {
    if (inner_.iterations < 1) throw InvalidArgument("SubdomainSolver: SSOR needs at least one iteration");
    if (!(inner_.omega > 0.0 && inner_.omega < 2.0)) throw InvalidArgument("SubdomainSolver: omega must lie in (0, 2)");
    for (Index i = 0; i < local.rows(); ++i) {
      if (!(local.at(i, i) > 0.0)) throw NotPositiveDefinite(indices_[i]);
    }
    local_ = std::move(local);
  }
}

void SubdomainSolver::solve_in_place(std::span<double> rhs, std::span<double> work) const {
  const Index n = size();
  if (factor_) {
    factor_->solve_in_place(rhs, work.first(n));
    return;
  }
  auto b = work.first(n);
  auto x = work.subspan(n, n);
  std::copy(rhs.begin(), rhs.end(), b.begin());
  std::fill(x.begin(), x.end(), 0.0);
  const double w = inner_.omega;
  auto relax = [&](Index i) {
    double s = b[i];
    double diag = 0.0;
    const auto cols = local_.row_cols(i);
    const auto vals = local_.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == i) {
        diag = vals[k];
      } else {
        s -= vals[k] * x[cols[k]];
      }
    }
    x[i] = (1.0 - w) * x[i] + w * s / diag;
  };
  for (int it = 0; it < inner_.iterations; ++it) {
    for (Index i = 0; i < n; ++i) relax(i);
    for (Index i = n - 1; i >= 0; --i) relax(i);
  }
  std::copy(x.begin(), x.end(), rhs.begin());
}

TwoLevelPreconditioner::TwoLevelPreconditioner(std::shared_ptr<const CsrMatrix> a, const OverlapSet& overlap,
                                               std::shared_ptr<const CoarseSpace> coarse, SchwarzOptions opts)
    : a_(std::move(a)), coarse_(std::move(coarse)), opts_(opts) {
  if (!a_ || a_->rows() != a_->cols()) throw DimensionError("TwoLevelPreconditioner: matrix must be square");
  if (coarse_ && coarse_->fine_size() != a_->rows()) {
    throw DimensionError("TwoLevelPreconditioner: coarse space does not match the matrix");
  }
  subdomains_.reserve(overlap.subdomains.size());
  for (std::size_t s = 0; s < overlap.subdomains.size(); ++s) {
    try {
      subdomains_.emplace_back(*a_, overlap.subdomains[s], opts_.inner);
    } catch (const NotPositiveDefinite& e) {
      throw NotPositiveDefinite(overlap.subdomains[s][e.pivot()], static_cast<Index>(s));
    }
    max_subdomain_ = std::max(max_subdomain_, subdomains_.back().size());
  }
}

int TwoLevelPreconditioner::levels() const noexcept {
  if (!coarse_) return 1;
  return next_ ? 1 + next_->levels() : 2;
}

void TwoLevelPreconditioner::set_next_level(std::unique_ptr<TwoLevelPreconditioner> next) {
  if (!coarse_) throw InvalidArgument("set_next_level: no coarse space to approximate");
  if (next && next->size() != coarse_->rank()) {
    throw DimensionError("set_next_level: nested preconditioner size differs from the coarse rank");
  }
  next_ = std::move(next);
}

void TwoLevelPreconditioner::update_residual(std::span<double> res, std::span<const double> u,
                                             std::span<const double> f, std::span<const Index> idx,
                                             std::span<const double> delta) const {
  const CsrMatrix& a = *a_;
  if (opts_.residual == ResidualMode::full) {
    spmv_into(a, u, res);
    for (std::size_t i = 0; i < res.size(); ++i) res[i] = f[i] - res[i];
    return;
  }
  // Column idx[k] of A equals row idx[k] by symmetry.
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const double dk = delta[k];
    if (dk == 0.0) continue;
    const auto cols = a.row_cols(idx[k]);
    const auto vals = a.row_values(idx[k]);
    for (std::size_t t = 0; t < cols.size(); ++t) res[cols[t]] -= vals[t] * dk;
  }
}

void TwoLevelPreconditioner::sweep(std::span<double> u, std::span<double> res, std::span<const double> f,
                                   SweepOrder order, Scratch& scratch) const {
  const Index count = static_cast<Index>(subdomains_.size());
  for (Index step = 0; step < count; ++step) {
    const auto& sd = subdomains_[order == SweepOrder::forward ? step : count - 1 - step];
    const auto idx = sd.indices();
    auto local = std::span<double>(scratch.local).first(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) local[k] = res[idx[k]];
    sd.solve_in_place(local, scratch.work);
    for (std::size_t k = 0; k < idx.size(); ++k) u[idx[k]] += local[k];
    update_residual(res, u, f, idx, local);
  }
}

void TwoLevelPreconditioner::smooth_sweep(std::span<double> u, std::span<const double> f,
                                          SweepOrder order) const {
  check_size(u, size(), "smooth_sweep");
  check_size(f, size(), "smooth_sweep");
  std::vector<double> res(size());
  spmv_into(*a_, u, res);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = f[i] - res[i];
  Scratch scratch{std::vector<double>(max_subdomain_), std::vector<double>(2 * max_subdomain_)};
  sweep(u, res, f, order, scratch);
}

void TwoLevelPreconditioner::run(std::span<const double> r, std::span<double> z, bool exact_coarse,
                                 ApplyStats* stats) const {
  const auto t0 = std::chrono::steady_clock::now();
  const Index n = size();
  check_size(r, n, "apply");
  check_size(z, n, "apply");
  std::fill(z.begin(), z.end(), 0.0);
  std::vector<double> res(r.begin(), r.end());
  Scratch scratch{std::vector<double>(max_subdomain_), std::vector<double>(2 * max_subdomain_)};

  sweep(z, res, r, SweepOrder::forward, scratch);

  if (coarse_) {
    const auto tc = std::chrono::steady_clock::now();
    const CsrMatrix& r0 = coarse_->restriction.matrix;
    auto w = spmv(r0, res);
    if (next_ && !exact_coarse) {
      w = next_->apply(w);
    } else {
      if (!coarse_->coarse_factor) throw Error("apply: coarse space has neither a factor nor a nested level");
      w = coarse_->coarse_factor->solve(w);
    }
    const auto corr = spmv_transpose(r0, w);
    for (Index i = 0; i < n; ++i) z[i] += corr[i];
    if (opts_.residual == ResidualMode::full) {
      spmv_into(*a_, z, res);
      for (Index i = 0; i < n; ++i) res[i] = r[i] - res[i];
    } else {
      const auto ac = spmv(*a_, corr);
      for (Index i = 0; i < n; ++i) res[i] -= ac[i];
    }
    if (stats) stats->coarse_seconds += seconds_since(tc);
  }

  sweep(z, res, r, SweepOrder::reverse, scratch);
  if (stats) stats->total_seconds += seconds_since(t0);
}

std::vector<double> TwoLevelPreconditioner::apply(std::span<const double> r, ApplyStats* stats) const {
  std::vector<double> z(size());
  run(r, z, false, stats);
  return z;
}

void TwoLevelPreconditioner::apply_into(std::span<const double> r, std::span<double> z, ApplyStats* stats) const {
  run(r, z, false, stats);
}

std::vector<double> TwoLevelPreconditioner::apply_exact_coarse(std::span<const double> r) const {
  std::vector<double> z(size());
  run(r, z, true, nullptr);
  return z;
}

TwoLevelPreconditioner build_one_level(std::shared_ptr<const CsrMatrix> a, const OverlapSet& overlap,
                                       SchwarzOptions opts) {
  return TwoLevelPreconditioner(std::move(a), overlap, nullptr, opts);
}

TwoLevelPreconditioner build_two_level(std::shared_ptr<const CsrMatrix> a, const DenseMatrix& generators,
                                       const Partition& part, const OverlapSet& overlap, SchwarzOptions opts,
                                       double rank_tol) {
  auto cs = std::make_shared<const CoarseSpace>(build_coarse_space(*a, generators, part, rank_tol));
  return TwoLevelPreconditioner(std::move(a), overlap, std::move(cs), opts);
}

Index second_level_parts(Index first_level_parts, double coarsening_factor, int dimension) {
  const Index parts2 = parts_for_coarsening(first_level_parts, coarsening_factor, dimension);
  if (parts2 < 2) {
    throw TooSmallForThreeLevels("three-level solver needs at least two second-level parts; " +
                                 std::to_string(first_level_parts) + " first-level parts with coarsening factor " +
                                 std::to_string(coarsening_factor) + " give " + std::to_string(parts2));
  }
  return parts2;
}

std::unique_ptr<TwoLevelPreconditioner> build_nested_level(const CsrMatrix& a, const GeneratingBasis& generators,
                                                           const CoarseSpace& cs1, double coarsening_factor,
                                                           Index delta, const ThreeLevelOptions& opts) {
  const Partition& part_fine = cs1.partition;
  const Index parts2 = second_level_parts(part_fine.num_parts, coarsening_factor, generators.dimension);

  // Group level-1 parts, then map every coarse unknown to its part's group.
  const Graph block_graph = adjacency_graph(subdomain_adjacency(part_fine, a));
  const Partition groups = graph_partition(block_graph, parts2, opts.seed);
  Partition part2;
  part2.num_parts = parts2;
  part2.assignment.resize(cs1.rank());
  for (Index row = 0; row < cs1.rank(); ++row) part2.assignment[row] = groups.assignment[cs1.block_of(row)];

  auto a0 = std::make_shared<const CsrMatrix>(cs1.coarse_matrix);
  const DenseMatrix f0 = coarsen_generators(cs1, generators.columns);
  auto cs2 = std::make_shared<const CoarseSpace>(build_coarse_space(*a0, f0, part2, opts.rank_tol, true));
  const OverlapSet overlap2 = expand_overlap(*a0, part2, delta);
  return std::make_unique<TwoLevelPreconditioner>(a0, overlap2, cs2, opts.schwarz);
}

TwoLevelPreconditioner build_three_level(std::shared_ptr<const CsrMatrix> a, const GeneratingBasis& generators,
                                         const Partition& part_fine, const OverlapSet& overlap_fine,
                                         double coarsening_factor, Index delta, ThreeLevelOptions opts) {
  second_level_parts(part_fine.num_parts, coarsening_factor, generators.dimension);
  auto cs1 = std::make_shared<CoarseSpace>(
      build_coarse_space(*a, generators.columns, part_fine, opts.rank_tol, opts.factor_first_coarse));
  auto nested = build_nested_level(*a, generators, *cs1, coarsening_factor, delta, opts);
  TwoLevelPreconditioner top(std::move(a), overlap_fine, cs1, opts.schwarz);
  top.set_next_level(std::move(nested));
  return top;
}

TwoLevelPreconditioner build_three_level(std::shared_ptr<const CsrMatrix> a, const GeneratingBasis& generators,
                                         const Partition& part_fine, double coarsening_factor, Index delta,
                                         ThreeLevelOptions opts) {
  const OverlapSet overlap = expand_overlap(*a, part_fine, delta);
  return build_three_level(std::move(a), generators, part_fine, overlap, coarsening_factor, delta, opts);
}

}  // namespace ddg
