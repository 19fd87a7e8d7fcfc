#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ddg/cholesky.hpp"
#include "ddg/coarse.hpp"
#include "ddg/partition.hpp"
#include "ddg/sparse.hpp"

namespace ddg {

enum class SweepOrder { forward, reverse };

/// How the residual is kept current between subdomain updates. `incremental`
/// subtracts A[:, idx] * delta after each update (A must be symmetric);
/// `full` recomputes f - A u from scratch.
enum class ResidualMode { incremental, full };

/// Subdomain solve: exact Cholesky, or a fixed number of symmetric SOR sweeps
/// from a zero start (keeps M linear and symmetric, but only approximates A_i^{-1}).
struct InnerSolve {
  enum class Kind { cholesky, ssor };
  Kind kind = Kind::cholesky;
  int iterations = 2;
  double omega = 1.0;
};

class SubdomainSolver {
 public:
  SubdomainSolver(const CsrMatrix& a, std::vector<Index> indices, InnerSolve inner = {});

  std::span<const Index> indices() const noexcept { return indices_; }
  Index size() const noexcept { return static_cast<Index>(indices_.size()); }
  const InnerSolve& inner() const noexcept { return inner_; }

  /// Replaces the local right-hand side with the local correction.
  /// `work` needs 2 * size() entries.
  void solve_in_place(std::span<double> rhs, std::span<double> work) const;

 private:
  std::vector<Index> indices_;
  InnerSolve inner_;
  std::optional<CholeskyFactor> factor_;
  CsrMatrix local_;  // kept for SSOR
};

struct SchwarzOptions {
  ResidualMode residual = ResidualMode::incremental;
  InnerSolve inner;
};

/// Wall-clock split of one apply.
struct ApplyStats {
  double coarse_seconds = 0.0;
  double total_seconds = 0.0;
};

/// Multiplicative overlapping Schwarz: forward sweep, coarse correction,
/// reverse sweep, all from a zero initial guess. Without a coarse space it is
/// the symmetric one-level method. With a nested preconditioner the coarse
/// problem is approximated by one application of that preconditioner.
class TwoLevelPreconditioner {
 public:
  TwoLevelPreconditioner(std::shared_ptr<const CsrMatrix> a, const OverlapSet& overlap,
                         std::shared_ptr<const CoarseSpace> coarse, SchwarzOptions opts = {});

  Index size() const noexcept { return a_->rows(); }
  /// 1 without coarse space, 2 with an exact coarse solve, 3+ with nesting.
  int levels() const noexcept;
  const CsrMatrix& matrix() const noexcept { return *a_; }
  const CoarseSpace* coarse() const noexcept { return coarse_.get(); }
  const TwoLevelPreconditioner* next_level() const noexcept { return next_.get(); }
  std::span<const SubdomainSolver> subdomains() const noexcept { return subdomains_; }
  const SchwarzOptions& options() const noexcept { return opts_; }

  void set_next_level(std::unique_ptr<TwoLevelPreconditioner> next);

  /// One pass of u += R_i^T A_i^{-1} R_i (f - A u) over every subdomain.
  void smooth_sweep(std::span<double> u, std::span<const double> f, SweepOrder order) const;

  std::vector<double> apply(std::span<const double> r, ApplyStats* stats = nullptr) const;
  void apply_into(std::span<const double> r, std::span<double> z, ApplyStats* stats = nullptr) const;

  /// As apply, but solving the coarse problem with the factor of A0 even when
  /// a nested level exists. Requires the coarse space to carry a factor.
  std::vector<double> apply_exact_coarse(std::span<const double> r) const;

 private:
  struct Scratch {
    std::vector<double> local;
    std::vector<double> work;
  };

  void sweep(std::span<double> u, std::span<double> res, std::span<const double> f, SweepOrder order,
             Scratch& scratch) const;
  void update_residual(std::span<double> res, std::span<const double> u, std::span<const double> f,
                       std::span<const Index> idx, std::span<const double> delta) const;
  void run(std::span<const double> r, std::span<double> z, bool exact_coarse, ApplyStats* stats) const;

  std::shared_ptr<const CsrMatrix> a_;
  std::vector<SubdomainSolver> subdomains_;
  std::shared_ptr<const CoarseSpace> coarse_;
  std::unique_ptr<TwoLevelPreconditioner> next_;
  SchwarzOptions opts_;
  Index max_subdomain_ = 0;
};

TwoLevelPreconditioner build_one_level(std::shared_ptr<const CsrMatrix> a, const OverlapSet& overlap,
                                       SchwarzOptions opts = {});

TwoLevelPreconditioner build_two_level(std::shared_ptr<const CsrMatrix> a, const DenseMatrix& generators,
                                       const Partition& part, const OverlapSet& overlap,
                                       SchwarzOptions opts = {}, double rank_tol = kDefaultRankTol);

struct ThreeLevelOptions {
  SchwarzOptions schwarz;
  double rank_tol = kDefaultRankTol;
  std::uint64_t seed = 0;
  /// Also factor the first coarse matrix so apply_exact_coarse is available.
  bool factor_first_coarse = false;
};

/// Preconditioner for the first coarse matrix of `cs1`: the parts of
/// `part_fine` are grouped by a graph partition of their adjacency into
/// round(num_parts / factor^d) super-parts, which partition the unknowns of A0.
/// Its coarse space uses F0 = R0 F; its smoother uses overlap `delta` on the
/// graph of A0. Throws TooSmallForThreeLevels when fewer than two super-parts result.
std::unique_ptr<TwoLevelPreconditioner> build_nested_level(const CsrMatrix& a, const GeneratingBasis& generators,
                                                           const CoarseSpace& cs1, double coarsening_factor,
                                                           Index delta, const ThreeLevelOptions& opts);

/// Number of super-parts used by build_nested_level; throws TooSmallForThreeLevels below two.
Index second_level_parts(Index first_level_parts, double coarsening_factor, int dimension);

/// Level-1 smoother and coarse space whose coarse solve is one application of
/// build_nested_level.
TwoLevelPreconditioner build_three_level(std::shared_ptr<const CsrMatrix> a, const GeneratingBasis& generators,
                                         const Partition& part_fine, const OverlapSet& overlap_fine,
                                         double coarsening_factor, Index delta, ThreeLevelOptions opts = {});
TwoLevelPreconditioner build_three_level(std::shared_ptr<const CsrMatrix> a, const GeneratingBasis& generators,
                                         const Partition& part_fine, double coarsening_factor, Index delta,
                                         ThreeLevelOptions opts = {});

}  // namespace ddg
