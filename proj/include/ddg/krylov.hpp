#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ddg/sparse.hpp"

namespace ddg {

/// z = M r.
using PreconditionerFn = std::function<void(std::span<const double> r, std::span<double> z)>;

/// Residual norm the tolerance is measured against.
enum class ConvergenceReference {
  /// True residual after the first preconditioned CG step; ||f|| instead when
  /// that step already reaches tol * ||f||.
  after_first_step,
  /// ||f||, the residual of the zero initial guess.
  initial,
};

struct PcgOptions {
  double tol = 1e-9;
  Index max_iter = 1000;
  ConvergenceReference reference = ConvergenceReference::after_first_step;
};

struct SolveReport {
  std::vector<double> solution;
  /// ||f - A u_k||_2 for k = 0, 1, ...
  std::vector<double> residual_history;
  Index iterations = 0;
  double fractional_iterations = 0.0;
  bool converged = false;
  std::vector<double> lanczos_alphas;
  std::vector<double> lanczos_betas;
  double condition_estimate = 1.0;
  double iteration_bound = 0.0;
  double reference_residual = 0.0;
  double tol = 0.0;
  /// Non-empty when CG stopped early (p^T A p <= 0).
  std::string breakdown;
};

/// Preconditioned CG from a zero initial guess. Throws PreconditionerNotSpd when
/// <M r, r> <= 0 for a nonzero residual.
SolveReport pcg(const CsrMatrix& a, const PreconditionerFn& m, std::span<const double> f, PcgOptions opts = {});

/// Identity preconditioner.
PreconditionerFn identity_preconditioner();

/// Real iteration index where the piecewise-linear graph of log10(history)
/// first reaches log10(tol * reference); +infinity if it never does.
double fractional_iterations(std::span<const double> history, double tol, double reference);

struct ConditionEstimate {
  double kappa = 1.0;
  double iteration_bound = 0.0;
  double tol = 0.0;
};

/// Extreme eigenvalue ratio of the Lanczos tridiagonal implied by the CG
/// coefficients, and the classical CG bound ln(2/tol) / ln((sqrt k + 1)/(sqrt k - 1)).
ConditionEstimate condition_estimate(std::span<const double> alphas, std::span<const double> betas, double tol);

/// The bound alone, for a known kappa (0 when kappa <= 1).
double cg_iteration_bound(double kappa, double tol);

}  // namespace ddg
