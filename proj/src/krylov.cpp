#include "ddg/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddg/dense.hpp"

namespace ddg {

namespace {

double true_residual(const CsrMatrix& a, std::span<const double> f, std::span<const double> u,
                     std::vector<double>& scratch) {
  spmv_into(a, u, scratch);
  double s = 0.0;
  for (std::size_t i = 0; i < scratch.size(); ++i) {
    const double d = f[i] - scratch[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

PreconditionerFn identity_preconditioner() {
  return [](std::span<const double> r, std::span<double> z) { std::copy(r.begin(), r.end(), z.begin()); };
}

SolveReport pcg(const CsrMatrix& a, const PreconditionerFn& m, std::span<const double> f, PcgOptions opts) {
  const Index n = a.rows();
  if (a.cols() != n || static_cast<Index>(f.size()) != n) {
    throw DimensionError("pcg: matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " but the right-hand side has length " + std::to_string(f.size()));
  }
  if (!(opts.tol > 0.0)) throw InvalidArgument("pcg: tol must be positive");
  for (double v : f) {
    if (!std::isfinite(v)) throw InvalidArgument("pcg: right-hand side is not finite");
  }

  SolveReport rep;
  rep.tol = opts.tol;
  rep.solution.assign(n, 0.0);
  auto& u = rep.solution;
  std::vector<double> r(f.begin(), f.end());
  std::vector<double> z(n), p(n), q(n), scratch(n);

  const double r0 = norm2(r);
  rep.residual_history.push_back(r0);
  double ref = opts.reference == ConvergenceReference::initial ? r0 : std::numeric_limits<double>::quiet_NaN();

  if (r0 == 0.0) {
    rep.converged = true;
    rep.reference_residual = 0.0;
    return rep;
  }

  m(r, z);
  double rz = dot(r, z);
  if (!(rz > 0.0)) throw PreconditionerNotSpd("pcg: <Mr, r> = " + std::to_string(rz) + " at iteration 0");
  p = z;

  for (Index k = 0; k < opts.max_iter; ++k) {
    spmv_into(a, p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) {
      rep.breakdown = "p^T A p = " + std::to_string(pq) + " at iteration " + std::to_string(k);
      break;
    }
    const double alpha = rz / pq;
    for (Index i = 0; i < n; ++i) {
      u[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    rep.lanczos_alphas.push_back(alpha);
    const double res = true_residual(a, f, u, scratch);
    rep.residual_history.push_back(res);
    rep.iterations = k + 1;
    if (k == 0 && opts.reference == ConvergenceReference::after_first_step) {
      // a first step that already meets tol against ||f|| leaves only rounding noise
      ref = res <= opts.tol * r0 ? r0 : res;
    }
    if (res <= opts.tol * ref) {
      rep.converged = true;
      break;
    }
    m(r, z);
    const double rz_new = dot(r, z);
    if (!(rz_new > 0.0)) {
      if (norm2(r) == 0.0) {
        rep.converged = true;
        break;
      }
      throw PreconditionerNotSpd("pcg: <Mr, r> = " + std::to_string(rz_new) + " at iteration " +
                                 std::to_string(k + 1));
    }
    const double beta = rz_new / rz;
    rep.lanczos_betas.push_back(beta);
    for (Index i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    rz = rz_new;
  }

  rep.reference_residual = ref;
  rep.fractional_iterations =
      rep.converged ? fractional_iterations(rep.residual_history, opts.tol, ref) : std::numeric_limits<double>::infinity();
  const auto est = condition_estimate(rep.lanczos_alphas, rep.lanczos_betas, opts.tol);
  rep.condition_estimate = est.kappa;
  rep.iteration_bound = est.iteration_bound;
  return rep;
}

double fractional_iterations(std::span<const double> history, double tol, double reference) {
  if (history.empty()) throw InvalidArgument("fractional_iterations: empty history");
  const double target = tol * reference;
  if (history[0] <= target) return 0.0;
  for (std::size_t k = 1; k < history.size(); ++k) {
    if (history[k] > target) continue;
    if (history[k] == target) return static_cast<double>(k);
    if (history[k] <= 0.0 || target <= 0.0) return static_cast<double>(k);
    const double a = std::log10(history[k - 1]);
    const double b = std::log10(history[k]);
    const double t = std::log10(target);
    return static_cast<double>(k - 1) + (a - t) / (a - b);
  }
  return std::numeric_limits<double>::infinity();
}

double cg_iteration_bound(double kappa, double tol) {
  if (!(kappa > 1.0)) return 0.0;
  const double s = std::sqrt(kappa);
  return std::log(2.0 / tol) / std::log((s + 1.0) / (s - 1.0));
}

ConditionEstimate condition_estimate(std::span<const double> alphas, std::span<const double> betas, double tol) {
  ConditionEstimate est;
  est.tol = tol;
  const std::size_t m = alphas.size();
  if (m < 2) return est;
  if (betas.size() + 1 < m) throw DimensionError("condition_estimate: need one beta between consecutive alphas");
  std::vector<double> diag(m), off(m - 1);
  for (std::size_t k = 0; k < m; ++k) {
    diag[k] = 1.0 / alphas[k] + (k > 0 ? betas[k - 1] / alphas[k - 1] : 0.0);
    if (k + 1 < m) off[k] = std::sqrt(betas[k]) / alphas[k];
  }
  const auto eig = tridiagonal_eigenvalues(diag, off);
  if (eig.front() > 0.0) est.kappa = std::max(1.0, eig.back() / eig.front());
  else est.kappa = std::numeric_limits<double>::infinity();
  est.iteration_bound = cg_iteration_bound(est.kappa, tol);
  return est;
}

}  // namespace ddg
