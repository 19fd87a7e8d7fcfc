#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ddg/coarse.hpp"
#include "ddg/krylov.hpp"
#include "ddg/partition.hpp"
#include "ddg/problems.hpp"
#include "ddg/schwarz.hpp"

namespace ddg {

enum class Partitioner { automatic, graph, inertial };

struct ExperimentConfig {
  /// poisson3d | poisson2d | smooth | discontinuous | elasticity | biharmonic | import
  std::string problem = "poisson3d";
  /// Grid points per direction (m), or n^{1/2} for the annulus problems.
  Index size = 20;
  double coarsening_factor = 10.0;
  int p = 1;
  Index delta = 0;
  /// 1 (no coarse space), 2 or 3.
  int levels = 2;
  double tol = 1e-9;
  Index max_iter = 1000;
  std::uint64_t seed = 0;
  Partitioner partitioner = Partitioner::automatic;
  ConvergenceReference reference = ConvergenceReference::after_first_step;
  ResidualMode residual = ResidualMode::incremental;
  InnerSolve inner;
  /// Piecewise polynomials per material when the problem has materials.
  bool material_aware = true;
  double rank_tol = kDefaultRankTol;
  /// Wall-clock columns; off writes zeros so rows are reproducible bit for bit.
  bool timing = true;

  // Import inputs (problem = import).
  std::filesystem::path matrix_path;
  std::filesystem::path coords_path;
  std::filesystem::path material_path;
  std::filesystem::path rhs_path;
  std::filesystem::path generators_path;
  std::filesystem::path partition_path;
  Index num_components = 1;
  int half_order = 1;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct ExperimentResult {
  SolveReport report;
  std::string problem;
  Index n = 0;
  int dimension = 0;
  int p = 0;
  double coarsening_factor = 0.0;
  Index delta = 0;
  int levels = 0;
  Index num_parts = 0;
  Index coarse_rank = 0;
  double setup_seconds = 0.0;
  double solve_seconds = 0.0;
  double coarse_fraction_of_time = 0.0;
};

/// Builds (or imports) the problem described by `config`.
ProblemInstance make_problem(const ExperimentConfig& config);

/// Node partition used by the harness; the inertial partitioner rounds the
/// part count to the nearest power of two.
Partition partition_problem(const ProblemInstance& problem, const ExperimentConfig& config);

/// Generate, partition, build F, coarse space and preconditioner, run PCG.
/// Errors are rethrown with the failing stage in the message.
ExperimentResult run_experiment(const ExperimentConfig& config);
ExperimentResult run_experiment(const ExperimentConfig& config, const ProblemInstance& problem);

struct SetupInfo {
  Index num_parts = 0;
  Index coarse_rank = 0;
  double setup_seconds = 0.0;
  double coarse_seconds = 0.0;
};

/// The preconditioner run_experiment hands to PCG. Errors carry the stage label.
TwoLevelPreconditioner build_preconditioner(const ExperimentConfig& config, const ProblemInstance& problem,
                                            SetupInfo* info = nullptr);

/// p | size | coarsening | delta | h_eq_H2. For h_eq_H2 every value N is a size
/// with coarsening factor sqrt(N) and delta = floor(sqrt(N) / 4).
std::vector<ExperimentResult> run_sweep(const ExperimentConfig& base, const std::string& axis,
                                        const std::vector<double>& values);

std::string csv_header();
std::string csv_row(const ExperimentResult& result);
void write_csv(std::ostream& out, const std::vector<ExperimentResult>& rows);

struct CoarseStudyRow {
  Index size = 0;
  Index n = 0;
  Index num_parts = 0;
  double H = 0.0;
  double h = 0.0;
  Index coarse_rank = 0;
  double error = 0.0;
};

struct CoarseStudyResult {
  std::vector<CoarseStudyRow> rows;
  /// Least-squares slope of log(error) against log(H).
  double fitted_order = 0.0;
};

/// A-norm error of the coarse Galerkin solution against a direct fine solve,
/// for the manufactured solution sin(pi x) sin(pi y) (poisson2d) or
/// sin^2(pi x) sin^2(pi y) (biharmonic) at fixed H/h; `sizes` are grid sizes m.
/// Errors are in the energy norm of the continuous operator.
CoarseStudyResult coarse_accuracy_study(const std::string& problem, int p, double coarsening_factor,
                                        const std::vector<Index>& sizes, std::uint64_t seed = 0);

void write_coarse_study_csv(std::ostream& out, const CoarseStudyResult& result);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ddg
