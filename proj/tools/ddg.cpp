// Command-line driver: generate / export problems, run solves, sweeps and the
// coarse-grid accuracy study. Shared options live on the top-level app so a flat
// key=value config file (--config) can set them for any subcommand.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iomanip>
#include <map>

#include "ddg/experiment.hpp"
#include "ddg/matrix_market.hpp"

namespace fs = std::filesystem;
using namespace ddg;

namespace {

// Appends to an existing CSV, writing the header only for a new or empty file.
void append_csv(const fs::path& path, const std::vector<ExperimentResult>& rows) {
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write " + path.string());
  if (fresh) out << csv_header() << "\n";
  for (const auto& r : rows) out << csv_row(r) << "\n";
}

void write_history(const fs::path& path, const SolveReport& rep) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "iteration,residual\n" << std::setprecision(17);
  for (std::size_t k = 0; k < rep.residual_history.size(); ++k) out << k << "," << rep.residual_history[k] << "\n";
}

void export_problem(const ProblemInstance& p, const fs::path& dir) {
  fs::create_directories(dir);
  mm::write_coordinate(dir / "matrix.mtx", p.a);
  write_coords_csv(dir / "coords.csv", p.coords);
  mm::write_vector(dir / "rhs.mtx", p.rhs);
  if (!p.material_of_node.empty()) write_material_csv(dir / "material.csv", p.material_of_node);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Overlapping Schwarz with polynomial coarse spaces: experiment driver"};
  app.set_config("--config", "", "Flat key=value file; keys are option names without dashes");
  app.require_subcommand(1);

  ExperimentConfig cfg;
  std::string partitioner = "auto", reference = "first", residual = "incremental", inner = "cholesky";
  fs::path csv_path, history_path, out_dir = "ddg_out";

  app.add_option("--problem", cfg.problem, "poisson3d|poisson2d|smooth|discontinuous|elasticity|biharmonic|import")
      ->capture_default_str();
  app.add_option("--size", cfg.size, "Grid points per direction, or n^(1/2) for annulus problems")->capture_default_str();
  app.add_option("--coarsening", cfg.coarsening_factor, "H/h")->capture_default_str();
  app.add_option("-p,--degree", cfg.p, "Polynomial degree of the coarse space")->capture_default_str();
  app.add_option("--delta", cfg.delta, "Algebraic overlap")->capture_default_str();
  app.add_option("--levels", cfg.levels, "1, 2 or 3")->capture_default_str();
  app.add_option("--tol", cfg.tol, "Relative residual tolerance")->capture_default_str();
  app.add_option("--max-iter", cfg.max_iter)->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--partitioner", partitioner, "auto|graph|inertial")->capture_default_str();
  app.add_option("--reference", reference, "first|initial: residual the tolerance is relative to")
      ->capture_default_str();
  app.add_option("--residual", residual, "incremental|full residual update in sweeps")->capture_default_str();
  app.add_option("--inner", inner, "cholesky|ssor subdomain solves")->capture_default_str();
  app.add_option("--ssor-iterations", cfg.inner.iterations)->capture_default_str();
  app.add_option("--ssor-omega", cfg.inner.omega)->capture_default_str();
  app.add_option("--material-aware", cfg.material_aware, "Piecewise polynomials per material")->capture_default_str();
  app.add_option("--rank-tol", cfg.rank_tol)->capture_default_str();
  app.add_option("--timing", cfg.timing, "Record wall-clock columns (false writes zeros)")->capture_default_str();
  app.add_option("--matrix", cfg.matrix_path, "Matrix Market file (import)");
  app.add_option("--coords", cfg.coords_path, "Coordinate CSV (import)");
  app.add_option("--materials", cfg.material_path, "Material CSV (import)");
  app.add_option("--rhs", cfg.rhs_path, "Right-hand side, Matrix Market array (import)");
  app.add_option("--generators", cfg.generators_path, "Generating vectors F, Matrix Market array");
  app.add_option("--partition", cfg.partition_path, "Partition file, one part id per node");
  app.add_option("--components", cfg.num_components, "Unknowns per node (import)")->capture_default_str();
  app.add_option("--half-order", cfg.half_order, "Half the PDE order (import)")->capture_default_str();
  app.add_option("--csv", csv_path, "Append result rows to this CSV (stdout when absent)");
  app.add_option("--history", history_path, "Residual history CSV (solve)");
  app.add_option("--out", out_dir, "Output directory (generate, export)")->capture_default_str();

  auto* generate = app.add_subcommand("generate", "Write matrix, coordinates, materials and rhs");
  auto* export_cmd = app.add_subcommand("export", "As generate, plus generating vectors and partition");
  auto* solve = app.add_subcommand("solve", "Run one experiment");
  auto* sweep = app.add_subcommand("sweep", "Run one experiment per axis value");
  std::string axis = "p";
  std::vector<double> values;
  sweep->add_option("--axis", axis, "p|size|coarsening|delta|h_eq_H2")->capture_default_str();
  sweep->add_option("--values", values, "Axis values")->delimiter(',');
  auto* study = app.add_subcommand("coarse-study", "Coarse-grid A-norm error against a direct solve");
  std::vector<Index> sizes{32, 64, 128, 256};
  study->add_option("--sizes", sizes, "Grid sizes m")->delimiter(',')->capture_default_str();
  for (auto* sub : {generate, export_cmd, solve, sweep, study}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    static const std::map<std::string, Partitioner> partitioners{
        {"auto", Partitioner::automatic}, {"graph", Partitioner::graph}, {"inertial", Partitioner::inertial}};
    if (!partitioners.count(partitioner)) throw InvalidArgument("unknown partitioner '" + partitioner + "'");
    cfg.partitioner = partitioners.at(partitioner);
    if (reference != "first" && reference != "initial") throw InvalidArgument("unknown reference '" + reference + "'");
    cfg.reference = reference == "first" ? ConvergenceReference::after_first_step : ConvergenceReference::initial;
    if (residual != "incremental" && residual != "full") throw InvalidArgument("unknown residual mode '" + residual + "'");
    cfg.residual = residual == "full" ? ResidualMode::full : ResidualMode::incremental;
    if (inner != "cholesky" && inner != "ssor") throw InvalidArgument("unknown inner solver '" + inner + "'");
    cfg.inner.kind = inner == "ssor" ? InnerSolve::Kind::ssor : InnerSolve::Kind::cholesky;
    cfg.validate();

    if (*generate || *export_cmd) {
      const ProblemInstance p = make_problem(cfg);
      export_problem(p, out_dir);
      if (*export_cmd) {
        const Partition part = partition_problem(p, cfg);
        write_partition(out_dir / "partition.txt", part);
        const GeneratingBasis f = build_generating_basis(
            p.coords, cfg.p, p.num_components,
            cfg.material_aware ? std::span<const Index>(p.material_of_node) : std::span<const Index>{});
        mm::write_array(out_dir / "generators.mtx", f.columns);
      }
      std::cout << "wrote " << p.label << " (n=" << p.a.rows() << ") to " << out_dir.string() << "\n";
      return 0;
    }

    std::vector<ExperimentResult> rows;
    if (*solve) {
      rows.push_back(run_experiment(cfg));
      if (!history_path.empty()) write_history(history_path, rows.back().report);
    } else if (*sweep) {
      rows = run_sweep(cfg, axis, values);
    } else if (*study) {
      const auto result = coarse_accuracy_study(cfg.problem, cfg.p, cfg.coarsening_factor, sizes, cfg.seed);
      if (csv_path.empty()) {
        write_coarse_study_csv(std::cout, result);
      } else {
        std::ofstream out(csv_path);
        if (!out) throw Error("cannot write " + csv_path.string());
        write_coarse_study_csv(out, result);
      }
      return 0;
    }
    if (csv_path.empty()) {
      write_csv(std::cout, rows);
    } else {
      append_csv(csv_path, rows);
    }
    for (const auto& r : rows) {
      if (!r.report.converged) {
        std::cerr << "warning: " << r.problem << " p=" << r.p << " did not converge in " << r.report.iterations
                  << " iterations (bound " << r.report.iteration_bound << ")\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
