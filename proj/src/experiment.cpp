#include "ddg/experiment.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "ddg/cholesky.hpp"
#include "ddg/matrix_market.hpp"

namespace ddg {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs f, prefixing any library error with the pipeline stage.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  const std::string prefix = name;
  try {
    return f();
  } catch (const TooSmallForThreeLevels& e) {
    throw TooSmallForThreeLevels(prefix + ": " + e.what());
  } catch (const PreconditionerNotSpd& e) {
    throw PreconditionerNotSpd(prefix + ": " + e.what());
  } catch (const NotPositiveDefinite& e) {
    throw NotPositiveDefinite(prefix, e);
  } catch (const DimensionError& e) {
    throw DimensionError(prefix + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(prefix + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError(prefix + ": " + e.what());
  } catch (const Error& e) {
    throw Error(prefix + ": " + e.what());
  }
}

Index nearest_power_of_two(Index k) {
  if (k <= 1) return 1;
  const double e = std::round(std::log2(static_cast<double>(k)));
  return Index{1} << static_cast<int>(e);
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  std::ostringstream ss;
  ss << std::setprecision(10) << v;
  return ss.str();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!(tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (!(coarsening_factor >= 1.0)) throw InvalidArgument("coarsening_factor must be at least 1");
  if (p < 0) throw InvalidArgument("p must be non-negative");
  if (delta < 0) throw InvalidArgument("delta must be non-negative");
  if (levels < 1 || levels > 3) throw InvalidArgument("levels must be 1, 2 or 3");
  if (max_iter < 1) throw InvalidArgument("max_iter must be positive");
  if (num_components < 1) throw InvalidArgument("num_components must be positive");
  if (problem == "import" && matrix_path.empty()) throw InvalidArgument("import needs a matrix file");
}

ProblemInstance make_problem(const ExperimentConfig& c) {
  if (c.problem == "poisson3d") return poisson3d_7pt(c.size, c.seed);
  if (c.problem == "poisson2d") return poisson2d_5pt(c.size, c.seed);
  if (c.problem == "biharmonic") return biharmonic_13pt(c.size, c.seed);
  if (c.problem == "smooth") return fem_poisson_p1(annulus_mesh_for_size(c.size), smooth_coefficient(), c.seed);
  if (c.problem == "discontinuous") {
    return fem_poisson_p1(annulus_mesh_for_size(c.size), discontinuous_coefficient(), c.seed);
  }
  if (c.problem == "elasticity") return fem_elasticity_p1(annulus_mesh_for_size(c.size), c.seed);
  if (c.problem == "import") {
    if (c.coords_path.empty()) throw InvalidArgument("import needs a coordinate file");
    ProblemInstance p;
    p.a = mm::read_coordinate(c.matrix_path);
    if (!p.a.is_symmetric()) p.a = p.a.as_symmetric(1e-12);
    p.coords = read_coords_csv(c.coords_path);
    p.dimension = static_cast<int>(p.coords.cols());
    p.num_components = c.num_components;
    p.half_order = c.half_order;
    if (p.coords.rows() * p.num_components != p.a.rows()) {
      throw DimensionError("import: " + std::to_string(p.coords.rows()) + " coordinate rows with " +
                           std::to_string(p.num_components) + " components do not match a " +
                           std::to_string(p.a.rows()) + "-row matrix");
    }
    if (!c.material_path.empty()) p.material_of_node = read_material_csv(c.material_path);
    p.rhs = c.rhs_path.empty() ? gaussian_rhs(p.a.rows(), c.seed) : mm::read_vector(c.rhs_path);
    if (static_cast<Index>(p.rhs.size()) != p.a.rows()) throw DimensionError("import: rhs length mismatch");
    p.label = c.matrix_path.stem().string();
    return p;
  }
  throw InvalidArgument("unknown problem '" + c.problem + "'");
}

Partition partition_problem(const ProblemInstance& problem, const ExperimentConfig& c) {
  if (!c.partition_path.empty()) {
    Partition part = read_partition(c.partition_path);
    if (part.size() != problem.num_nodes()) throw DimensionError("partition file covers a different node count");
    return part;
  }
  const Index count = parts_for_coarsening(problem.num_nodes(), c.coarsening_factor, problem.dimension);
  Partitioner kind = c.partitioner;
  if (kind == Partitioner::automatic) {
    kind = problem.label == "poisson3d" || problem.label == "poisson2d" ? Partitioner::inertial : Partitioner::graph;
  }
  if (kind == Partitioner::inertial) {
    return inertial_partition(problem.coords, nearest_power_of_two(count), c.seed, true);
  }
  if (problem.num_components == 1) return graph_partition(problem.a, count, c.seed);
  return graph_partition(node_graph(problem.a, problem.num_components), count, c.seed);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const ProblemInstance problem = stage("generate", [&] { return make_problem(config); });
  return run_experiment(config, problem);
}

TwoLevelPreconditioner build_preconditioner(const ExperimentConfig& config, const ProblemInstance& problem,
                                            SetupInfo* info) {
  config.validate();
  const auto t_setup = Clock::now();
  const Index c = problem.num_components;
  const Partition part = stage("partition", [&] { return partition_problem(problem, config); });
  if (config.levels == 3) {
    stage("three-level", [&] { return second_level_parts(part.num_parts, config.coarsening_factor, problem.dimension); });
  }
  const Partition part_dof = c == 1 ? part : expand_components(part, c);
  const OverlapSet overlap = stage("overlap", [&] {
    if (c == 1) return expand_overlap(problem.a, part, config.delta);
    return expand_components(expand_overlap(node_graph(problem.a, c), part, config.delta), c);
  });

  auto a = std::make_shared<const CsrMatrix>(problem.a);
  SchwarzOptions sopts{config.residual, config.inner};
  std::shared_ptr<CoarseSpace> cs;
  std::unique_ptr<TwoLevelPreconditioner> nested;
  double coarse_setup = 0.0;
  if (config.levels >= 2) {
    const auto t_coarse = Clock::now();
    GeneratingBasis f = stage("generating vectors", [&] {
      if (!config.generators_path.empty()) {
        GeneratingBasis g;
        g.columns = mm::read_array(config.generators_path);
        g.degree = config.p;
        g.dimension = problem.dimension;
        g.num_components = c;
        return g;
      }
      const bool materials = config.material_aware && !problem.material_of_node.empty();
      return build_generating_basis(problem.coords, config.p, c,
                                    materials ? std::span<const Index>(problem.material_of_node) : std::span<const Index>{});
    });
    cs = stage("coarse space", [&] {
      return std::make_shared<CoarseSpace>(
          build_coarse_space(*a, f.columns, part_dof, config.rank_tol, config.levels == 2));
    });
    if (config.levels == 3) {
      ThreeLevelOptions topts{sopts, config.rank_tol, config.seed, false};
      nested = stage("three-level", [&] {
        return build_nested_level(*a, f, *cs, config.coarsening_factor, config.delta, topts);
      });
    }
    coarse_setup = seconds_since(t_coarse);
  }
  TwoLevelPreconditioner pre = stage("smoother", [&] { return TwoLevelPreconditioner(a, overlap, cs, sopts); });
  if (nested) pre.set_next_level(std::move(nested));
  if (info) {
    info->num_parts = part.num_parts;
    info->coarse_rank = cs ? cs->rank() : 0;
    info->coarse_seconds = coarse_setup;
    info->setup_seconds = seconds_since(t_setup);
  }
  return pre;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const ProblemInstance& problem) {
  config.validate();
  ExperimentResult out;
  out.problem = problem.label;
  out.n = problem.a.rows();
  out.dimension = problem.dimension;
  out.p = config.p;
  out.coarsening_factor = config.coarsening_factor;
  out.delta = config.delta;
  out.levels = config.levels;

  SetupInfo info;
  const TwoLevelPreconditioner pre = build_preconditioner(config, problem, &info);
  out.num_parts = info.num_parts;
  out.coarse_rank = info.coarse_rank;
  out.setup_seconds = info.setup_seconds;
  const double coarse_setup = info.coarse_seconds;
  ApplyStats stats;
  const auto t_solve = Clock::now();
  PcgOptions popts{config.tol, config.max_iter, config.reference};
  out.report = stage("solve", [&] {
    return pcg(problem.a, [&](std::span<const double> r, std::span<double> z) { pre.apply_into(r, z, &stats); },
               problem.rhs, popts);
  });
  out.solve_seconds = seconds_since(t_solve);
  const double total = out.setup_seconds + out.solve_seconds;
  out.coarse_fraction_of_time = total > 0.0 ? (coarse_setup + stats.coarse_seconds) / total : 0.0;
  if (!config.timing) out.setup_seconds = out.solve_seconds = out.coarse_fraction_of_time = 0.0;
  return out;
}

std::vector<ExperimentResult> run_sweep(const ExperimentConfig& base, const std::string& axis,
                                        const std::vector<double>& values) {
  if (axis != "p" && axis != "size" && axis != "coarsening" && axis != "delta" && axis != "h_eq_H2") {
    throw InvalidArgument("unknown sweep axis '" + axis + "' (expected p, size, coarsening, delta or h_eq_H2)");
  }
  std::vector<ExperimentResult> rows;
  for (double v : values) {
    ExperimentConfig c = base;
    if (axis == "p") {
      c.p = static_cast<int>(std::llround(v));
    } else if (axis == "size") {
      c.size = std::llround(v);
    } else if (axis == "coarsening") {
      c.coarsening_factor = v;
    } else if (axis == "delta") {
      c.delta = std::llround(v);
    } else {
      c.size = std::llround(v);
      c.coarsening_factor = std::sqrt(v);
      c.delta = static_cast<Index>(std::floor(c.coarsening_factor / 4.0));
    }
    rows.push_back(run_experiment(c));
  }
  return rows;
}

std::string csv_header() {
  return "problem,n,d,p,H/h,delta,levels,iterations,fractional_iterations,condition_estimate,iteration_bound,"
         "coarse_rank,setup_seconds,solve_seconds,coarse_fraction_of_time";
}

std::string csv_row(const ExperimentResult& r) {
  std::ostringstream ss;
  ss << r.problem << "," << r.n << "," << r.dimension << "," << r.p << "," << format_double(r.coarsening_factor) << ","
     << r.delta << "," << r.levels << "," << r.report.iterations << ","
     << format_double(r.report.fractional_iterations) << "," << format_double(r.report.condition_estimate) << ","
     << format_double(r.report.iteration_bound) << "," << r.coarse_rank << "," << format_double(r.setup_seconds)
     << "," << format_double(r.solve_seconds) << "," << format_double(r.coarse_fraction_of_time);
  return ss.str();
}

void write_csv(std::ostream& out, const std::vector<ExperimentResult>& rows) {
  out << csv_header() << "\n";
  for (const auto& r : rows) out << csv_row(r) << "\n";
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_slope: need two or more paired samples");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_slope: x values are all equal");
  return sxy / sxx;
}

CoarseStudyResult coarse_accuracy_study(const std::string& problem, int p, double coarsening_factor,
                                        const std::vector<Index>& sizes, std::uint64_t seed) {
  if (problem != "poisson2d" && problem != "biharmonic") {
    throw InvalidArgument("coarse_accuracy_study: problem must be poisson2d or biharmonic");
  }
  constexpr double pi = std::numbers::pi;
  CoarseStudyResult out;
  std::vector<double> log_h, log_e;
  for (Index m : sizes) {
    const ProblemInstance prob = problem == "poisson2d" ? poisson2d_5pt(m) : biharmonic_13pt(m);
    const Index n = prob.a.rows();
    std::vector<double> exact(n);
    for (Index v = 0; v < n; ++v) {
      const double s = std::sin(pi * prob.coords(v, 0)) * std::sin(pi * prob.coords(v, 1));
      exact[v] = problem == "poisson2d" ? s : s * s;
    }
    const auto f = spmv(prob.a, exact);
    const auto reference = CholeskyFactor::factorize(prob.a).solve(f);
    const Index parts = nearest_power_of_two(parts_for_coarsening(n, coarsening_factor, 2));
    const Partition part = inertial_partition(prob.coords, parts, seed, false);
    const GeneratingBasis basis = build_generating_basis(prob.coords, p);
    const CoarseSpace cs = build_coarse_space(prob.a, basis.columns, part);
    double err = coarse_solution_error(prob.a, f, cs, reference);
    // Scaled fourth-order stencil: discrete energy is h^-2 times the continuous one.
    if (problem == "biharmonic") err *= prob.mesh_h;
    CoarseStudyRow row;
    row.size = m;
    row.n = n;
    row.num_parts = parts;
    row.H = 1.0 / std::sqrt(static_cast<double>(parts));
    row.h = prob.mesh_h;
    row.coarse_rank = cs.rank();
    row.error = err;
    out.rows.push_back(row);
    log_h.push_back(std::log(row.H));
    log_e.push_back(std::log(err));
  }
  out.fitted_order = out.rows.size() >= 2 ? fit_slope(log_h, log_e) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

void write_coarse_study_csv(std::ostream& out, const CoarseStudyResult& result) {
  out << "size,n,num_parts,H,h,coarse_rank,error\n";
  for (const auto& r : result.rows) {
    out << r.size << "," << r.n << "," << r.num_parts << "," << format_double(r.H) << "," << format_double(r.h) << ","
        << r.coarse_rank << "," << format_double(r.error) << "\n";
  }
  out << "# fitted_order," << format_double(result.fitted_order) << "\n";
}

}  // namespace ddg
