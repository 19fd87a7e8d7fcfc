#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ddg/cholesky.hpp"
#include "ddg/errors.hpp"
#include "ddg/experiment.hpp"
#include "ddg/sparse.hpp"

using namespace ddg;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string join(const std::vector<double>& v, int digits = 0) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  for (std::size_t k = 0; k < v.size(); ++k) s << (k ? "/" : "") << v[k];
  return s.str();
}

// 1
Outcome poisson3d_table() {
  const std::vector<double> expected{36, 20, 15, 12};
  const auto t0 = Clock::now();
  ExperimentConfig c;
  c.problem = "poisson3d";
  c.size = 40;
  c.coarsening_factor = 10;
  c.delta = 0;
  c.tol = 1e-9;
  std::vector<double> its;
  bool pass = true;
  for (int p = 0; p <= 3; ++p) {
    c.p = p;
    const auto r = run_experiment(c);
    its.push_back(double(r.report.iterations));
    pass = pass && r.report.converged && std::abs(its.back() - expected[p]) <= 0.5 * expected[p];
    if (p > 0) pass = pass && its[p] < its[p - 1];
  }
  const double secs = elapsed(t0);
  pass = pass && secs < 300;
  return {pass, "iterations " + join(its) + " vs 36/20/15/12 (+-50%, strictly decreasing), " + join({secs}) + " s"};
}

// 2
Outcome smooth_size_independence() {
  ExperimentConfig c;
  c.problem = "smooth";
  c.coarsening_factor = 10;
  std::ostringstream d;
  bool pass = true;
  for (int p : {1, 3}) {
    c.p = p;
    std::vector<double> its;
    for (Index n : {200, 400, 800}) {
      c.size = n;
      const auto r = run_experiment(c);
      pass = pass && r.report.converged;
      its.push_back(double(r.report.iterations));
    }
    const double growth = its.back() / its.front() - 1.0;
    pass = pass && growth <= 0.30;
    d << "p=" << p << ": " << join(its) << " (growth " << std::lround(100 * growth) << "%) ";
  }
  d << "limit 30%";
  return {pass, d.str()};
}

// 3
Outcome biharmonic_powers() {
  ExperimentConfig c;
  c.problem = "biharmonic";
  c.size = 200;
  c.coarsening_factor = 10;
  c.delta = 1;
  c.tol = 1e-6;
  std::vector<double> its;
  bool p0_ok = false;
  bool pass = true;
  for (int p = 0; p <= 3; ++p) {
    c.p = p;
    const auto r = run_experiment(c);
    its.push_back(double(r.report.iterations));
    if (p == 0) {
      p0_ok = r.report.iterations > 300 ||
              (!r.report.converged && cg_iteration_bound(r.report.condition_estimate, c.tol) > 300);
    } else {
      pass = pass && r.report.converged;
    }
  }
  pass = pass && p0_ok && its[3] < 30 && its[1] > its[2] && its[2] > its[3];
  return {pass, "iterations " + join(its) + "; need P0 > 300, P3 < 30, P1 > P2 > P3"};
}

// 4
Outcome coarse_order() {
  const auto t0 = Clock::now();
  std::ostringstream d;
  bool pass = true;
  for (int p : {1, 2}) {
    const auto study = coarse_accuracy_study("poisson2d", p, 8.0, {32, 64, 128, 256});
    const double need = (p + 1 - 1) - 0.3;
    pass = pass && study.fitted_order >= need;
    d << "p=" << p << " slope " << join({study.fitted_order}, 3) << " (>= " << join({need}, 1) << ") ";
  }
  const double secs = elapsed(t0);
  pass = pass && secs < 180;
  d << join({secs}) << " s";
  return {pass, d.str()};
}

// 5
Outcome galerkin_monotone() {
  std::ostringstream d;
  bool pass = true;
  struct Case {
    const char* problem;
    Index size;
    double factor;
  };
  for (const Case& k : {Case{"poisson2d", 65, 8}, Case{"smooth", 100, 10}, Case{"discontinuous", 100, 10},
                        Case{"biharmonic", 64, 8}, Case{"poisson3d", 16, 4}}) {
    ExperimentConfig c;
    c.problem = k.problem;
    c.size = k.size;
    c.coarsening_factor = k.factor;
    const ProblemInstance prob = make_problem(c);
    const Partition part = partition_problem(prob, c);
    const auto reference = CholeskyFactor::factorize(prob.a).solve(prob.rhs);
    double prev = INFINITY;
    std::vector<double> errs;
    for (int p = 0; p <= 4; ++p) {
      const bool materials = !prob.material_of_node.empty();
      const auto f = build_generating_basis(prob.coords, p, prob.num_components,
                                            materials ? std::span<const Index>(prob.material_of_node)
                                                      : std::span<const Index>{});
      const CoarseSpace cs = build_coarse_space(prob.a, f.columns, part);
      const double err = coarse_solution_error(prob.a, prob.rhs, cs, reference);
      pass = pass && err <= prev * (1 + 1e-10);
      prev = err;
      errs.push_back(err);
    }
    d << k.problem << " " << join({errs.front() / errs.back()}, 1) << "x; ";
  }
  d << "error reduction p=0 -> 4";
  return {pass, d.str()};
}

struct Instance {
  const char* problem;
  Index size;
  double factor;
  Index delta;
  int levels = 2;
};

const std::vector<Instance>& benchmark_instances() {
  static const std::vector<Instance> list{
      {"poisson3d", 40, 10, 0},    {"poisson2d", 129, 8, 1},     {"biharmonic", 200, 10, 1},
      {"smooth", 200, 10, 1},      {"discontinuous", 200, 10, 1}, {"elasticity", 200, 10, 1},
      {"poisson2d", 201, 5, 1, 3},
  };
  return list;
}

template <class F>
void for_each_preconditioner(F&& visit) {
  for (const Instance& k : benchmark_instances()) {
    ExperimentConfig c;
    c.problem = k.problem;
    c.size = k.size;
    c.coarsening_factor = k.factor;
    c.delta = k.delta;
    c.levels = k.levels;
    const ProblemInstance prob = make_problem(c);
    for (int p : {0, 1, 3}) {
      c.p = p;
      const auto pre = build_preconditioner(c, prob);
      visit(k, p, prob, pre);
    }
  }
}

// 6
Outcome cg_admissible() {
  double worst_sym = 0.0;
  double worst_pos = INFINITY;
  int count = 0;
  bool pass = true;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> gauss;
  for_each_preconditioner([&](const Instance& k, int, const ProblemInstance& prob, const TwoLevelPreconditioner& m) {
    if (prob.a.rows() > 100000) throw InvalidArgument(std::string("instance too large: ") + k.problem);
    const Index n = m.size();
    std::vector<double> r1(n), r2(n);
    for (int probe = 0; probe < 20; ++probe) {
      for (Index i = 0; i < n; ++i) {
        r1[i] = gauss(rng);
        r2[i] = gauss(rng);
      }
      const auto z1 = m.apply(r1);
      const auto z2 = m.apply(r2);
      const double scale = norm2(r1) * norm2(r2);
      const double sym = std::abs(dot(z1, r2) - dot(r1, z2)) / scale;
      const double pos = std::min(dot(z1, r1) / dot(r1, r1), dot(z2, r2) / dot(r2, r2));
      worst_sym = std::max(worst_sym, sym);
      worst_pos = std::min(worst_pos, pos);
      pass = pass && sym <= 1e-9 && pos > 0.0;
    }
    ++count;
  });
  std::ostringstream d;
  d << count << " preconditioners x 20 probes, worst symmetry defect " << worst_sym << " (<= 1e-9), min <Mr,r>/<r,r> "
    << worst_pos << " (> 0)";
  return {pass, d.str()};
}

double orthonormality_defect(const CsrMatrix& r) {
  const CsrMatrix g = multiply(r, transpose(r));
  double worst = 0.0;
  for (Index i = 0; i < g.rows(); ++i) {
    bool diag = false;
    const auto cols = g.row_cols(i);
    const auto vals = g.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const bool on = cols[k] == i;
      diag = diag || on;
      worst = std::max(worst, std::abs(vals[k] - (on ? 1.0 : 0.0)));
    }
    if (!diag) worst = std::max(worst, 1.0);
  }
  return worst;
}

// Rows of a material-blind p=0 restriction must be the normalized indicators
// of the (part, component) blocks.
double indicator_defect(const CoarseSpace& cs, Index components) {
  const CsrMatrix& r = cs.restriction.matrix;
  const auto& owner = cs.partition.assignment;
  auto block_of = [&](Index v) { return owner[v] * components + v % components; };
  std::vector<Index> block_size(cs.partition.num_parts * components, 0);
  for (Index v = 0; v < Index(owner.size()); ++v) ++block_size[block_of(v)];
  if (r.rows() != Index(std::count_if(block_size.begin(), block_size.end(), [](Index s) { return s > 0; }))) {
    return INFINITY;
  }
  double worst = 0.0;
  std::vector<char> seen(block_size.size(), 0);
  for (Index i = 0; i < r.rows(); ++i) {
    const auto cols = r.row_cols(i);
    const auto vals = r.row_values(i);
    if (cols.empty()) return INFINITY;
    const Index block = block_of(cols[0]);
    if (seen[block]++ || Index(cols.size()) != block_size[block]) return INFINITY;
    const double expect = 1.0 / std::sqrt(double(block_size[block]));
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (block_of(cols[k]) != block) return INFINITY;
      worst = std::max(worst, std::abs(std::abs(vals[k]) - expect) / expect);
    }
  }
  return worst;
}

// Material-aware p=0: the orthonormal rows mix the material indicators of a
// part, so check the span instead. Every row is constant on each (part,
// material) block and there is one row per nonempty block.
double aggregation_defect(const CoarseSpace& cs, std::span<const Index> material) {
  const CsrMatrix& r = cs.restriction.matrix;
  const auto& owner = cs.partition.assignment;
  const Index materials = *std::max_element(material.begin(), material.end()) + 1;
  std::vector<Index> block_size(cs.partition.num_parts * materials, 0);
  for (Index v = 0; v < Index(owner.size()); ++v) ++block_size[owner[v] * materials + material[v]];
  if (r.rows() != Index(std::count_if(block_size.begin(), block_size.end(), [](Index s) { return s > 0; }))) {
    return INFINITY;
  }
  double worst = 0.0;
  std::vector<double> first(block_size.size());
  std::vector<Index> hits(block_size.size());
  for (Index i = 0; i < r.rows(); ++i) {
    const auto cols = r.row_cols(i);
    const auto vals = r.row_values(i);
    if (cols.empty()) return INFINITY;
    const Index part = owner[cols[0]];
    std::fill(hits.begin(), hits.end(), 0);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (owner[cols[k]] != part) return INFINITY;
      const Index block = part * materials + material[cols[k]];
      if (hits[block]++ == 0) first[block] = vals[k];
      worst = std::max(worst, std::abs(vals[k] - first[block]) / std::abs(first[block]));
    }
    for (std::size_t b = 0; b < hits.size(); ++b) {
      if (hits[b] != 0 && hits[b] != block_size[b]) return INFINITY;
    }
  }
  return worst;
}

// 7
Outcome orthonormal_restrictions() {
  double worst = 0.0;
  double worst_indicator = 0.0;
  int count = 0;
  std::string offenders;
  for_each_preconditioner([&](const Instance& k, int p, const ProblemInstance& prob, const TwoLevelPreconditioner& m) {
    for (const TwoLevelPreconditioner* level = &m; level && level->coarse(); level = level->next_level()) {
      worst = std::max(worst, orthonormality_defect(level->coarse()->restriction.matrix));
      ++count;
    }
    if (p == 0) {
      const double defect = prob.material_of_node.empty() ? indicator_defect(*m.coarse(), prob.num_components)
                                                          : aggregation_defect(*m.coarse(), prob.material_of_node);
      if (!(defect <= 1e-15)) offenders += std::string(" ") + k.problem;
      worst_indicator = std::max(worst_indicator, defect);
    }
  });
  {
    ExperimentConfig c;
    c.problem = "discontinuous";
    c.size = 200;
    c.coarsening_factor = 10;
    c.p = 0;
    c.material_aware = false;
    const ProblemInstance prob = make_problem(c);
    const auto pre = build_preconditioner(c, prob);
    const double defect = indicator_defect(*pre.coarse(), 1);
    if (!(defect <= 1e-15)) offenders += " discontinuous(material-blind)";
    worst_indicator = std::max(worst_indicator, defect);
    worst = std::max(worst, orthonormality_defect(pre.coarse()->restriction.matrix));
    ++count;
  }
  std::ostringstream d;
  d << count << " restrictions, max |R0 R0^T - I| " << worst << " (<= 1e-10), p=0 indicator mismatch "
    << worst_indicator << " (<= 1e-15 relative; material-aware bases: rows constant per part and material)";
  if (!offenders.empty()) d << ", failing on" << offenders;
  return {worst <= 1e-10 && worst_indicator <= 1e-15, d.str()};
}

// 8
Outcome h_equals_H2() {
  ExperimentConfig c;
  c.problem = "smooth";
  c.p = 1;
  const auto rows = run_sweep(c, "h_eq_H2", {64, 256, 1024});
  std::vector<double> frac;
  bool pass = rows.size() == 3;
  for (const auto& r : rows) {
    frac.push_back(r.report.fractional_iterations);
    pass = pass && r.report.converged;
  }
  const double ratio = *std::max_element(frac.begin(), frac.end()) / *std::min_element(frac.begin(), frac.end());
  pass = pass && ratio <= 2.0;
  return {pass, "fractional iterations " + join(frac, 2) + ", max/min " + join({ratio}, 2) + " (<= 2)"};
}

// 9
Outcome three_level() {
  ExperimentConfig c;
  c.problem = "poisson3d";
  c.size = 64;
  c.coarsening_factor = 4;
  std::ostringstream d;
  bool pass = true;
  for (int p : {0, 1}) {
    c.p = p;
    c.levels = 2;
    const auto two = run_experiment(c);
    c.levels = 3;
    const auto three = run_experiment(c);
    const double ratio = double(three.report.iterations) / double(two.report.iterations);
    pass = pass && two.report.converged && three.report.converged && ratio <= 3.0;
    d << "p=" << p << ": two-level " << two.report.iterations << ", three-level " << three.report.iterations
      << " (ratio " << join({ratio}, 2) << " <= 3); ";
  }
  ExperimentConfig tiny;
  tiny.problem = "poisson3d";
  tiny.size = 16;
  tiny.coarsening_factor = 8;
  tiny.levels = 3;
  bool rejected = false;
  try {
    run_experiment(tiny);
  } catch (const TooSmallForThreeLevels&) {
    rejected = true;
  }
  pass = pass && rejected;
  d << "m=16 H/h=8 three-level " << (rejected ? "rejected" : "NOT rejected");
  return {pass, d.str()};
}

// 10
Outcome oracle_suite(double acceptance_seconds) {
  std::string binaries = DDG_UNIT_TESTS;
  std::vector<std::string> failed;
  const auto t0 = Clock::now();
  int count = 0;
  for (std::size_t start = 0; start < binaries.size();) {
    std::size_t stop = binaries.find(':', start);
    if (stop == std::string::npos) stop = binaries.size();
    const std::string bin = binaries.substr(start, stop - start);
    start = stop + 1;
    ++count;
    const int raw = std::system((bin + " --gtest_brief=1 > /dev/null 2>&1").c_str());
    if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) failed.push_back(bin.substr(bin.find_last_of('/') + 1));
  }
  const double unit_seconds = elapsed(t0);
  const double total = unit_seconds + acceptance_seconds;
  std::ostringstream d;
  d << count << " unit binaries, " << failed.size() << " failing";
  for (const auto& f : failed) d << " " << f;
  d << "; unit " << std::lround(unit_seconds) << " s + acceptance " << std::lround(acceptance_seconds)
    << " s = " << std::lround(total) << " s (< 900 s)";
  return {failed.empty() && total < 900, d.str()};
}

}  // namespace

// Optional arguments select criteria by number; the default runs all ten.
int main(int argc, char** argv) {
  std::vector<bool> selected(11, argc == 1);
  for (int k = 1; k < argc; ++k) {
    const int id = std::atoi(argv[k]);
    if (id >= 1 && id <= 10) selected[id] = true;
  }
  const auto t0 = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"poisson3d iterations by degree", poisson3d_table},
      {"size independence, smooth coefficient", smooth_size_independence},
      {"biharmonic needs higher degree", biharmonic_powers},
      {"coarse approximation order", coarse_order},
      {"coarse error monotone in degree", galerkin_monotone},
      {"preconditioner symmetric positive", cg_admissible},
      {"orthonormal restriction, aggregation at p=0", orthonormal_restrictions},
      {"h = H^2 regime", h_equals_H2},
      {"three-level", three_level},
  };
  int failures = 0;
  auto report = [&](std::size_t id, const std::string& name, const Outcome& o, double secs) {
    if (!o.pass) ++failures;
    std::printf("criterion %2zu %s  %s: %s [%.0f s]\n", id, o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(),
                secs);
    std::fflush(stdout);
  };
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected[k + 1]) continue;
    const auto t = Clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(k + 1, criteria[k].first, o, elapsed(t));
  }
  if (selected[10]) {
    const auto t = Clock::now();
    report(10, "oracle suite", oracle_suite(elapsed(t0)), elapsed(t));
  }
  std::printf("%d of %td criteria failed\n", failures, std::count(selected.begin(), selected.end(), true));
  return failures == 0 ? 0 : 1;
}
