#include "ddg/problems.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <algorithm>
#include <numbers>
#include <random>
#include <sstream>

namespace ddg {

namespace {

constexpr double kPi = std::numbers::pi;

// Keeps rows/columns whose flag is false; returns old -> new map (-1 when dropped).
std::vector<Index> free_index_map(const std::vector<char>& eliminated, Index& count) {
  std::vector<Index> map(eliminated.size(), -1);
  count = 0;
  for (std::size_t i = 0; i < eliminated.size(); ++i) {
    if (!eliminated[i]) map[i] = count++;
  }
  return map;
}

CsrMatrix eliminate(const CsrMatrix& a, const std::vector<Index>& map, Index count) {
  std::vector<Triplet> trips;
  trips.reserve(a.nnz());
  for (Index i = 0; i < a.rows(); ++i) {
    if (map[i] < 0) continue;
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (map[cols[k]] >= 0) trips.push_back({map[i], map[cols[k]], vals[k]});
    }
  }
  return CsrMatrix::from_triplets(count, count, trips, true);
}

std::array<std::array<double, 2>, 3> triangle_points(const TriangleMesh& mesh, const std::array<Index, 3>& t) {
  return {mesh.points[t[0]], mesh.points[t[1]], mesh.points[t[2]]};
}

// Gradients of the three barycentric functions and the (positive) area.
double p1_gradients(const std::array<std::array<double, 2>, 3>& p, std::array<std::array<double, 2>, 3>& g) {
  const double det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
  if (det == 0.0) throw InvalidArgument("degenerate triangle");
  for (int a = 0; a < 3; ++a) {
    const auto& pb = p[(a + 1) % 3];
    const auto& pc = p[(a + 2) % 3];
    g[a] = {(pb[1] - pc[1]) / det, (pc[0] - pb[0]) / det};
  }
  return std::abs(det) / 2.0;
}

double shortest_edge(const TriangleMesh& mesh) {
  double h = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const auto& a = mesh.points[t[e]];
      const auto& b = mesh.points[t[(e + 1) % 3]];
      h = std::min(h, std::hypot(a[0] - b[0], a[1] - b[1]));
    }
  }
  return h;
}

}  // namespace

std::vector<double> gaussian_rhs(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = normal(rng);
  return v;
}

ProblemInstance poisson3d_7pt(Index m, std::uint64_t seed) {
  if (m < 2) throw InvalidArgument("poisson3d_7pt: m must be at least 2");
  const double h = 1.0 / static_cast<double>(m);
  const double s = 1.0 / (h * h);
  const Index n = m * m * m;
  auto id = [m](Index i, Index j, Index k) { return i + m * (j + m * k); };
  std::vector<Index> offsets{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  offsets.reserve(n + 1);
  cols.reserve(7 * n);
  vals.reserve(7 * n);
  ProblemInstance p;
  p.coords = DenseMatrix(n, 3);
  for (Index k = 0; k < m; ++k) {
    for (Index j = 0; j < m; ++j) {
      for (Index i = 0; i < m; ++i) {
        const Index row = id(i, j, k);
        p.coords(row, 0) = (static_cast<double>(i) + 0.5) * h;
        p.coords(row, 1) = (static_cast<double>(j) + 0.5) * h;
        p.coords(row, 2) = (static_cast<double>(k) + 0.5) * h;
        // Neighbours in increasing index order.
        std::array<Index, 6> nb{};
        int count = 0;
        if (k > 0) nb[count++] = id(i, j, k - 1);
        if (j > 0) nb[count++] = id(i, j - 1, k);
        if (i > 0) nb[count++] = id(i - 1, j, k);
        if (i + 1 < m) nb[count++] = id(i + 1, j, k);
        if (j + 1 < m) nb[count++] = id(i, j + 1, k);
        if (k + 1 < m) nb[count++] = id(i, j, k + 1);
        const double diag = static_cast<double>(count + (i == 0 ? 1 : 0)) * s;
        bool placed = false;
        for (int t = 0; t < count; ++t) {
          if (!placed && nb[t] > row) {
            cols.push_back(row);
            vals.push_back(diag);
            placed = true;
          }
          cols.push_back(nb[t]);
          vals.push_back(-s);
        }
        if (!placed) {
          cols.push_back(row);
          vals.push_back(diag);
        }
        offsets.push_back(static_cast<Index>(cols.size()));
      }
    }
  }
  p.a = CsrMatrix(n, n, std::move(offsets), std::move(cols), std::move(vals), true);
  p.dimension = 3;
  p.half_order = 1;
  p.rhs = gaussian_rhs(n, seed);
  p.mesh_h = h;
  p.label = "poisson3d";
  return p;
}

ProblemInstance poisson2d_5pt(Index m, std::uint64_t seed) {
  if (m < 2) throw InvalidArgument("poisson2d_5pt: m must be at least 2");
  const Index w = m - 1;
  const Index n = w * w;
  const double h = 1.0 / static_cast<double>(m);
  std::vector<Triplet> trips;
  trips.reserve(5 * n);
  ProblemInstance p;
  p.coords = DenseMatrix(n, 2);
  for (Index j = 0; j < w; ++j) {
    for (Index i = 0; i < w; ++i) {
      const Index row = i + w * j;
      p.coords(row, 0) = static_cast<double>(i + 1) * h;
      p.coords(row, 1) = static_cast<double>(j + 1) * h;
      trips.push_back({row, row, 4.0});
      if (i > 0) trips.push_back({row, row - 1, -1.0});
      if (i + 1 < w) trips.push_back({row, row + 1, -1.0});
      if (j > 0) trips.push_back({row, row - w, -1.0});
      if (j + 1 < w) trips.push_back({row, row + w, -1.0});
    }
  }
  p.a = CsrMatrix::from_triplets(n, n, trips, true);
  p.dimension = 2;
  p.rhs = gaussian_rhs(n, seed);
  p.mesh_h = h;
  p.label = "poisson2d";
  return p;
}

ProblemInstance biharmonic_13pt(Index m, std::uint64_t seed) {
  if (m < 4) throw InvalidArgument("biharmonic_13pt: m must be at least 4");
  const Index n = m * m;
  const double h = 1.0 / static_cast<double>(m + 1);
  const double s = 1.0 / (h * h * h * h);
  struct Tap {
    int di, dj;
    double w;
  };
  static constexpr Tap taps[] = {{1, 0, -8},  {-1, 0, -8}, {0, 1, -8},  {0, -1, -8}, {1, 1, 2},
                                 {1, -1, 2},  {-1, 1, 2},  {-1, -1, 2}, {2, 0, 1},   {-2, 0, 1},
                                 {0, 2, 1},   {0, -2, 1}};
  std::vector<Triplet> trips;
  trips.reserve(13 * n);
  ProblemInstance p;
  p.coords = DenseMatrix(n, 2);
  for (Index j = 0; j < m; ++j) {
    for (Index i = 0; i < m; ++i) {
      const Index row = i + m * j;
      p.coords(row, 0) = static_cast<double>(i + 1) * h;
      p.coords(row, 1) = static_cast<double>(j + 1) * h;
      double diag = 20.0;
      for (const auto& t : taps) {
        const Index ii = i + t.di;
        const Index jj = j + t.dj;
        if (ii >= 0 && ii < m && jj >= 0 && jj < m) {
          trips.push_back({row, ii + m * jj, t.w * s});
        } else if (ii == -2 || ii == m + 1 || jj == -2 || jj == m + 1) {
          // Ghost two steps out mirrors this node across the boundary line.
          diag += t.w;
        }
      }
      trips.push_back({row, row, diag * s});
    }
  }
  p.a = CsrMatrix::from_triplets(n, n, trips, true);
  p.dimension = 2;
  p.half_order = 2;
  p.rhs = gaussian_rhs(n, seed);
  p.mesh_h = h;
  p.label = "biharmonic";
  return p;
}

TriangleMesh annulus_mesh(Index nr, Index ntheta) {
  if (nr < 2 || ntheta < 3) throw InvalidArgument("annulus_mesh: need nr >= 2 and ntheta >= 3");
  TriangleMesh mesh;
  mesh.points.reserve(nr * ntheta);
  for (Index ring = 0; ring < nr; ++ring) {
    const double r = 1.0 + 4.0 * static_cast<double>(ring) / static_cast<double>(nr - 1);
    for (Index t = 0; t < ntheta; ++t) {
      const double th = 2.0 * kPi * static_cast<double>(t) / static_cast<double>(ntheta);
      mesh.points.push_back({r * std::cos(th), r * std::sin(th)});
      mesh.boundary.push_back(ring == 0 || ring == nr - 1);
    }
  }
  for (Index ring = 0; ring + 1 < nr; ++ring) {
    for (Index t = 0; t < ntheta; ++t) {
      const Index a = ring * ntheta + t;
      const Index b = ring * ntheta + (t + 1) % ntheta;
      const Index c = (ring + 1) * ntheta + (t + 1) % ntheta;
      const Index d = (ring + 1) * ntheta + t;
      mesh.triangles.push_back({a, c, b});
      mesh.triangles.push_back({a, d, c});
    }
  }
  return mesh;
}

TriangleMesh annulus_mesh_for_size(Index size) {
  if (size < 1) throw InvalidArgument("annulus_mesh_for_size: size must be positive");
  // ntheta / (nr - 1) ~ mean circumference / radial width = 6 pi / 4.
  const double aspect = 1.5 * kPi;
  const Index nr = std::max<Index>(3, std::llround(static_cast<double>(size) / std::sqrt(aspect) + 1.5));
  const Index ntheta =
      std::max<Index>(3, std::llround(static_cast<double>(size) * static_cast<double>(size) / static_cast<double>(nr - 2)));
  return annulus_mesh(nr, ntheta);
}

Coefficient constant_coefficient(double c) {
  return {[c](double, double) { return c; }, {}, "constant"};
}

Coefficient smooth_coefficient() {
  return {[](double x, double y) { return std::exp(1.0 + std::sin(kPi * (x + y))); }, {}, "smooth"};
}

Coefficient discontinuous_coefficient() {
  auto jump = [](double x, double y) -> Index {
    return 0.25 + std::cos(kPi * x) * std::cos(2.0 * kPi * y) >= 0.0 ? 1 : 0;
  };
  return {[jump](double x, double y) {
            return std::exp(1.0 + std::sin(kPi * (x + y))) + 100.0 * static_cast<double>(jump(x, y));
          },
          jump, "discontinuous"};
}

std::array<std::array<double, 3>, 3> p1_element_stiffness(const std::array<std::array<double, 2>, 3>& pts) {
  std::array<std::array<double, 2>, 3> g{};
  const double area = p1_gradients(pts, g);
  std::array<std::array<double, 3>, 3> k{};
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) k[a][b] = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
  }
  return k;
}

std::array<std::array<double, 6>, 6> elasticity_element_stiffness(const std::array<std::array<double, 2>, 3>& pts) {
  std::array<std::array<double, 2>, 3> g{};
  const double area = p1_gradients(pts, g);
  std::array<std::array<double, 6>, 6> k{};
  for (int a = 0; a < 3; ++a) {
    for (int i = 0; i < 2; ++i) {
      for (int b = 0; b < 3; ++b) {
        for (int j = 0; j < 2; ++j) {
          const double lap = i == j ? g[a][0] * g[b][0] + g[a][1] * g[b][1] : 0.0;
          k[2 * a + i][2 * b + j] = area * (lap + g[a][i] * g[b][j]);
        }
      }
    }
  }
  return k;
}

CsrMatrix assemble_p1_stiffness(const TriangleMesh& mesh, const Coefficient& coefficient) {
  const Index n = mesh.num_nodes();
  std::vector<Triplet> trips;
  trips.reserve(9 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const auto pts = triangle_points(mesh, t);
    const double cx = (pts[0][0] + pts[1][0] + pts[2][0]) / 3.0;
    const double cy = (pts[0][1] + pts[1][1] + pts[2][1]) / 3.0;
    const double c = coefficient.value(cx, cy);
    if (!(c > 0.0)) {
      throw InvalidArgument("assemble_p1_stiffness: coefficient " + std::to_string(c) + " at (" +
                            std::to_string(cx) + ", " + std::to_string(cy) + ") is not positive");
    }
    const auto k = p1_element_stiffness(pts);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) trips.push_back({t[a], t[b], c * k[a][b]});
    }
  }
  return CsrMatrix::from_triplets(n, n, trips).as_symmetric(1e-12);
}

CsrMatrix assemble_elasticity_p1(const TriangleMesh& mesh) {
  const Index n = 2 * mesh.num_nodes();
  std::vector<Triplet> trips;
  trips.reserve(36 * mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const auto k = elasticity_element_stiffness(triangle_points(mesh, t));
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) trips.push_back({2 * t[a / 2] + a % 2, 2 * t[b / 2] + b % 2, k[a][b]});
    }
  }
  return CsrMatrix::from_triplets(n, n, trips).as_symmetric(1e-12);
}

ProblemInstance fem_poisson_p1(const TriangleMesh& mesh, const Coefficient& coefficient, std::uint64_t seed) {
  const CsrMatrix full = assemble_p1_stiffness(mesh, coefficient);
  Index count = 0;
  const auto map = free_index_map(mesh.boundary, count);
  ProblemInstance p;
  p.a = eliminate(full, map, count);
  p.coords = DenseMatrix(count, 2);
  for (Index v = 0; v < mesh.num_nodes(); ++v) {
    if (map[v] < 0) continue;
    p.coords(map[v], 0) = mesh.points[v][0];
    p.coords(map[v], 1) = mesh.points[v][1];
    if (coefficient.material) p.material_of_node.push_back(coefficient.material(mesh.points[v][0], mesh.points[v][1]));
  }
  p.dimension = 2;
  p.rhs = gaussian_rhs(count, seed);
  p.mesh_h = shortest_edge(mesh);
  p.label = "fem_poisson_" + coefficient.name;
  return p;
}

ProblemInstance fem_elasticity_p1(const TriangleMesh& mesh, std::uint64_t seed) {
  const CsrMatrix full = assemble_elasticity_p1(mesh);
  std::vector<char> eliminated(2 * mesh.num_nodes());
  for (Index v = 0; v < mesh.num_nodes(); ++v) eliminated[2 * v] = eliminated[2 * v + 1] = mesh.boundary[v];
  Index count = 0;
  const auto map = free_index_map(eliminated, count);
  ProblemInstance p;
  p.a = eliminate(full, map, count);
  p.coords = DenseMatrix(count / 2, 2);
  for (Index v = 0; v < mesh.num_nodes(); ++v) {
    if (map[2 * v] < 0) continue;
    p.coords(map[2 * v] / 2, 0) = mesh.points[v][0];
    p.coords(map[2 * v] / 2, 1) = mesh.points[v][1];
  }
  p.dimension = 2;
  p.num_components = 2;
  p.rhs = gaussian_rhs(count, seed);
  p.mesh_h = shortest_edge(mesh);
  p.label = "fem_elasticity";
  return p;
}

void write_coords_csv(const std::filesystem::path& path, const DenseMatrix& coords) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  static const char* names[] = {"x", "y", "z"};
  out << "node";
  for (Index k = 0; k < coords.cols(); ++k) out << "," << names[k];
  out << "\n" << std::setprecision(17);
  for (Index v = 0; v < coords.rows(); ++v) {
    out << v;
    for (Index k = 0; k < coords.cols(); ++k) out << "," << coords(v, k);
    out << "\n";
  }
}

DenseMatrix read_coords_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty coordinate file");
  const Index d = static_cast<Index>(std::count(line.begin(), line.end(), ','));
  if (d < 1 || d > 3) throw ParseError(path.string() + ": expected 1 to 3 coordinate columns");
  std::vector<double> rows;
  Index n = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Index node = 0;
    if (!(ls >> node) || node != n) throw ParseError(path.string() + ": bad node id on data line " + std::to_string(n + 1));
    for (Index k = 0; k < d; ++k) {
      double x = 0.0;
      if (!(ls >> x)) throw ParseError(path.string() + ": missing coordinate on data line " + std::to_string(n + 1));
      rows.push_back(x);
    }
    ++n;
  }
  DenseMatrix coords(n, d);
  for (Index v = 0; v < n; ++v) {
    for (Index k = 0; k < d; ++k) coords(v, k) = rows[v * d + k];
  }
  return coords;
}

void write_material_csv(const std::filesystem::path& path, std::span<const Index> material) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "node,material\n";
  for (std::size_t v = 0; v < material.size(); ++v) out << v << "," << material[v] << "\n";
}

std::vector<Index> read_material_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<Index> out;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Index node = 0, m = 0;
    if (!(ls >> node >> m) || node != static_cast<Index>(out.size())) {
      throw ParseError(path.string() + ": bad material line " + std::to_string(out.size() + 1));
    }
    out.push_back(m);
  }
  return out;
}

}  // namespace ddg
