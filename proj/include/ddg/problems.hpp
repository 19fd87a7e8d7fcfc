#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "ddg/dense.hpp"
#include "ddg/sparse.hpp"

namespace ddg {

/// A linear system with the geometric data the coarse space needs.
struct ProblemInstance {
  CsrMatrix a;
  /// One row per node; vector problems have num_components matrix rows per node.
  DenseMatrix coords;
  int dimension = 0;
  /// Half the PDE order (1 for second-order operators, 2 for the biharmonic).
  int half_order = 1;
  Index num_components = 1;
  /// Empty unless the coefficient has several materials.
  std::vector<Index> material_of_node;
  std::vector<double> rhs;
  double mesh_h = 0.0;
  std::string label;

  Index num_nodes() const noexcept { return coords.rows(); }
};

/// Standard normal entries from a seeded mt19937_64.
std::vector<double> gaussian_rhs(Index n, std::uint64_t seed);

/// 7-point Laplacian on an m^3 cell-centred grid of the unit cube, h = 1/m,
/// node i + m*(j + m*k). Dirichlet on the x = 0 face, Neumann elsewhere.
ProblemInstance poisson3d_7pt(Index m, std::uint64_t seed = 0);

/// Unscaled 5-point Laplacian (4, -1) on the (m-1)^2 interior nodes of the unit
/// square with h = 1/m and Dirichlet boundary; equal to the P1 stiffness
/// matrix of the right-diagonal triangulation.
ProblemInstance poisson2d_5pt(Index m, std::uint64_t seed = 0);

/// 13-point biharmonic on m^2 interior nodes of the unit square, h = 1/(m+1),
/// scaled by 1/h^4, clamped boundary by ghost reflection.
ProblemInstance biharmonic_13pt(Index m, std::uint64_t seed = 0);

struct TriangleMesh {
  std::vector<std::array<double, 2>> points;
  std::vector<std::array<Index, 3>> triangles;
  std::vector<char> boundary;

  Index num_nodes() const noexcept { return static_cast<Index>(points.size()); }
};

/// Structured polar mesh of the annulus 1 <= r <= 5: nr rings (radii linear),
/// ntheta nodes per ring, node ring*ntheta + t, every quad split into two
/// counter-clockwise triangles. Inner and outer rings are boundary.
TriangleMesh annulus_mesh(Index nr, Index ntheta);

/// Annulus mesh with about size^2 interior nodes and near-square elements.
TriangleMesh annulus_mesh_for_size(Index size);

/// Scalar coefficient with optional material ids.
struct Coefficient {
  std::function<double(double, double)> value;
  /// Material id at a point; empty for single-material coefficients.
  std::function<Index(double, double)> material;
  std::string name;
};

Coefficient constant_coefficient(double c);
/// exp(1 + sin(pi (x + y))).
Coefficient smooth_coefficient();
/// smooth + 100 J with J = H(0.25 + cos(pi x) cos(2 pi y)), H(0) = 1; material = J.
Coefficient discontinuous_coefficient();

/// Element stiffness of grad u . grad v on one triangle (coefficient 1).
std::array<std::array<double, 3>, 3> p1_element_stiffness(const std::array<std::array<double, 2>, 3>& pts);

/// Element matrix of grad u : grad v + div u div v, dof order (a,x),(a,y),(b,x),...
std::array<std::array<double, 6>, 6> elasticity_element_stiffness(const std::array<std::array<double, 2>, 3>& pts);

/// Full P1 stiffness (no boundary treatment), coefficient sampled at centroids.
CsrMatrix assemble_p1_stiffness(const TriangleMesh& mesh, const Coefficient& coefficient);
/// Full interleaved elasticity stiffness (no boundary treatment).
CsrMatrix assemble_elasticity_p1(const TriangleMesh& mesh);

/// P1 Poisson with homogeneous Dirichlet nodes eliminated.
ProblemInstance fem_poisson_p1(const TriangleMesh& mesh, const Coefficient& coefficient, std::uint64_t seed = 0);
/// P1 elasticity with homogeneous Dirichlet nodes eliminated.
ProblemInstance fem_elasticity_p1(const TriangleMesh& mesh, std::uint64_t seed = 0);

/// Node, x, y[, z] per line with a header.
void write_coords_csv(const std::filesystem::path& path, const DenseMatrix& coords);
DenseMatrix read_coords_csv(const std::filesystem::path& path);
void write_material_csv(const std::filesystem::path& path, std::span<const Index> material);
std::vector<Index> read_material_csv(const std::filesystem::path& path);

}  // namespace ddg
