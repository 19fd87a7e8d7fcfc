#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ddg/dense.hpp"
#include "ddg/sparse.hpp"

namespace ddg {

/// Undirected graph in adjacency-list CSR form, no self loops.
struct Graph {
  std::vector<Index> offsets{0};
  std::vector<Index> neighbors;
  /// Optional edge lengths parallel to `neighbors`; empty means unit length.
  std::vector<double> lengths;

  Index num_nodes() const noexcept { return static_cast<Index>(offsets.size()) - 1; }
  std::span<const Index> adjacent(Index v) const noexcept {
    return {neighbors.data() + offsets[v], static_cast<std::size_t>(offsets[v + 1] - offsets[v])};
  }
};

/// Graph of the off-diagonal nonzero pattern of A. Edge lengths are
/// (|a_ij| / sqrt(a_ii a_jj))^{-1/2}; they only steer the bisection ordering.
Graph adjacency_graph(const CsrMatrix& a);

/// Node graph of an interleaved vector problem: dof i belongs to node
/// i / num_components, and two nodes are adjacent when any of their dofs couple.
Graph node_graph(const CsrMatrix& a, Index num_components);

/// Non-overlapping assignment of nodes to subdomains.
struct Partition {
  std::vector<Index> assignment;
  Index num_parts = 0;

  Index size() const noexcept { return static_cast<Index>(assignment.size()); }
  /// Members of every part, each sorted ascending.
  std::vector<std::vector<Index>> parts() const;
  std::vector<Index> part_sizes() const;
  /// Throws InvalidArgument unless every id lies in [0, num_parts) and every part is non-empty.
  void validate() const;
};

/// Overlapping subdomains; subdomain i contains part i.
struct OverlapSet {
  std::vector<std::vector<Index>> subdomains;
  Index delta_graph = 0;
};

/// Balanced partition by recursive graph bisection. Each bisection orders the
/// nodes along a pivot-MDS embedding (path distances from farthest-point
/// pivots, the first found from a seeded random start) and splits at the
/// target size; disconnected subsets fall back to breadth-first growth. Then
/// connectivity is repaired and up to ten Kernighan-Lin swap passes run that
/// keep both sides connected.
Partition graph_partition(const CsrMatrix& a, Index num_parts, std::uint64_t seed = 0);
Partition graph_partition(const Graph& g, Index num_parts, std::uint64_t seed = 0);

/// Recursive inertial bisection of points (rows of `coords`, d in {1,2,3}).
/// Every cut splits at the median along the principal inertial axis; with
/// `randomize_first_cut` the first cut uses a seeded random direction instead.
/// num_parts must be a power of two.
Partition inertial_partition(const DenseMatrix& coords, Index num_parts, std::uint64_t seed = 0,
                             bool randomize_first_cut = false);

/// Grows every part by all nodes within graph distance `delta_graph`.
OverlapSet expand_overlap(const CsrMatrix& a, const Partition& part, Index delta_graph);
OverlapSet expand_overlap(const Graph& g, const Partition& part, Index delta_graph);

/// Pattern (values 1) of the part-to-part coupling: (I,J) stored iff I == J or
/// some edge of A joins part I to part J.
CsrMatrix subdomain_adjacency(const Partition& part, const CsrMatrix& a);

/// Maps a node partition / overlap onto interleaved dofs (node-major).
Partition expand_components(const Partition& node_part, Index num_components);
OverlapSet expand_components(const OverlapSet& node_overlap, Index num_components);

/// Whether the nodes of `members` induce a connected subgraph of g.
bool is_connected_subset(const Graph& g, std::span<const Index> members);

/// num_parts = round(n / factor^d), at least 1.
Index parts_for_coarsening(Index num_nodes, double coarsening_factor, int dimension);

/// One subdomain id per line, in node order.
void write_partition(const std::filesystem::path& path, const Partition& part);
Partition read_partition(const std::filesystem::path& path);

}  // namespace ddg
