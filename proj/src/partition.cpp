#include "ddg/partition.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <string>

namespace ddg {

namespace {

// Edge length |a_ij|^{-1/2} after diagonal scaling; for Laplacian-like
// stencils this tracks the relative geometric edge length.
double coupling_length(double aij, double aii, double ajj) {
  const double scale = std::sqrt(aii * ajj);
  const double c = scale > 0.0 ? aij / scale : 0.0;
  return 1.0 / std::sqrt(std::max(c, 1e-4));
}

}  // namespace

Graph adjacency_graph(const CsrMatrix& a) {
  if (a.rows() != a.cols()) throw DimensionError("adjacency_graph: matrix must be square");
  Graph g;
  g.offsets.assign(a.rows() + 1, 0);
  g.neighbors.reserve(a.nnz());
  g.lengths.reserve(a.nnz());
  std::vector<double> diag(a.rows());
  for (Index i = 0; i < a.rows(); ++i) diag[i] = std::abs(a.at(i, i));
  for (Index i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (cols[k] == i) continue;
      g.neighbors.push_back(cols[k]);
      g.lengths.push_back(coupling_length(std::abs(vals[k]), diag[i], diag[cols[k]]));
    }
    g.offsets[i + 1] = static_cast<Index>(g.neighbors.size());
  }
  return g;
}

Graph node_graph(const CsrMatrix& a, Index num_components) {
  if (num_components == 1) return adjacency_graph(a);
  if (num_components < 1 || a.rows() % num_components != 0) {
    throw DimensionError("node_graph: matrix size not divisible by component count");
  }
  const Index nodes = a.rows() / num_components;
  Graph g;
  g.offsets.assign(nodes + 1, 0);
  std::vector<Index> seen(nodes, -1);
  for (Index v = 0; v < nodes; ++v) {
    std::vector<Index> adj;
    for (Index c = 0; c < num_components; ++c) {
      for (Index j : a.row_cols(v * num_components + c)) {
        const Index w = j / num_components;
        if (w != v && seen[w] != v) {
          seen[w] = v;
          adj.push_back(w);
        }
      }
    }
    std::sort(adj.begin(), adj.end());
    g.neighbors.insert(g.neighbors.end(), adj.begin(), adj.end());
    g.offsets[v + 1] = static_cast<Index>(g.neighbors.size());
  }
  // Lengths from the summed block couplings.
  std::vector<double> trace(nodes, 0.0);
  for (Index v = 0; v < nodes; ++v) {
    for (Index c = 0; c < num_components; ++c) trace[v] += std::abs(a.at(v * num_components + c, v * num_components + c));
  }
  g.lengths.resize(g.neighbors.size());
  std::vector<double> block(nodes, 0.0);
  for (Index v = 0; v < nodes; ++v) {
    for (Index c = 0; c < num_components; ++c) {
      const Index row = v * num_components + c;
      const auto cols = a.row_cols(row);
      const auto vals = a.row_values(row);
      for (std::size_t k = 0; k < cols.size(); ++k) block[cols[k] / num_components] += std::abs(vals[k]);
    }
    for (Index e = g.offsets[v]; e < g.offsets[v + 1]; ++e) {
      const Index w = g.neighbors[e];
      g.lengths[e] = coupling_length(block[w], trace[v], trace[w]);
    }
    for (Index c = 0; c < num_components; ++c) {
      for (Index j : a.row_cols(v * num_components + c)) block[j / num_components] = 0.0;
    }
  }
  return g;
}

std::vector<std::vector<Index>> Partition::parts() const {
  std::vector<std::vector<Index>> out(num_parts);
  for (Index v = 0; v < size(); ++v) out[assignment[v]].push_back(v);
  return out;
}

std::vector<Index> Partition::part_sizes() const {
  std::vector<Index> sizes(num_parts, 0);
  for (Index id : assignment) ++sizes[id];
  return sizes;
}

void Partition::validate() const {
  if (num_parts < 1) throw InvalidArgument("partition: num_parts must be positive");
  std::vector<Index> sizes(num_parts, 0);
  for (Index v = 0; v < size(); ++v) {
    const Index id = assignment[v];
    if (id < 0 || id >= num_parts) {
      throw InvalidArgument("partition: node " + std::to_string(v) + " has invalid part id " +
                            std::to_string(id));
    }
    ++sizes[id];
  }
  for (Index p = 0; p < num_parts; ++p) {
    if (sizes[p] == 0) throw InvalidArgument("partition: part " + std::to_string(p) + " is empty");
  }
}

namespace {

// Splits node subsets of a fixed graph into two sides of prescribed size.
class Bisector {
 public:
  explicit Bisector(const Graph& g) : g_(g), local_(g.num_nodes(), -1) {}

  void split(std::span<const Index> nodes, Index target, std::mt19937_64& rng,
             std::vector<Index>& left, std::vector<Index>& right) {
    build_local(nodes);
    const Index m = static_cast<Index>(nodes.size());
    side_.assign(m, 1);
    size_[0] = 0;
    size_[1] = m;
    stamp_.assign(m, 0);
    stamp_value_ = 0;

    grow(target, static_cast<Index>(rng() % static_cast<std::uint64_t>(m)));
    if (connected_) repair_connectivity();
    rebalance(target);
    refine();
    // Part counts must stay satisfiable even if connectivity blocked balancing.
    force_sizes(target);

    left.clear();
    right.clear();
    for (Index v = 0; v < m; ++v) (side_[v] == 0 ? left : right).push_back(nodes[v]);
    for (Index v : nodes) local_[v] = -1;
  }

 private:
  void build_local(std::span<const Index> nodes) {
    const Index m = static_cast<Index>(nodes.size());
    for (Index v = 0; v < m; ++v) local_[nodes[v]] = v;
    off_.assign(m + 1, 0);
    adj_.clear();
    len_.clear();
    const bool weighted = !g_.lengths.empty();
    for (Index v = 0; v < m; ++v) {
      const Index gv = nodes[v];
      for (Index e = g_.offsets[gv]; e < g_.offsets[gv + 1]; ++e) {
        const Index w = g_.neighbors[e];
        if (local_[w] < 0) continue;
        adj_.push_back(local_[w]);
        len_.push_back(weighted ? g_.lengths[e] : 1.0);
      }
      off_[v + 1] = static_cast<Index>(adj_.size());
    }
    // Connectivity of the induced subgraph.
    std::vector<Index> dist;
    bfs(0, dist);
    connected_ = std::none_of(dist.begin(), dist.end(), [](Index d) { return d < 0; });
  }

  std::span<const Index> nbrs(Index v) const {
    return {adj_.data() + off_[v], static_cast<std::size_t>(off_[v + 1] - off_[v])};
  }

  Index bfs(Index start, std::vector<Index>& dist) const {
    const Index m = static_cast<Index>(off_.size()) - 1;
    dist.assign(m, -1);
    std::deque<Index> queue{start};
    dist[start] = 0;
    Index last = start;
    while (!queue.empty()) {
      const Index v = queue.front();
      queue.pop_front();
      last = v;
      for (Index w : nbrs(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
      }
    }
    return last;
  }

  // Weighted shortest-path distances; returns the farthest node.
  Index dijkstra(Index start, std::vector<double>& dist) const {
    const Index m = static_cast<Index>(off_.size()) - 1;
    dist.assign(m, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, Index>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist[start] = 0.0;
    heap.push({0.0, start});
    Index last = start;
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      if (d > dist[v]) continue;
      last = v;
      for (Index e = off_[v]; e < off_[v + 1]; ++e) {
        const Index w = adj_[e];
        const double nd = d + len_[e];
        if (nd < dist[w]) {
          dist[w] = nd;
          heap.push({nd, w});
        }
      }
    }
    return last;
  }

  Index pseudo_peripheral(Index start) const {
    std::vector<Index> dist;
    Index node = start;
    Index ecc = -1;
    for (int it = 0; it < 5; ++it) {
      const Index far = bfs(node, dist);
      if (dist[far] <= ecc) break;
      ecc = dist[far];
      node = far;
    }
    return node;
  }

  void move(Index v) {
    --size_[side_[v]];
    side_[v] ^= 1;
    ++size_[side_[v]];
  }

  // Side 0 gets the `target` nodes at one end of the principal axis of a
  // pivot-MDS embedding: path distances from a few farthest-point pivots,
  // double centred, projected on their leading singular direction. The cut
  // then runs across the long axis of the subset, as an inertial cut would.
  void grow(Index target, Index random_start) {
    if (target <= 0) return;
    if (!connected_) {
      grow_bfs(target, random_start);
      return;
    }
    const Index m = static_cast<Index>(side_.size());
    const Index k = std::min<Index>(kPivots, m);
    Eigen::MatrixXd c(m, k);
    std::vector<double> dist, nearest(m, std::numeric_limits<double>::infinity());
    Index pivot = dijkstra(pseudo_peripheral(random_start), dist);
    for (Index j = 0; j < k; ++j) {
      dijkstra(pivot, dist);
      Index far = pivot;
      for (Index v = 0; v < m; ++v) {
        const double d = dist[v];
        c(v, j) = d * d;
        nearest[v] = std::min(nearest[v], dist[v]);
        if (nearest[v] > nearest[far]) far = v;
      }
      pivot = far;
    }
    // Double centring of the squared distances.
    const Eigen::RowVectorXd col_mean = c.colwise().mean();
    const Eigen::VectorXd row_mean = c.rowwise().mean();
    const double grand = col_mean.mean();
    c = (-0.5 * ((c.rowwise() - col_mean).colwise() - row_mean).array() - 0.5 * grand).matrix();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(c.transpose() * c);
    const Eigen::VectorXd key = c * eig.eigenvectors().col(k - 1);
    std::vector<Index> order(m);
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return key[a] != key[b] ? key[a] < key[b] : a < b; });
    for (Index t = 0; t < target; ++t) move(order[t]);
  }

  void grow_bfs(Index target, Index random_start) {
    const Index m = static_cast<Index>(side_.size());
    std::vector<char> queued(m, 0);
    std::deque<Index> queue;
    Index next_unvisited = 0;
    Index start = pseudo_peripheral(random_start);
    while (size_[0] < target) {
      if (queue.empty()) {
        while (next_unvisited < m && queued[next_unvisited]) ++next_unvisited;
        if (start < 0 || queued[start]) start = next_unvisited;
        if (start >= m) break;
        queue.push_back(start);
        queued[start] = 1;
        start = -1;
      }
      const Index v = queue.front();
      queue.pop_front();
      move(v);
      for (Index w : nbrs(v)) {
        if (!queued[w]) {
          queued[w] = 1;
          queue.push_back(w);
        }
      }
    }
  }

  // Keeps the largest component of each side and hands the rest to the other.
  void repair_connectivity() {
    const Index m = static_cast<Index>(side_.size());
    for (int s : {1, 0}) {
      std::vector<Index> comp(m, -1);
      std::vector<Index> comp_size;
      for (Index v = 0; v < m; ++v) {
        if (side_[v] != s || comp[v] >= 0) continue;
        const Index id = static_cast<Index>(comp_size.size());
        Index count = 0;
        std::deque<Index> queue{v};
        comp[v] = id;
        while (!queue.empty()) {
          const Index u = queue.front();
          queue.pop_front();
          ++count;
          for (Index w : nbrs(u)) {
            if (side_[w] == s && comp[w] < 0) {
              comp[w] = id;
              queue.push_back(w);
            }
          }
        }
        comp_size.push_back(count);
      }
      if (comp_size.size() <= 1) continue;
      const Index keep = std::max_element(comp_size.begin(), comp_size.end()) - comp_size.begin();
      for (Index v = 0; v < m; ++v) {
        if (side_[v] == s && comp[v] != keep) move(v);
      }
    }
  }

  Index gain(Index v) const {
    Index g = 0;
    for (Index w : nbrs(v)) g += side_[w] != side_[v] ? 1 : -1;
    return g;
  }

  bool on_boundary(Index v) const {
    for (Index w : nbrs(v)) {
      if (side_[w] != side_[v]) return true;
    }
    return false;
  }

  // Conservative test that v can leave its side without disconnecting it:
  // all same-side neighbours of v must reach each other through a short
  // search that avoids v.
  bool can_leave(Index v) {
    const int s = side_[v];
    if (size_[s] <= 1) return false;
    same_.clear();
    for (Index w : nbrs(v)) {
      if (side_[w] == s) same_.push_back(w);
    }
    if (same_.size() <= 1) return true;
    if (!connected_) return true;
    ++stamp_value_;
    stamp_[v] = stamp_value_;
    std::deque<Index> queue{same_[0]};
    stamp_[same_[0]] = stamp_value_;
    std::size_t found = 1;
    for (std::size_t k = 1; k < same_.size(); ++k) found += stamp_[same_[k]] == stamp_value_;
    Index visited = 0;
    constexpr Index kSearchLimit = 256;
    while (!queue.empty() && visited < kSearchLimit) {
      const Index u = queue.front();
      queue.pop_front();
      ++visited;
      for (Index w : nbrs(u)) {
        if (side_[w] != s || stamp_[w] == stamp_value_) continue;
        stamp_[w] = stamp_value_;
        if (std::find(same_.begin(), same_.end(), w) != same_.end() && ++found == same_.size()) {
          return true;
        }
        queue.push_back(w);
      }
    }
    return found == same_.size();
  }

  void rebalance(Index target) {
    const Index m = static_cast<Index>(side_.size());
    while (size_[0] != target) {
      const int from = size_[0] > target ? 0 : 1;
      std::vector<std::pair<Index, Index>> cands;  // (-gain, node)
      for (Index v = 0; v < m; ++v) {
        if (side_[v] == from && on_boundary(v)) cands.emplace_back(-gain(v), v);
      }
      std::sort(cands.begin(), cands.end());
      Index moved = 0;
      for (const auto& [neg_gain, v] : cands) {
        if (size_[0] == target) break;
        if (side_[v] != from || !on_boundary(v) || !can_leave(v)) continue;
        move(v);
        ++moved;
      }
      if (moved == 0) break;
    }
  }

  // Kernighan-Lin style pair swaps; sizes are unchanged by construction.
  void refine() {
    const Index m = static_cast<Index>(side_.size());
    for (int pass = 0; pass < 10; ++pass) {
      std::vector<std::pair<Index, Index>> cand[2];
      for (Index v = 0; v < m; ++v) {
        if (on_boundary(v)) cand[side_[v]].emplace_back(-gain(v), v);
      }
      std::sort(cand[0].begin(), cand[0].end());
      std::sort(cand[1].begin(), cand[1].end());
      std::vector<char> locked(m, 0);
      std::size_t ia = 0;
      std::size_t ib = 0;
      Index swaps = 0;
      while (ia < cand[0].size() && ib < cand[1].size()) {
        if (-cand[0][ia].first - cand[1][ib].first <= 0) break;
        const Index a = cand[0][ia].second;
        const Index b = cand[1][ib].second;
        if (locked[a] || side_[a] != 0) { ++ia; continue; }
        if (locked[b] || side_[b] != 1) { ++ib; continue; }
        const Index ga = gain(a);
        const Index gb = gain(b);
        const bool adjacent = std::find(nbrs(a).begin(), nbrs(a).end(), b) != nbrs(a).end();
        if (ga + gb - (adjacent ? 2 : 0) <= 0) {
          (ga < gb ? ia : ib)++;
          continue;
        }
        if (!can_leave(a)) { ++ia; continue; }
        move(a);
        if (!can_leave(b)) {
          move(a);
          ++ib;
          continue;
        }
        move(b);
        locked[a] = locked[b] = 1;
        ++ia;
        ++ib;
        ++swaps;
      }
      if (swaps == 0) break;
    }
  }

  void force_sizes(Index target) {
    const Index m = static_cast<Index>(side_.size());
    for (Index v = 0; v < m && size_[0] != target; ++v) {
      const int from = size_[0] > target ? 0 : 1;
      if (side_[v] == from && on_boundary(v)) move(v);
    }
    for (Index v = 0; v < m && size_[0] != target; ++v) {
      const int from = size_[0] > target ? 0 : 1;
      if (side_[v] == from) move(v);
    }
  }

  static constexpr Index kPivots = 8;
  const Graph& g_;
  std::vector<Index> local_;
  std::vector<Index> off_;
  std::vector<Index> adj_;
  std::vector<double> len_;
  std::vector<int> side_;
  Index size_[2] = {0, 0};
  bool connected_ = true;
  std::vector<Index> stamp_;
  Index stamp_value_ = 0;
  std::vector<Index> same_;
};

void bisect_recursive(Bisector& bisector, std::vector<Index> nodes, Index num_parts, Index first_id,
                      std::mt19937_64& rng, std::vector<Index>& assignment) {
  if (num_parts == 1) {
    for (Index v : nodes) assignment[v] = first_id;
    return;
  }
  const Index left_parts = num_parts / 2;
  const Index n = static_cast<Index>(nodes.size());
  const Index target = std::clamp<Index>(
      static_cast<Index>(std::llround(static_cast<double>(n) * left_parts / num_parts)), left_parts,
      n - (num_parts - left_parts));
  std::vector<Index> left;
  std::vector<Index> right;
  bisector.split(nodes, target, rng, left, right);
  nodes.clear();
  nodes.shrink_to_fit();
  bisect_recursive(bisector, std::move(left), left_parts, first_id, rng, assignment);
  bisect_recursive(bisector, std::move(right), num_parts - left_parts, first_id + left_parts, rng,
                   assignment);
}

}  // namespace

Partition graph_partition(const Graph& g, Index num_parts, std::uint64_t seed) {
  const Index n = g.num_nodes();
  if (num_parts < 1) throw InvalidArgument("graph_partition: num_parts must be at least 1");
  if (num_parts > n) {
    throw InvalidArgument("graph_partition: num_parts (" + std::to_string(num_parts) +
                          ") exceeds node count (" + std::to_string(n) + ")");
  }
  Partition part;
  part.num_parts = num_parts;
  part.assignment.assign(n, 0);
  if (num_parts == 1) return part;
  std::mt19937_64 rng(seed);
  Bisector bisector(g);
  std::vector<Index> all(n);
  std::iota(all.begin(), all.end(), Index{0});
  bisect_recursive(bisector, std::move(all), num_parts, 0, rng, part.assignment);
  return part;
}

Partition graph_partition(const CsrMatrix& a, Index num_parts, std::uint64_t seed) {
  return graph_partition(adjacency_graph(a), num_parts, seed);
}

namespace {

void inertial_recursive(const DenseMatrix& coords, std::vector<Index> nodes, Index num_parts,
                        Index first_id, bool random_cut, std::mt19937_64& rng,
                        std::vector<Index>& assignment) {
  if (num_parts == 1) {
    for (Index v : nodes) assignment[v] = first_id;
    return;
  }
  const Index d = coords.cols();
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(d);
  if (random_cut) {
    std::normal_distribution<double> normal;
    while (dir.norm() == 0.0) {
      for (Index k = 0; k < d; ++k) dir[k] = normal(rng);
    }
    dir.normalize();
  } else {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (Index v : nodes) {
      for (Index k = 0; k < d; ++k) mean[k] += coords(v, k);
    }
    mean /= static_cast<double>(nodes.size());
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (Index v : nodes) {
      Eigen::VectorXd x(d);
      for (Index k = 0; k < d; ++k) x[k] = coords(v, k) - mean[k];
      cov += x * x.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const double top = lambda[d - 1];
    // Degenerate top eigenspace (e.g. a square lattice): pick the coordinate
    // axis with the largest projection onto it, lowest index first.
    Index first_top = d - 1;
    while (first_top > 0 && lambda[first_top - 1] >= top - 1e-10 * std::abs(top)) --first_top;
    const Eigen::MatrixXd space = eig.eigenvectors().rightCols(d - first_top);
    double best = -1.0;
    for (Index k = 0; k < d; ++k) {
      const Eigen::VectorXd proj = space * space.row(k).transpose();
      if (proj.norm() > best + 1e-12) {
        best = proj.norm();
        dir = proj / proj.norm();
      }
    }
  }
  std::vector<std::pair<double, Index>> keyed;
  keyed.reserve(nodes.size());
  for (Index v : nodes) {
    double s = 0.0;
    for (Index k = 0; k < d; ++k) s += dir[k] * coords(v, k);
    keyed.emplace_back(s, v);
  }
  std::sort(keyed.begin(), keyed.end());
  const std::size_t half = keyed.size() / 2;
  std::vector<Index> left;
  std::vector<Index> right;
  for (std::size_t k = 0; k < keyed.size(); ++k) (k < half ? left : right).push_back(keyed[k].second);
  nodes.clear();
  inertial_recursive(coords, std::move(left), num_parts / 2, first_id, false, rng, assignment);
  inertial_recursive(coords, std::move(right), num_parts / 2, first_id + num_parts / 2, false, rng,
                     assignment);
}

}  // namespace

Partition inertial_partition(const DenseMatrix& coords, Index num_parts, std::uint64_t seed,
                             bool randomize_first_cut) {
  if (num_parts < 1 || (num_parts & (num_parts - 1)) != 0) {
    throw InvalidArgument("inertial_partition: num_parts must be a power of two (got " +
                          std::to_string(num_parts) + "); use graph_partition for other counts");
  }
  if (coords.cols() < 1 || coords.cols() > 3) {
    throw InvalidArgument("inertial_partition: coordinates must have 1 to 3 columns");
  }
  if (num_parts > coords.rows()) {
    throw InvalidArgument("inertial_partition: more parts than points");
  }
  Partition part;
  part.num_parts = num_parts;
  part.assignment.assign(coords.rows(), 0);
  std::vector<Index> all(coords.rows());
  std::iota(all.begin(), all.end(), Index{0});
  std::mt19937_64 rng(seed);
  inertial_recursive(coords, std::move(all), num_parts, 0, randomize_first_cut, rng, part.assignment);
  return part;
}

OverlapSet expand_overlap(const Graph& g, const Partition& part, Index delta_graph) {
  if (part.size() != g.num_nodes()) {
    throw DimensionError("expand_overlap: partition covers " + std::to_string(part.size()) +
                         " nodes, graph has " + std::to_string(g.num_nodes()));
  }
  OverlapSet out;
  out.delta_graph = delta_graph;
  out.subdomains = part.parts();
  if (delta_graph <= 0) return out;
  std::vector<Index> mark(g.num_nodes(), -1);
  for (Index p = 0; p < part.num_parts; ++p) {
    auto& members = out.subdomains[p];
    for (Index v : members) mark[v] = p;
    std::size_t frontier_begin = 0;
    for (Index layer = 0; layer < delta_graph; ++layer) {
      const std::size_t frontier_end = members.size();
      for (std::size_t k = frontier_begin; k < frontier_end; ++k) {
        for (Index w : g.adjacent(members[k])) {
          if (mark[w] != p) {
            mark[w] = p;
            members.push_back(w);
          }
        }
      }
      frontier_begin = frontier_end;
    }
    std::sort(members.begin(), members.end());
  }
  return out;
}

OverlapSet expand_overlap(const CsrMatrix& a, const Partition& part, Index delta_graph) {
  return expand_overlap(adjacency_graph(a), part, delta_graph);
}

CsrMatrix subdomain_adjacency(const Partition& part, const CsrMatrix& a) {
  if (part.size() != a.rows()) throw DimensionError("subdomain_adjacency: partition size mismatch");
  std::vector<Triplet> trips;
  for (Index p = 0; p < part.num_parts; ++p) trips.push_back({p, p, 1.0});
  for (Index i = 0; i < a.rows(); ++i) {
    const Index pi = part.assignment[i];
    for (Index j : a.row_cols(i)) {
      const Index pj = part.assignment[j];
      if (pi != pj) trips.push_back({pi, pj, 1.0});
    }
  }
  const CsrMatrix summed = CsrMatrix::from_triplets(part.num_parts, part.num_parts, trips);
  return CsrMatrix(summed.rows(), summed.cols(), {summed.row_offsets().begin(), summed.row_offsets().end()},
                   {summed.col_indices().begin(), summed.col_indices().end()},
                   std::vector<double>(summed.nnz(), 1.0), true);
}

Partition expand_components(const Partition& node_part, Index num_components) {
  Partition out;
  out.num_parts = node_part.num_parts;
  out.assignment.reserve(node_part.size() * num_components);
  for (Index id : node_part.assignment) {
    for (Index c = 0; c < num_components; ++c) out.assignment.push_back(id);
  }
  return out;
}

OverlapSet expand_components(const OverlapSet& node_overlap, Index num_components) {
  OverlapSet out;
  out.delta_graph = node_overlap.delta_graph;
  out.subdomains.reserve(node_overlap.subdomains.size());
  for (const auto& sub : node_overlap.subdomains) {
    std::vector<Index> dofs;
    dofs.reserve(sub.size() * num_components);
    for (Index v : sub) {
      for (Index c = 0; c < num_components; ++c) dofs.push_back(v * num_components + c);
    }
    out.subdomains.push_back(std::move(dofs));
  }
  return out;
}

bool is_connected_subset(const Graph& g, std::span<const Index> members) {
  if (members.empty()) return true;
  std::vector<char> inside(g.num_nodes(), 0);
  for (Index v : members) inside[v] = 1;
  std::vector<char> seen(g.num_nodes(), 0);
  std::deque<Index> queue{members[0]};
  seen[members[0]] = 1;
  std::size_t count = 0;
  while (!queue.empty()) {
    const Index v = queue.front();
    queue.pop_front();
    ++count;
    for (Index w : g.adjacent(v)) {
      if (inside[w] && !seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
    }
  }
  return count == members.size();
}

Index parts_for_coarsening(Index num_nodes, double coarsening_factor, int dimension) {
  if (coarsening_factor < 1.0) throw InvalidArgument("coarsening factor must be at least 1");
  const double parts = static_cast<double>(num_nodes) / std::pow(coarsening_factor, dimension);
  return std::clamp<Index>(static_cast<Index>(std::llround(parts)), 1, num_nodes);
}

void write_partition(const std::filesystem::path& path, const Partition& part) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (Index id : part.assignment) out << id << "\n";
}

Partition read_partition(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  Partition part;
  Index id = 0;
  while (in >> id) {
    part.assignment.push_back(id);
    part.num_parts = std::max(part.num_parts, id + 1);
  }
  if (!in.eof()) throw ParseError(path.string() + ": expected one integer per line");
  part.validate();
  return part;
}

}  // namespace ddg
