#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gdenet {

/// One value per node.
using Signal = Eigen::VectorXd;

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Undirected, simple, positively weighted graph in compressed adjacency form.
///
/// Both orientations of every edge are stored; neighbor lists are sorted by
/// index. Instances are immutable once built.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from undirected edges. Either orientation is accepted and
  /// repeated pairs collapse to one edge carrying the last weight seen.
  /// Throws GraphError naming the offending edge on an out-of-range index, a
  /// self-loop or a non-positive weight.
  static Graph from_edge_list(std::span<const Edge> edges, int n);

  int num_nodes() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return neighbors_.size() / 2; }

  std::span<const int> neighbors(int v) const noexcept {
    return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::span<const double> weights(int v) const noexcept {
    return {weights_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t hop_degree(int v) const noexcept { return offsets_[v + 1] - offsets_[v]; }

  /// Weighted degree (sum of incident edge weights).
  double degree(int v) const noexcept;
  Eigen::VectorXd degrees() const;
  double max_degree() const;

  bool has_edge(int u, int v) const noexcept;
  /// Weight of (u,v), or 0 when absent.
  double edge_weight(int u, int v) const noexcept;

  /// Edges with u < v in lexicographic order.
  std::vector<Edge> edges() const;

  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
  const std::vector<int>& flat_neighbors() const noexcept { return neighbors_; }
  const std::vector<double>& flat_weights() const noexcept { return weights_; }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  int n_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<int> neighbors_;
  std::vector<double> weights_;
};

// ---- generators -----------------------------------------------------------

/// Erdős–Rényi G(n, p). Unordered pair (i, j), i < j, visited in
/// lexicographic order as pair number c, is kept iff draw c of CounterRng(seed)
/// is below p.
Graph generate_er(int n, double p, std::uint64_t seed);

/// Block of node v under the sizing rule used by generate_sbm: floor(n/blocks)
/// nodes per block, the first n mod blocks blocks get one extra.
std::vector<int> sbm_block_assignment(int n, int blocks);

/// Stochastic block model with the same pair-visiting protocol as generate_er;
/// the threshold is p_in for pairs inside a block and p_out otherwise.
Graph generate_sbm(int n, int blocks, double p_in, double p_out, std::uint64_t seed);

Graph generate_cycle(int n);
Graph generate_path(int n);
Graph generate_complete(int n);

/// Disjoint union; nodes of b are shifted by a.num_nodes().
Graph disjoint_union(const Graph& a, const Graph& b);

/// Relabels node v as perm[v].
Graph permute(const Graph& g, std::span<const int> perm);

// ---- combinatorics --------------------------------------------------------

struct ComponentLabeling {
  std::vector<int> labels;  // component ids ordered by smallest member
  int count = 0;

  std::vector<int> members(int component) const;
};

ComponentLabeling connected_components(const Graph& g);

constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Unweighted hop distances from v; kUnreachable for other components.
std::vector<int> bfs_distances(const Graph& g, int v);

/// BFS truncated at max_hop; nodes further away report kUnreachable.
std::vector<int> bfs_distances(const Graph& g, int v, int max_hop);

/// Closed balls {u : dist(u, v) <= k} for k = 0..max_hop, each sorted.
std::vector<std::vector<int>> k_hop_neighborhoods(const Graph& g, int v, int max_hop);

// ---- edge-list CSV --------------------------------------------------------

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Reads `src,dst[,weight]` rows after a header line. An optional leading
/// `# nodes: N` line fixes the node count; otherwise it is the largest index
/// plus one (or `n_hint` when that is larger).
Graph read_edge_list_csv(std::istream& in, int n_hint = 0);
Graph read_edge_list_csv(const std::string& path, int n_hint = 0);

/// Writes the `# nodes: N` line, the `src,dst,weight` header and one row per
/// undirected edge (u < v).
void write_edge_list_csv(std::ostream& out, const Graph& g);

}  // namespace gdenet
