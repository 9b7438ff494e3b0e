#include "gdenet/graph.hpp"
#include "gdenet/random.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>

namespace gdenet {

namespace {

std::string describe(const Edge& e, std::size_t index) {
  std::ostringstream os;
  os << "edge #" << index << " (" << e.u << ", " << e.v << ", w=" << e.weight << ")";
  return os.str();
}

void check_probability(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw GraphError(std::string(name) + " must lie in [0, 1], got " + std::to_string(p));
  }
}

}  // namespace

Graph Graph::from_edge_list(std::span<const Edge> edges, int n) {
  if (n < 0) throw GraphError("node count must be nonnegative");
  std::map<std::pair<int, int>, double> unique;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    if (e.u < 0 || e.u >= n || e.v < 0 || e.v >= n) {
      throw GraphError(describe(e, i) + ": node index out of range [0, " + std::to_string(n) + ")");
    }
    if (e.u == e.v) throw GraphError(describe(e, i) + ": self-loop");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw GraphError(describe(e, i) + ": weight must be positive and finite");
    }
    unique[{std::min(e.u, e.v), std::max(e.u, e.v)}] = e.weight;
  }

  Graph g;
  g.n_ = n;
  std::vector<std::size_t> counts(static_cast<std::size_t>(n) + 1, 0);
  for (const auto& [key, w] : unique) {
    ++counts[key.first + 1];
    ++counts[key.second + 1];
  }
  std::partial_sum(counts.begin(), counts.end(), counts.begin());
  g.offsets_ = counts;
  g.neighbors_.resize(2 * unique.size());
  g.weights_.resize(2 * unique.size());
  std::vector<std::size_t> cursor(counts.begin(), counts.end() - 1);
  // Keys arrive in (min, max) order, so every neighbor list fills ascending.
  for (const auto& [key, w] : unique) {
    auto [a, b] = key;
    g.neighbors_[cursor[a]] = b;
    g.weights_[cursor[a]++] = w;
    g.neighbors_[cursor[b]] = a;
    g.weights_[cursor[b]++] = w;
  }
  return g;
}

double Graph::degree(int v) const noexcept {
  double d = 0.0;
  for (double w : weights(v)) d += w;
  return d;
}

Eigen::VectorXd Graph::degrees() const {
  Eigen::VectorXd d(n_);
  for (int v = 0; v < n_; ++v) d[v] = degree(v);
  return d;
}

double Graph::max_degree() const {
  double m = 0.0;
  for (int v = 0; v < n_; ++v) m = std::max(m, degree(v));
  return m;
}

bool Graph::has_edge(int u, int v) const noexcept {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

double Graph::edge_weight(int u, int v) const noexcept {
  auto nb = neighbors(u);
  auto it = std::lower_bound(nb.begin(), nb.end(), v);
  if (it == nb.end() || *it != v) return 0.0;
  return weights(u)[static_cast<std::size_t>(it - nb.begin())];
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (int u = 0; u < n_; ++u) {
    auto nb = neighbors(u);
    auto w = weights(u);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k] > u) out.push_back({u, nb[k], w[k]});
    }
  }
  return out;
}

Graph generate_er(int n, double p, std::uint64_t seed) {
  check_probability(p, "p");
  if (n < 0) throw GraphError("n must be nonnegative");
  CounterRng rng(seed);
  std::vector<Edge> edges;
  std::uint64_t pair = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++pair) {
      if (rng.uniform_at(pair) < p) edges.push_back({i, j, 1.0});
    }
  }
  return Graph::from_edge_list(edges, n);
}

std::vector<int> sbm_block_assignment(int n, int blocks) {
  if (blocks < 1 || blocks > n) {
    throw GraphError("block count must lie in [1, n], got " + std::to_string(blocks));
  }
  std::vector<int> block(static_cast<std::size_t>(n));
  int base = n / blocks, extra = n % blocks, v = 0;
  for (int b = 0; b < blocks; ++b) {
    int size = base + (b < extra ? 1 : 0);
    for (int k = 0; k < size; ++k) block[v++] = b;
  }
  return block;
}

Graph generate_sbm(int n, int blocks, double p_in, double p_out, std::uint64_t seed) {
  check_probability(p_in, "p_in");
  check_probability(p_out, "p_out");
  auto block = sbm_block_assignment(n, blocks);
  CounterRng rng(seed);
  std::vector<Edge> edges;
  std::uint64_t pair = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++pair) {
      double p = block[i] == block[j] ? p_in : p_out;
      if (rng.uniform_at(pair) < p) edges.push_back({i, j, 1.0});
    }
  }
  return Graph::from_edge_list(edges, n);
}

Graph generate_cycle(int n) {
  if (n < 3) throw GraphError("cycle needs at least 3 nodes, got " + std::to_string(n));
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, 1.0});
  return Graph::from_edge_list(edges, n);
}

Graph generate_path(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return Graph::from_edge_list(edges, std::max(n, 0));
}

Graph generate_complete(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, 1.0});
  return Graph::from_edge_list(edges, std::max(n, 0));
}

Graph disjoint_union(const Graph& a, const Graph& b) {
  auto edges = a.edges();
  int shift = a.num_nodes();
  for (auto e : b.edges()) edges.push_back({e.u + shift, e.v + shift, e.weight});
  return Graph::from_edge_list(edges, a.num_nodes() + b.num_nodes());
}

Graph permute(const Graph& g, std::span<const int> perm) {
  if (static_cast<int>(perm.size()) != g.num_nodes()) throw GraphError("permutation size mismatch");
  auto edges = g.edges();
  for (auto& e : edges) {
    e.u = perm[e.u];
    e.v = perm[e.v];
  }
  return Graph::from_edge_list(edges, g.num_nodes());
}

std::vector<int> ComponentLabeling::members(int component) const {
  std::vector<int> out;
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (labels[v] == component) out.push_back(static_cast<int>(v));
  return out;
}

ComponentLabeling connected_components(const Graph& g) {
  ComponentLabeling result;
  result.labels.assign(static_cast<std::size_t>(g.num_nodes()), -1);
  std::vector<int> stack;
  for (int s = 0; s < g.num_nodes(); ++s) {
    if (result.labels[s] >= 0) continue;
    int id = result.count++;
    result.labels[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int u : g.neighbors(v)) {
        if (result.labels[u] < 0) {
          result.labels[u] = id;
          stack.push_back(u);
        }
      }
    }
  }
  return result;
}

std::vector<int> bfs_distances(const Graph& g, int v, int max_hop) {
  if (v < 0 || v >= g.num_nodes()) throw GraphError("node " + std::to_string(v) + " out of range");
  std::vector<int> dist(static_cast<std::size_t>(g.num_nodes()), kUnreachable);
  std::deque<int> queue{v};
  dist[v] = 0;
  while (!queue.empty()) {
    int x = queue.front();
    queue.pop_front();
    if (dist[x] >= max_hop) continue;
    for (int u : g.neighbors(x)) {
      if (dist[u] == kUnreachable) {
        dist[u] = dist[x] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

std::vector<int> bfs_distances(const Graph& g, int v) { return bfs_distances(g, v, kUnreachable); }

std::vector<std::vector<int>> k_hop_neighborhoods(const Graph& g, int v, int max_hop) {
  if (max_hop < 0) throw GraphError("max hop must be nonnegative");
  auto dist = bfs_distances(g, v, max_hop);
  std::vector<std::vector<int>> balls(static_cast<std::size_t>(max_hop) + 1);
  for (int u = 0; u < g.num_nodes(); ++u) {
    if (dist[u] == kUnreachable) continue;
    for (int k = dist[u]; k <= max_hop; ++k) balls[k].push_back(u);
  }
  return balls;
}

}  // namespace gdenet
