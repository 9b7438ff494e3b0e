#include "gdenet/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "gdenet/csv.hpp"
#include "gdenet/parallel.hpp"

namespace gdenet {

void NodeMeasure::validate(int num_nodes) const {
  if (support.size() != masses.size()) throw CurvatureError("support and masses differ in length");
  if (support.empty()) throw CurvatureError("empty measure");
  std::set<int> seen;
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (support[i] < 0 || support[i] >= num_nodes) throw CurvatureError("support node out of range");
    if (!seen.insert(support[i]).second) throw CurvatureError("support nodes must be distinct");
    if (!(masses[i] >= 0.0)) throw CurvatureError("masses must be nonnegative");
    total += masses[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw CurvatureError("masses must sum to 1");
}

NodeMeasure neighbor_measure(const Graph& g, int v, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw CurvatureError("laziness must lie in [0, 1)");
  if (g.hop_degree(v) == 0) throw CurvatureError("node " + std::to_string(v) + " is isolated");
  NodeMeasure m;
  double d = g.degree(v);
  auto nb = g.neighbors(v);
  auto w = g.weights(v);
  if (alpha > 0.0) {
    m.support.push_back(v);
    m.masses.push_back(alpha);
  }
  for (std::size_t k = 0; k < nb.size(); ++k) {
    m.support.push_back(nb[k]);
    m.masses.push_back((1.0 - alpha) * w[k] / d);
  }
  return m;
}

double transport_cost(std::span<const double> supply, std::span<const double> demand, const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(supply.size());
  const int k = static_cast<int>(demand.size());
  if (cost.rows() != m || cost.cols() != k) throw std::invalid_argument("cost matrix shape mismatch");
  double supply_total = 0.0, demand_total = 0.0;
  for (double x : supply) supply_total += x;
  for (double x : demand) demand_total += x;
  if (std::abs(supply_total - demand_total) > 1e-12 * std::max(1.0, supply_total))
    throw std::invalid_argument("supply and demand totals differ");
  constexpr double kEps = 1e-15;
  // Residual network: source 0, supply nodes 1..m, demand nodes m+1..m+k, sink m+k+1.
  struct Arc {
    int to;
    double cap;
    double cost;
    int rev;
  };
  const int nodes = m + k + 2, source = 0, sink = m + k + 1;
  std::vector<std::vector<Arc>> adj(static_cast<std::size_t>(nodes));
  auto add_arc = [&](int a, int b, double cap, double c) {
    adj[a].push_back({b, cap, c, static_cast<int>(adj[b].size())});
    adj[b].push_back({a, 0.0, -c, static_cast<int>(adj[a].size()) - 1});
  };
  const double inf_cap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i)
    if (supply[i] > 0.0) add_arc(source, 1 + i, supply[i], 0.0);
  for (int j = 0; j < k; ++j)
    if (demand[j] > 0.0) add_arc(1 + m + j, sink, demand[j], 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) add_arc(1 + i, 1 + m + j, inf_cap, cost(i, j));

  double total = 0.0;
  std::vector<double> dist(static_cast<std::size_t>(nodes));
  std::vector<int> prev_node(static_cast<std::size_t>(nodes)), prev_arc(static_cast<std::size_t>(nodes));
  const int max_rounds = 4 * (m + 1) * (k + 1) + 16;
  for (int round = 0;; ++round) {
    if (round > max_rounds) throw std::runtime_error("transport solver did not terminate");
    // Bellman-Ford: residual arcs may carry negative cost.
    std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
    dist[source] = 0.0;
    for (int pass = 0; pass < nodes; ++pass) {
      bool changed = false;
      for (int a = 0; a < nodes; ++a) {
        if (!std::isfinite(dist[a])) continue;
        for (int e = 0; e < static_cast<int>(adj[a].size()); ++e) {
          const Arc& arc = adj[a][e];
          if (arc.cap <= kEps) continue;
          double nd = dist[a] + arc.cost;
          if (nd < dist[arc.to] - 1e-15) {
            dist[arc.to] = nd;
            prev_node[arc.to] = a;
            prev_arc[arc.to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (!std::isfinite(dist[sink])) break;
    double push = inf_cap;
    for (int v = sink; v != source; v = prev_node[v]) push = std::min(push, adj[prev_node[v]][prev_arc[v]].cap);
    if (push <= kEps) break;
    for (int v = sink; v != source; v = prev_node[v]) {
      Arc& arc = adj[prev_node[v]][prev_arc[v]];
      arc.cap -= push;
      adj[v][arc.rev].cap += push;
    }
    total += push * dist[sink];
  }
  return total;
}

double wasserstein1(const Graph& g, const NodeMeasure& mu, const NodeMeasure& nu) {
  mu.validate(g.num_nodes());
  nu.validate(g.num_nodes());
  auto comps = connected_components(g);
  int comp = comps.labels[mu.support[0]];
  for (int v : mu.support)
    if (comps.labels[v] != comp) return std::numeric_limits<double>::infinity();
  for (int v : nu.support)
    if (comps.labels[v] != comp) return std::numeric_limits<double>::infinity();
  Eigen::MatrixXd cost(mu.support.size(), nu.support.size());
  for (std::size_t i = 0; i < mu.support.size(); ++i) {
    auto d = bfs_distances(g, mu.support[i]);
    for (std::size_t j = 0; j < nu.support.size(); ++j) cost(i, j) = d[nu.support[j]];
  }
  return transport_cost(mu.masses, nu.masses, cost);
}

EdgeCurvature ollivier_ricci_edge(const Graph& g, int u, int v, double alpha) {
  if (u < 0 || v < 0 || u >= g.num_nodes() || v >= g.num_nodes() || !g.has_edge(u, v))
    throw CurvatureError("(" + std::to_string(u) + ", " + std::to_string(v) + ") is not an edge");
  // Solve in a fixed orientation so kappa(u, v) and kappa(v, u) are bit-identical.
  const int a = std::min(u, v), b = std::max(u, v);
  double w1 = wasserstein1(g, neighbor_measure(g, a, alpha), neighbor_measure(g, b, alpha));
  return {u, v, 1.0 - w1};
}

std::vector<EdgeCurvature> edge_curvatures(const Graph& g, double alpha) {
  auto edges = g.edges();
  std::vector<EdgeCurvature> out(edges.size());
  parallel_for(edges.size(), [&](std::size_t i) { out[i] = ollivier_ricci_edge(g, edges[i].u, edges[i].v, alpha); });
  return out;
}

std::vector<std::optional<double>> node_curvature(const Graph& g, double alpha) {
  auto edges = edge_curvatures(g, alpha);
  std::vector<double> sum(static_cast<std::size_t>(g.num_nodes()), 0.0);
  std::vector<int> count(static_cast<std::size_t>(g.num_nodes()), 0);
  for (const auto& e : edges) {
    sum[e.u] += e.kappa;
    sum[e.v] += e.kappa;
    ++count[e.u];
    ++count[e.v];
  }
  std::vector<std::optional<double>> out(static_cast<std::size_t>(g.num_nodes()));
  for (int v = 0; v < g.num_nodes(); ++v)
    if (count[v] > 0) out[v] = sum[v] / count[v];
  return out;
}

void write_node_labels_csv(std::ostream& out, std::span<const std::optional<double>> labels) {
  out << "node,curvature\n";
  for (std::size_t v = 0; v < labels.size(); ++v)
    if (labels[v]) out << v << ',' << csv::format_double(*labels[v]) << '\n';
}

void write_edge_labels_csv(std::ostream& out, std::span<const EdgeCurvature> labels) {
  out << "src,dst,curvature\n";
  for (const auto& e : labels) out << e.u << ',' << e.v << ',' << csv::format_double(e.kappa) << '\n';
}

}  // namespace gdenet
