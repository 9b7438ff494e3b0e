#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "gdenet/graph.hpp"

namespace gdenet {

class CurvatureError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Probability measure on a set of distinct nodes.
struct NodeMeasure {
  std::vector<int> support;
  std::vector<double> masses;

  void validate(int num_nodes) const;
};

/// Mass `alpha` on v itself and 1 - alpha spread over its neighbors in
/// proportion to edge weight (uniform 1/deg on unweighted graphs). Throws
/// CurvatureError for an isolated node.
NodeMeasure neighbor_measure(const Graph& g, int v, double alpha = 0.0);

/// Exact optimal-transport cost between two measures on explicit supports
/// with an arbitrary nonnegative ground cost (rows: mu support, cols: nu
/// support). Solved as a min-cost flow by successive shortest paths.
double transport_cost(std::span<const double> supply, std::span<const double> demand, const Eigen::MatrixXd& cost);

/// 1-Wasserstein distance under the hop metric of g. Returns +infinity when
/// the two supports do not lie in a single connected component.
double wasserstein1(const Graph& g, const NodeMeasure& mu, const NodeMeasure& nu);

struct EdgeCurvature {
  int u = 0, v = 0;
  double kappa = 0.0;
};

/// kappa(u, v) = 1 - W1(m_u, m_v) for an edge (hop distance 1).
EdgeCurvature ollivier_ricci_edge(const Graph& g, int u, int v, double alpha = 0.0);

/// Curvature of every edge, in Graph::edges() order.
std::vector<EdgeCurvature> edge_curvatures(const Graph& g, double alpha = 0.0);

/// Mean curvature of the incident edges; empty for isolated nodes.
std::vector<std::optional<double>> node_curvature(const Graph& g, double alpha = 0.0);

/// `node,curvature`; isolated nodes are skipped.
void write_node_labels_csv(std::ostream& out, std::span<const std::optional<double>> labels);
/// `src,dst,curvature`
void write_edge_labels_csv(std::ostream& out, std::span<const EdgeCurvature> labels);

}  // namespace gdenet
