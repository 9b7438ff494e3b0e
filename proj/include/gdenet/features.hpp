#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "gdenet/chebyshev.hpp"
#include "gdenet/graph.hpp"
#include "gdenet/spectral.hpp"

namespace gdenet {

enum class SolverKind { exact, chebyshev };
enum class VelocityRule { zero, equal_x };

struct FeatureConfig {
  Pde pde = Pde::heat;
  LaplacianKind laplacian = LaplacianKind::symmetric_normalized;
  SolverKind solver = SolverKind::chebyshev;
  int max_moment = 4;        // M
  int max_hop = 4;           // K
  int time_steps = 20;       // T
  double t_max = 20.0;       // grid t_j = j * t_max / T, j = 1..T
  int max_graph_moment = 4;  // S
  VelocityRule velocity = VelocityRule::zero;
  bool include_hop1 = false;  // hops start at 2 unless set
  SolverConfig chebyshev;

  void validate() const;
  int first_hop() const { return include_hop1 ? 1 : 2; }
  int hop_count() const { return max_hop - first_hop() + 1; }
  std::vector<double> times() const;
  nlohmann::json to_json() const;
};

/// h_i(t)[k][m], shape nodes x times x hops x moments.
struct NodeFeatureTensor {
  int nodes = 0, times = 0, hops = 0, moments = 0;
  int first_hop = 2;
  std::vector<double> time_values;
  std::vector<double> values;

  NodeFeatureTensor() = default;
  NodeFeatureTensor(int n, std::vector<double> t, int hop_count, int m, int first);

  std::size_t index(int i, int t, int k, int m) const {
    return ((static_cast<std::size_t>(i) * times + t) * hops + k) * moments + m;
  }
  // k and m are zero-based slots: hop first_hop + k, moment m + 1.
  double& at(int i, int t, int k, int m) { return values[index(i, t, k, m)]; }
  double at(int i, int t, int k, int m) const { return values[index(i, t, k, m)]; }
  std::size_t row_width() const { return static_cast<std::size_t>(times) * hops * moments; }
};

/// w(t)[s][k][m], shape times x graph-moments x hops x moments.
struct GraphFeatureVector {
  int times = 0, graph_moments = 0, hops = 0, moments = 0;
  int first_hop = 2;
  std::vector<double> time_values;
  std::vector<double> values;

  std::size_t index(int t, int s, int k, int m) const {
    return ((static_cast<std::size_t>(t) * graph_moments + s) * hops + k) * moments + m;
  }
  double at(int t, int s, int k, int m) const { return values[index(t, s, k, m)]; }
};

/// x^(i) = x_tilde(v_i) delta_{v_i}.
std::vector<Signal> dirac_initial_conditions(const Signal& x_tilde);
/// x^(i) = delta_{v_i}.
std::vector<Signal> dirac_initial_conditions(int n);

/// Power sums of |u^(i)| over closed k-hop balls around the source node.
/// Source slot i of the tensor must be the Dirac at node i.
NodeFeatureTensor node_moments(const SolutionTensor& solutions, const Graph& g, int max_moment, int max_hop,
                               int first_hop = 2);

/// Accumulates the moments of one source's snapshots into node slot `node`.
void accumulate_node_moments(NodeFeatureTensor& out, const Graph& g, int node, std::span<const Signal> snapshots);

GraphFeatureVector graph_moments(const NodeFeatureTensor& nodes, int max_graph_moment);

struct FeatureResult {
  NodeFeatureTensor nodes;
  GraphFeatureVector graph;
  bool tolerance_met = true;
};

/// Dirac construction, one PDE solve per node over cfg.times(), node moments
/// and graph pooling. The initial velocity follows y_tilde when given,
/// otherwise cfg.velocity.
FeatureResult extract_features(const Graph& g, const std::optional<Signal>& x_tilde,
                               const std::optional<Signal>& y_tilde, const FeatureConfig& cfg);

/// One pipeline run per input signal; results are returned per channel.
std::vector<FeatureResult> extract_features_channels(const Graph& g, std::span<const Signal> signals,
                                                     const FeatureConfig& cfg);

/// `node,time,k,m,value` rows; k is the hop radius and m the moment order.
/// With more than one channel a leading `channel` column is added.
void write_node_features_csv(std::ostream& out, std::span<const NodeFeatureTensor> channels);
/// `time,s,k,m,value` rows, with the same channel rule.
void write_graph_features_csv(std::ostream& out, std::span<const GraphFeatureVector> channels);

}  // namespace gdenet
