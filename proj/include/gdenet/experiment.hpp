#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gdenet/features.hpp"
#include "gdenet/graph.hpp"
#include "gdenet/mlp.hpp"

namespace gdenet {

enum class GraphFamily { er, sbm, cycle };

GraphFamily parse_family(const std::string& s);
std::string to_string(GraphFamily f);

/// A family of random graphs with per-graph parameters drawn from a range.
struct DatasetSpec {
  GraphFamily family = GraphFamily::er;
  int count = 1;
  int n = 100;
  double p_min = 0.01, p_max = 0.1;  // ER edge probability range
  int blocks_min = 5, blocks_max = 25;  // SBM block count range
  double p_in = 0.5, p_out = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GraphSample {
  std::string id;
  GraphFamily family = GraphFamily::er;
  int n = 0;
  double parameter = 0.0;  // p for ER, block count for SBM, 0 for cycles
  std::uint64_t seed = 0;  // seed handed to the generator
  Graph graph;
};

/// Sample i draws its parameter from CounterRng(spec.seed, i) (first draw)
/// and generates its graph with seed derive_seed(spec.seed, i + 2^32).
std::vector<GraphSample> generate_dataset(const DatasetSpec& spec);

/// Regenerates a graph from its manifest entry.
Graph regenerate(GraphFamily family, int n, double parameter, std::uint64_t seed, double p_in = 0.5,
                 double p_out = 0.05);

/// Manifest CSV `file,family,n,p_or_blocks,seed`.
void write_manifest_csv(std::ostream& out, const std::vector<GraphSample>& samples);

/// One row per graph: the flattened graph-level features.
Eigen::MatrixXd graph_feature_matrix(const std::vector<Graph>& graphs, const FeatureConfig& cfg);

/// One row per node: the flattened node-level features.
Eigen::MatrixXd node_feature_matrix(const NodeFeatureTensor& f);

/// Rows of `n` shuffled with the seed and dealt into `folds` contiguous
/// near-equal parts; every row lands in exactly one fold.
std::vector<std::vector<int>> kfold_split(int n, int folds, std::uint64_t seed);

struct CrossValidationResult {
  std::vector<double> fold_mse;
  std::vector<double> fold_baseline_mse;  // predict the training-fold mean
  std::vector<TrainHistory> fold_histories;
  double mean_mse = 0.0;
  double mean_baseline_mse = 0.0;
};

/// Trains a fresh MLP (input width, hidden..., output width) per fold on the
/// remaining folds and scores MSE on the held-out fold.
CrossValidationResult cross_validate(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const std::vector<int>& hidden,
                                     const TrainConfig& cfg, int folds, std::uint64_t seed);

/// Hidden widths used for parameter recovery: four layers of 128.
std::vector<int> default_hidden_widths();

/// Training settings used for parameter recovery: TrainConfig defaults plus
/// weight decay 1, which keeps the wide network from overfitting a few
/// hundred graphs.
TrainConfig recovery_train_config();

}  // namespace gdenet
