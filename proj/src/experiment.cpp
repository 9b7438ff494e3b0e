#include "gdenet/experiment.hpp"

#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "gdenet/csv.hpp"
#include "gdenet/parallel.hpp"
#include "gdenet/random.hpp"

namespace gdenet {

GraphFamily parse_family(const std::string& s) {
  if (s == "er") return GraphFamily::er;
  if (s == "sbm") return GraphFamily::sbm;
  if (s == "cycle") return GraphFamily::cycle;
  throw std::invalid_argument("unknown graph family '" + s + "'");
}

std::string to_string(GraphFamily f) {
  switch (f) {
    case GraphFamily::er: return "er";
    case GraphFamily::sbm: return "sbm";
    case GraphFamily::cycle: return "cycle";
  }
  return "?";
}

void DatasetSpec::validate() const {
  if (count < 0) throw std::invalid_argument("count must be nonnegative");
  if (n < 1) throw std::invalid_argument("n must be positive");
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_min) || !prob(p_max) || p_min > p_max) throw std::invalid_argument("p range must lie in [0, 1]");
  if (!prob(p_in) || !prob(p_out)) throw std::invalid_argument("block probabilities must lie in [0, 1]");
  if (family == GraphFamily::sbm && (blocks_min < 1 || blocks_max > n || blocks_min > blocks_max))
    throw std::invalid_argument("block range must lie in [1, n]");
  if (family == GraphFamily::cycle && n < 3) throw std::invalid_argument("cycles need n >= 3");
}

Graph regenerate(GraphFamily family, int n, double parameter, std::uint64_t seed, double p_in, double p_out) {
  switch (family) {
    case GraphFamily::er: return generate_er(n, parameter, seed);
    case GraphFamily::sbm: return generate_sbm(n, static_cast<int>(parameter), p_in, p_out, seed);
    case GraphFamily::cycle: return generate_cycle(n);
  }
  throw std::invalid_argument("unknown family");
}

std::vector<GraphSample> generate_dataset(const DatasetSpec& spec) {
  spec.validate();
  std::vector<GraphSample> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    CounterRng rng(spec.seed, static_cast<std::uint64_t>(i));
    GraphSample s;
    char id[32];
    std::snprintf(id, sizeof id, "graph_%05d", i);
    s.id = id;
    s.family = spec.family;
    s.n = spec.n;
    s.seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i) + (1ULL << 32));
    switch (spec.family) {
      case GraphFamily::er: s.parameter = spec.p_min == spec.p_max ? spec.p_min : rng.uniform(spec.p_min, spec.p_max); break;
      case GraphFamily::sbm:
        s.parameter = spec.blocks_min + static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.blocks_max - spec.blocks_min + 1)));
        break;
      case GraphFamily::cycle: s.parameter = 0.0; break;
    }
    s.graph = regenerate(spec.family, spec.n, s.parameter, s.seed, spec.p_in, spec.p_out);
    out.push_back(std::move(s));
  }
  return out;
}

void write_manifest_csv(std::ostream& out, const std::vector<GraphSample>& samples) {
  out << "file,family,n,p_or_blocks,seed\n";
  for (const auto& s : samples) {
    out << s.id << ".csv," << to_string(s.family) << ',' << s.n << ',';
    if (s.family == GraphFamily::sbm) {
      out << static_cast<int>(s.parameter);
    } else {
      out << csv::format_double(s.parameter);
    }
    out << ',' << s.seed << '\n';
  }
}

Eigen::MatrixXd graph_feature_matrix(const std::vector<Graph>& graphs, const FeatureConfig& cfg) {
  Eigen::MatrixXd X;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    auto f = extract_features(graphs[i], std::nullopt, std::nullopt, cfg);
    const auto& v = f.graph.values;
    if (i == 0) X.resize(static_cast<Eigen::Index>(graphs.size()), static_cast<Eigen::Index>(v.size()));
    for (std::size_t j = 0; j < v.size(); ++j) X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[j];
  }
  return X;
}

Eigen::MatrixXd node_feature_matrix(const NodeFeatureTensor& f) {
  const auto width = static_cast<Eigen::Index>(f.row_width());
  Eigen::MatrixXd X(f.nodes, width);
  for (int i = 0; i < f.nodes; ++i)
    for (Eigen::Index j = 0; j < width; ++j) X(i, j) = f.values[static_cast<std::size_t>(i) * f.row_width() + j];
  return X;
}

std::vector<std::vector<int>> kfold_split(int n, int folds, std::uint64_t seed) {
  if (folds < 2 || folds > n) throw std::invalid_argument("fold count must lie in [2, n]");
  auto perm = random_permutation(n, seed, 7);
  std::vector<std::vector<int>> out(static_cast<std::size_t>(folds));
  int base = n / folds, extra = n % folds, pos = 0;
  for (int f = 0; f < folds; ++f) {
    int size = base + (f < extra ? 1 : 0);
    out[f].assign(perm.begin() + pos, perm.begin() + pos + size);
    pos += size;
  }
  return out;
}

CrossValidationResult cross_validate(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const std::vector<int>& hidden,
                                     const TrainConfig& cfg, int folds, std::uint64_t seed) {
  if (X.rows() != Y.rows()) throw std::invalid_argument("feature and label row counts differ");
  auto split = kfold_split(static_cast<int>(X.rows()), folds, seed);
  CrossValidationResult result;
  result.fold_mse.assign(static_cast<std::size_t>(folds), 0.0);
  result.fold_baseline_mse.assign(static_cast<std::size_t>(folds), 0.0);
  result.fold_histories.resize(static_cast<std::size_t>(folds));
  std::vector<int> widths{static_cast<int>(X.cols())};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(static_cast<int>(Y.cols()));
  auto gather = [](const Eigen::MatrixXd& M, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), M.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = M.row(rows[i]);
    return out;
  };
  // Folds are independent; each writes only its own slot.
  parallel_for(static_cast<std::size_t>(folds), [&](std::size_t f) {
    std::vector<char> held(static_cast<std::size_t>(X.rows()), 0);
    for (int r : split[f]) held[r] = 1;
    std::vector<int> train_rows;
    for (int r = 0; r < X.rows(); ++r)
      if (!held[r]) train_rows.push_back(r);
    Eigen::MatrixXd Xtr = gather(X, train_rows), Ytr = gather(Y, train_rows);
    Eigen::MatrixXd Xte = gather(X, split[f]), Yte = gather(Y, split[f]);
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(f));
    auto model = init_mlp(widths, Task::regression, fold_cfg.seed);
    result.fold_histories[f] = train(model, Xtr, Ytr, fold_cfg);
    result.fold_mse[f] = evaluate(model, Xte, Yte, Metric::mse);
    Eigen::MatrixXd baseline = Eigen::MatrixXd::Ones(Yte.rows(), 1) * Ytr.colwise().mean();
    result.fold_baseline_mse[f] = score(baseline, Yte, Metric::mse);
  });
  for (int f = 0; f < folds; ++f) {
    result.mean_mse += result.fold_mse[f] / folds;
    result.mean_baseline_mse += result.fold_baseline_mse[f] / folds;
  }
  return result;
}

std::vector<int> default_hidden_widths() { return {128, 128, 128, 128}; }

TrainConfig recovery_train_config() {
  TrainConfig cfg;
  cfg.weight_decay = 1.0;
  return cfg;
}

}  // namespace gdenet
