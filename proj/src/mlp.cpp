#include "gdenet/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gdenet/random.hpp"

namespace gdenet {

Metric parse_metric(const std::string& s) {
  if (s == "mse") return Metric::mse;
  if (s == "r2") return Metric::r2;
  if (s == "accuracy") return Metric::accuracy;
  throw std::invalid_argument("unknown metric '" + s + "'");
}

std::string to_string(Metric m) {
  switch (m) {
    case Metric::mse: return "mse";
    case Metric::r2: return "r2";
    case Metric::accuracy: return "accuracy";
  }
  return "?";
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer s;
  const double rows = static_cast<double>(X.rows());
  s.mean = X.colwise().sum() / rows;
  Eigen::MatrixXd centered = X.rowwise() - s.mean;
  s.scale = (centered.colwise().squaredNorm() / rows).cwiseSqrt();
  for (Eigen::Index j = 0; j < s.scale.size(); ++j)
    if (!(s.scale[j] > 1e-300)) s.scale[j] = 1.0;
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
  if (empty()) return X;
  return (X.rowwise() - mean).array().rowwise() / scale.array();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& Z) const {
  if (empty()) return Z;
  return (Z.array().rowwise() * scale.array()).matrix().rowwise() + mean;
}

std::size_t MLPModel::parameter_count() const {
  std::size_t count = 0;
  for (const auto& l : layers) count += static_cast<std::size_t>(l.weight.size() + l.bias.size());
  return count;
}

namespace {

nlohmann::json to_json_vector(const Eigen::MatrixXd& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  return flat;
}

Eigen::MatrixXd from_json_matrix(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  auto flat = j.get<std::vector<double>>();
  if (flat.size() != static_cast<std::size_t>(rows * cols)) throw std::invalid_argument("checkpoint shape mismatch");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = flat[static_cast<std::size_t>(i * cols + j2)];
  return m;
}

nlohmann::json scaler_json(const Standardizer& s) {
  if (s.empty()) return nullptr;
  return {{"mean", to_json_vector(s.mean)}, {"scale", to_json_vector(s.scale)}};
}

Standardizer scaler_from_json(const nlohmann::json& j, Eigen::Index width) {
  Standardizer s;
  if (j.is_null()) return s;
  s.mean = from_json_matrix(j.at("mean"), 1, width);
  s.scale = from_json_matrix(j.at("scale"), 1, width);
  return s;
}

}  // namespace

nlohmann::json MLPModel::to_json() const {
  nlohmann::json j;
  j["widths"] = widths;
  j["task"] = task == Task::regression ? "regression" : "classification";
  j["layers"] = nlohmann::json::array();
  for (const auto& l : layers) j["layers"].push_back({{"weight", to_json_vector(l.weight)}, {"bias", to_json_vector(l.bias)}});
  j["input_scaler"] = scaler_json(input_scaler);
  j["target_scaler"] = scaler_json(target_scaler);
  return j;
}

MLPModel MLPModel::from_json(const nlohmann::json& j) {
  MLPModel m;
  m.widths = j.at("widths").get<std::vector<int>>();
  if (m.widths.size() < 2) throw std::invalid_argument("checkpoint needs at least two widths");
  m.task = j.at("task").get<std::string>() == "classification" ? Task::classification : Task::regression;
  const auto& layers = j.at("layers");
  if (layers.size() + 1 != m.widths.size()) throw std::invalid_argument("checkpoint layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    DenseLayer d;
    d.weight = from_json_matrix(layers[l].at("weight"), m.widths[l + 1], m.widths[l]);
    d.bias = from_json_matrix(layers[l].at("bias"), m.widths[l + 1], 1);
    m.layers.push_back(std::move(d));
  }
  m.input_scaler = scaler_from_json(j.at("input_scaler"), m.widths.front());
  m.target_scaler = scaler_from_json(j.at("target_scaler"), m.widths.back());
  return m;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
  if (batch_size < 1) throw std::invalid_argument("batch size must be positive");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (patience < 1) throw std::invalid_argument("patience must be positive");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("validation fraction must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw std::invalid_argument("weight decay must be nonnegative");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},         {"batch_size", batch_size}, {"learning_rate", learning_rate},
          {"beta1", beta1},           {"beta2", beta2},           {"epsilon", epsilon},
          {"seed", seed},             {"patience", patience},     {"validation_fraction", validation_fraction},
          {"weight_decay", weight_decay}};
}

MLPModel init_mlp(const std::vector<int>& widths, Task task, std::uint64_t seed) {
  if (widths.size() < 2) throw std::invalid_argument("an MLP needs at least input and output widths");
  for (int w : widths)
    if (w < 1) throw std::invalid_argument("layer widths must be positive");
  MLPModel m;
  m.widths = widths;
  m.task = task;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    const double limit = std::sqrt(6.0 / in);
    CounterRng rng(seed, l);
    DenseLayer d;
    d.weight.resize(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) d.weight(i, j) = rng.uniform(-limit, limit);
    d.bias = Eigen::VectorXd::Zero(out);
    m.layers.push_back(std::move(d));
  }
  return m;
}

namespace {

// Activations of every layer; acts[0] is the input, acts.back() the output.
std::vector<Eigen::MatrixXd> forward_all(const MLPModel& model, const Eigen::MatrixXd& Z) {
  if (Z.cols() != model.input_width()) throw std::invalid_argument("feature width does not match the model input");
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.layers.size() + 1);
  acts.push_back(Z);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto& layer = model.layers[l];
    Eigen::MatrixXd next = acts.back() * layer.weight.transpose();
    next.rowwise() += layer.bias.transpose();
    if (l + 1 < model.layers.size()) next = next.cwiseMax(0.0);
    acts.push_back(std::move(next));
  }
  return acts;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd p = logits.colwise() - logits.rowwise().maxCoeff();
  p = p.array().exp();
  Eigen::VectorXd sums = p.rowwise().sum();
  return sums.cwiseInverse().asDiagonal() * p;
}

int class_of(const Eigen::MatrixXd& T, Eigen::Index row, int classes) {
  double v = T(row, 0);
  int c = static_cast<int>(std::lround(v));
  if (c < 0 || c >= classes || std::abs(v - c) > 1e-9) throw std::invalid_argument("class labels must be integers in [0, classes)");
  return c;
}

}  // namespace

Eigen::MatrixXd forward_raw(const MLPModel& model, const Eigen::MatrixXd& Z) { return forward_all(model, Z).back(); }

Eigen::MatrixXd forward(const MLPModel& model, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out = forward_raw(model, model.input_scaler.apply(X));
  if (model.task == Task::classification) return softmax_rows(out);
  return model.target_scaler.invert(out);
}

double loss(const MLPModel& model, const Eigen::MatrixXd& Z, const Eigen::MatrixXd& T) {
  Eigen::MatrixXd out = forward_raw(model, Z);
  if (model.task == Task::regression) return (out - T).squaredNorm() / static_cast<double>(out.size());
  Eigen::MatrixXd p = softmax_rows(out);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) total -= std::log(std::max(p(i, class_of(T, i, model.output_width())), 1e-300));
  return total / static_cast<double>(p.rows());
}

Gradients loss_gradients(const MLPModel& model, const Eigen::MatrixXd& Z, const Eigen::MatrixXd& T, double* loss_out) {
  auto acts = forward_all(model, Z);
  const Eigen::MatrixXd& out = acts.back();
  Eigen::MatrixXd delta;
  if (model.task == Task::regression) {
    if (T.rows() != out.rows() || T.cols() != out.cols()) throw std::invalid_argument("target shape mismatch");
    Eigen::MatrixXd diff = out - T;
    if (loss_out) *loss_out = diff.squaredNorm() / static_cast<double>(out.size());
    delta = 2.0 * diff / static_cast<double>(out.size());
  } else {
    Eigen::MatrixXd p = softmax_rows(out);
    double total = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      int c = class_of(T, i, model.output_width());
      total -= std::log(std::max(p(i, c), 1e-300));
      p(i, c) -= 1.0;
    }
    if (loss_out) *loss_out = total / static_cast<double>(p.rows());
    delta = p / static_cast<double>(p.rows());
  }
  Gradients g;
  const std::size_t L = model.layers.size();
  g.weight.resize(L);
  g.bias.resize(L);
  for (std::size_t l = L; l-- > 0;) {
    g.weight[l] = delta.transpose() * acts[l];
    g.bias[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      Eigen::MatrixXd back = delta * model.layers[l].weight;
      delta = (acts[l].array() > 0.0).select(back, 0.0);
    }
  }
  return g;
}

TrainHistory train(MLPModel& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const TrainConfig& cfg) {
  cfg.validate();
  TrainHistory history;
  if (cfg.epochs == 0) return history;
  const Eigen::Index N = X.rows();
  if (Y.rows() != N) throw std::invalid_argument("feature and target row counts differ");
  if (N == 0) throw std::invalid_argument("no training rows");
  if (X.cols() != model.input_width()) throw std::invalid_argument("feature width does not match the model input");
  if (!X.allFinite() || !Y.allFinite()) throw std::invalid_argument("training data must be finite");
  if (model.task == Task::regression && Y.cols() != model.output_width())
    throw std::invalid_argument("target width does not match the model output");

  auto order = random_permutation(static_cast<int>(N), cfg.seed, 1);
  Eigen::Index val_count = static_cast<Eigen::Index>(std::floor(cfg.validation_fraction * static_cast<double>(N)));
  if (cfg.validation_fraction > 0.0 && N >= 2) val_count = std::max<Eigen::Index>(val_count, 1);
  std::vector<int> val_rows(order.begin(), order.begin() + val_count);
  std::vector<int> train_rows(order.begin() + val_count, order.end());
  std::sort(val_rows.begin(), val_rows.end());
  std::sort(train_rows.begin(), train_rows.end());

  auto gather = [](const Eigen::MatrixXd& M, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), M.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = M.row(rows[i]);
    return out;
  };
  Eigen::MatrixXd X_train = gather(X, train_rows), Y_train = gather(Y, train_rows);
  model.input_scaler = Standardizer::fit(X_train);
  if (model.task == Task::regression) model.target_scaler = Standardizer::fit(Y_train);
  auto targets = [&](const Eigen::MatrixXd& raw) {
    return model.task == Task::regression ? model.target_scaler.apply(raw) : raw;
  };
  Eigen::MatrixXd Z_train = model.input_scaler.apply(X_train), T_train = targets(Y_train);
  Eigen::MatrixXd Z_val, T_val;
  if (!val_rows.empty()) {
    Z_val = model.input_scaler.apply(gather(X, val_rows));
    T_val = targets(gather(Y, val_rows));
  }
  history.initial_validation_loss = val_rows.empty() ? loss(model, Z_train, T_train) : loss(model, Z_val, T_val);

  const std::size_t L = model.layers.size();
  std::vector<Eigen::MatrixXd> mW(L), vW(L);
  std::vector<Eigen::VectorXd> mb(L), vb(L);
  for (std::size_t l = 0; l < L; ++l) {
    mW[l] = Eigen::MatrixXd::Zero(model.layers[l].weight.rows(), model.layers[l].weight.cols());
    vW[l] = mW[l];
    mb[l] = Eigen::VectorXd::Zero(model.layers[l].bias.size());
    vb[l] = mb[l];
  }
  std::vector<DenseLayer> best_layers = model.layers;
  double best = std::numeric_limits<double>::infinity();
  long long step = 0;
  CounterRng shuffle_rng(cfg.seed, 2);
  std::vector<int> batch_order(train_rows.size());
  std::iota(batch_order.begin(), batch_order.end(), 0);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(batch_order, shuffle_rng);
    for (std::size_t start = 0; start < batch_order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      std::size_t end = std::min(batch_order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::vector<int> rows(batch_order.begin() + static_cast<std::ptrdiff_t>(start),
                            batch_order.begin() + static_cast<std::ptrdiff_t>(end));
      auto grads = loss_gradients(model, gather(Z_train, rows), gather(T_train, rows));
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (std::size_t l = 0; l < L; ++l) {
        if (cfg.weight_decay > 0.0) model.layers[l].weight *= 1.0 - cfg.learning_rate * cfg.weight_decay;
        mW[l] = cfg.beta1 * mW[l] + (1.0 - cfg.beta1) * grads.weight[l];
        vW[l] = cfg.beta2 * vW[l] + (1.0 - cfg.beta2) * grads.weight[l].cwiseAbs2();
        mb[l] = cfg.beta1 * mb[l] + (1.0 - cfg.beta1) * grads.bias[l];
        vb[l] = cfg.beta2 * vb[l] + (1.0 - cfg.beta2) * grads.bias[l].cwiseAbs2();
        model.layers[l].weight.array() -=
            cfg.learning_rate * (mW[l].array() / c1) / ((vW[l].array() / c2).sqrt() + cfg.epsilon);
        model.layers[l].bias.array() -=
            cfg.learning_rate * (mb[l].array() / c1) / ((vb[l].array() / c2).sqrt() + cfg.epsilon);
      }
    }
    double train_loss = loss(model, Z_train, T_train);
    double val_loss = val_rows.empty() ? train_loss : loss(model, Z_val, T_val);
    if (!std::isfinite(train_loss) || !std::isfinite(val_loss)) throw TrainingDiverged(epoch);
    history.train_loss.push_back(train_loss);
    if (!val_rows.empty()) history.validation_loss.push_back(val_loss);
    if (val_loss < best) {
      best = val_loss;
      best_layers = model.layers;
      history.best_epoch = epoch;
    } else if (epoch - history.best_epoch >= cfg.patience) {
      break;
    }
  }
  model.layers = best_layers;
  return history;
}

double score(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& Y, Metric metric) {
  if (predictions.rows() != Y.rows()) throw std::invalid_argument("prediction and target row counts differ");
  if (predictions.rows() == 0) throw std::invalid_argument("nothing to score");
  switch (metric) {
    case Metric::mse:
      if (predictions.cols() != Y.cols()) throw std::invalid_argument("prediction and target widths differ");
      return (predictions - Y).squaredNorm() / static_cast<double>(Y.size());
    case Metric::r2: {
      if (predictions.cols() != Y.cols()) throw std::invalid_argument("prediction and target widths differ");
      Eigen::RowVectorXd mean = Y.colwise().mean();
      double ss_tot = (Y.rowwise() - mean).squaredNorm();
      if (ss_tot == 0.0) throw std::domain_error("r2 is undefined for constant targets");
      return 1.0 - (predictions - Y).squaredNorm() / ss_tot;
    }
    case Metric::accuracy: {
      Eigen::Index correct = 0;
      for (Eigen::Index i = 0; i < predictions.rows(); ++i) {
        Eigen::Index arg = 0;
        if (predictions.cols() == 1) {
          arg = std::lround(predictions(i, 0));
        } else {
          predictions.row(i).maxCoeff(&arg);
        }
        if (arg == std::lround(Y(i, 0))) ++correct;
      }
      return static_cast<double>(correct) / static_cast<double>(predictions.rows());
    }
  }
  return 0.0;
}

double evaluate(const MLPModel& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, Metric metric) {
  return score(forward(model, X), Y, metric);
}

}  // namespace gdenet
