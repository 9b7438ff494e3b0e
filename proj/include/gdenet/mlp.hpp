#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

namespace gdenet {

enum class Task { regression, classification };
enum class Metric { mse, r2, accuracy };

Metric parse_metric(const std::string& s);
std::string to_string(Metric m);

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(int epoch)
      : std::runtime_error("training diverged at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

/// Column-wise z-scoring. Columns with zero spread get scale 1.
struct Standardizer {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd scale;

  static Standardizer fit(const Eigen::MatrixXd& X);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& Z) const;
  bool empty() const { return mean.size() == 0; }
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Feed-forward network: affine + ReLU on hidden layers, affine output.
/// Classification models add a softmax on top. Inputs (and regression
/// targets) are standardized with statistics fitted by train().
struct MLPModel {
  std::vector<int> widths;
  std::vector<DenseLayer> layers;
  Task task = Task::regression;
  Standardizer input_scaler;
  Standardizer target_scaler;  // regression only

  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }
  std::size_t parameter_count() const;

  nlohmann::json to_json() const;
  static MLPModel from_json(const nlohmann::json& j);
};

struct TrainConfig {
  int epochs = 500;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int patience = 50;
  double validation_fraction = 0.1;
  double weight_decay = 0.0;  // decoupled (AdamW) decay on weights, not biases

  void validate() const;
  nlohmann::json to_json() const;
};

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  double initial_validation_loss = 0.0;  // before the first update
  int best_epoch = -1;
};

/// He-style uniform weights U(-sqrt(6/fan_in), sqrt(6/fan_in)), zero biases.
MLPModel init_mlp(const std::vector<int>& widths, Task task, std::uint64_t seed);

/// Network output on already standardized inputs, in the standardized target
/// space (logits for classification).
Eigen::MatrixXd forward_raw(const MLPModel& model, const Eigen::MatrixXd& Z);

/// Predictions on raw inputs: regression values or class probabilities.
Eigen::MatrixXd forward(const MLPModel& model, const Eigen::MatrixXd& X);

struct Gradients {
  std::vector<Eigen::MatrixXd> weight;
  std::vector<Eigen::VectorXd> bias;
};

/// Training loss (mean squared error or mean cross-entropy) on standardized
/// inputs Z and targets T (standardized values, or class ids in column 0).
double loss(const MLPModel& model, const Eigen::MatrixXd& Z, const Eigen::MatrixXd& T);
/// Backpropagated gradient of loss().
Gradients loss_gradients(const MLPModel& model, const Eigen::MatrixXd& Z, const Eigen::MatrixXd& T,
                         double* loss_out = nullptr);

/// Fits the scalers on X / Y, then runs Adam on shuffled mini-batches.
/// A validation_fraction of the rows (chosen by the seed) is held out for
/// early stopping; the parameters of the best validation epoch are restored.
/// With zero epochs the model is returned untouched.
TrainHistory train(MLPModel& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const TrainConfig& cfg);

/// mse / r2 on regression outputs; accuracy compares argmax of the
/// prediction rows with the class ids in column 0 of Y.
double score(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& Y, Metric metric);
double evaluate(const MLPModel& model, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, Metric metric);

}  // namespace gdenet
