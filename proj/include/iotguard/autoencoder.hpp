#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "iotguard/transforms.hpp"

namespace iotguard {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

// Fully-connected autoencoder with a sigmoid after every layer. The encoder
// maps n -> hidden... -> m (m < n), the decoder mirrors it back to n.
struct AutoencoderModel {
  std::vector<DenseLayer> encoder_layers;
  std::vector<DenseLayer> decoder_layers;
  int input_dim = 0;
  int latent_dim = 0;

  std::size_t layer_count() const { return encoder_layers.size() + decoder_layers.size(); }
  const DenseLayer& layer(std::size_t i) const;
  DenseLayer& layer(std::size_t i);
};

struct TrainConfig {
  int epochs = 20;
  int batch_size = 256;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  enum class Optimizer { sgd, adam } optimizer = Optimizer::adam;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::vector<int> hidden_widths = {32};
  int latent_dim = 16;
  double validation_fraction = 0.1;
};

struct TrainTrace {
  std::vector<double> train_loss;  // one entry per epoch
  std::vector<double> val_loss;    // NaN when no validation rows were held out
};

// Fan-in-scaled symmetric uniform weights, zero biases, deterministic in seed.
AutoencoderModel init_model(int input_dim, const std::vector<int>& hidden_widths, int latent_dim,
                            std::uint64_t seed);

// Single-row pass; returns (latent z, reconstruction x_hat).
std::pair<Eigen::VectorXd, Eigen::VectorXd> forward(const AutoencoderModel& model,
                                                    const Eigen::VectorXd& x);

// Mean squared error over the vector entries.
double reconstruction_loss(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat);

struct GradientSet {
  std::vector<DenseLayer> encoder_layers;  // same shapes as the model, holding dL/dW and dL/db
  std::vector<DenseLayer> decoder_layers;
};

// Analytic gradient of the mean reconstruction loss over the batch
// (rows = samples) with respect to every weight and bias.
GradientSet gradients(const AutoencoderModel& model, const Eigen::MatrixXd& batch);

// Mini-batch training with deterministic per-epoch shuffling. A validation
// fraction of the rows is held out for the val-loss trace; the loss is checked
// for divergence every epoch.
std::pair<AutoencoderModel, TrainTrace> train(AutoencoderModel model, const FeatureMatrix& data,
                                              const TrainConfig& cfg);

// Per-row reconstruction loss, in row order.
Eigen::VectorXd reconstruction_errors(const AutoencoderModel& model, const FeatureMatrix& data);

nlohmann::json model_to_json(const AutoencoderModel& model);
AutoencoderModel model_from_json(const nlohmann::json& j);

std::string trace_to_csv(const TrainTrace& trace);

}  // namespace iotguard
