#include "iotguard/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "iotguard/errors.hpp"
#include "iotguard/numfmt.hpp"
#include "iotguard/rng.hpp"

namespace iotguard {

const DenseLayer& AutoencoderModel::layer(std::size_t i) const {
  return i < encoder_layers.size() ? encoder_layers[i]
                                   : decoder_layers[i - encoder_layers.size()];
}

DenseLayer& AutoencoderModel::layer(std::size_t i) {
  return i < encoder_layers.size() ? encoder_layers[i]
                                   : decoder_layers[i - encoder_layers.size()];
}

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return (1.0 / (1.0 + (-z.array()).exp())).matrix();
}

DenseLayer init_layer(int out_dim, int in_dim, Rng& rng) {
  DenseLayer l;
  l.weights.resize(out_dim, in_dim);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_dim));
  for (int r = 0; r < out_dim; ++r) {
    for (int c = 0; c < in_dim; ++c) {
      l.weights(r, c) = rng.uniform(-bound, bound);
    }
  }
  l.bias = Eigen::VectorXd::Zero(out_dim);
  return l;
}

// Activations for every layer; column-major batches (one sample per column).
std::vector<Eigen::MatrixXd> forward_batch(const AutoencoderModel& model,
                                           const Eigen::MatrixXd& inputs) {
  std::vector<Eigen::MatrixXd> activations;
  activations.reserve(model.layer_count() + 1);
  activations.push_back(inputs);
  for (std::size_t i = 0; i < model.layer_count(); ++i) {
    const DenseLayer& l = model.layer(i);
    activations.push_back(
        sigmoid((l.weights * activations.back()).colwise() + l.bias));
  }
  return activations;
}

GradientSet zero_gradients(const AutoencoderModel& model) {
  GradientSet g;
  for (const auto& l : model.encoder_layers) {
    g.encoder_layers.push_back(
        {Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
         Eigen::VectorXd::Zero(l.bias.size())});
  }
  for (const auto& l : model.decoder_layers) {
    g.decoder_layers.push_back(
        {Eigen::MatrixXd::Zero(l.weights.rows(), l.weights.cols()),
         Eigen::VectorXd::Zero(l.bias.size())});
  }
  return g;
}

DenseLayer& gradient_layer(GradientSet& g, std::size_t i) {
  return i < g.encoder_layers.size() ? g.encoder_layers[i]
                                     : g.decoder_layers[i - g.encoder_layers.size()];
}

// Backprop of L = mean over samples of (1/n) * sum_i (x_i - x_hat_i)^2.
// Returns the batch loss; fills g with dL/dW, dL/db per layer.
double backprop(const AutoencoderModel& model, const Eigen::MatrixXd& inputs, GradientSet& g) {
  const auto activations = forward_batch(model, inputs);
  const Eigen::MatrixXd& output = activations.back();
  const Eigen::Index n = inputs.rows();
  const Eigen::Index batch = inputs.cols();

  const Eigen::MatrixXd diff = output - inputs;
  const double loss = diff.array().square().sum() / static_cast<double>(n * batch);

  Eigen::MatrixXd delta = ((2.0 / static_cast<double>(n * batch)) * diff.array() *
                           output.array() * (1.0 - output.array()))
                              .matrix();
  for (std::size_t i = model.layer_count(); i-- > 0;) {
    DenseLayer& grad = gradient_layer(g, i);
    grad.weights = delta * activations[i].transpose();
    grad.bias = delta.rowwise().sum();
    if (i > 0) {
      const Eigen::MatrixXd& prev = activations[i];
      delta = ((model.layer(i).weights.transpose() * delta).array() * prev.array() *
               (1.0 - prev.array()))
                  .matrix();
    }
  }
  return loss;
}

}  // namespace

AutoencoderModel init_model(int input_dim, const std::vector<int>& hidden_widths, int latent_dim,
                            std::uint64_t seed) {
  if (latent_dim >= input_dim) {
    throw ConfigError("latent width " + std::to_string(latent_dim) +
                      " must be smaller than input width " + std::to_string(input_dim));
  }
  if (input_dim < 1 || latent_dim < 1) throw ConfigError("layer widths must be positive");
  for (int h : hidden_widths) {
    if (h < 1) throw ConfigError("layer widths must be positive");
  }

  AutoencoderModel model;
  model.input_dim = input_dim;
  model.latent_dim = latent_dim;

  Rng rng(seed);
  std::vector<int> encoder_dims = {input_dim};
  encoder_dims.insert(encoder_dims.end(), hidden_widths.begin(), hidden_widths.end());
  encoder_dims.push_back(latent_dim);
  for (std::size_t i = 1; i < encoder_dims.size(); ++i) {
    model.encoder_layers.push_back(init_layer(encoder_dims[i], encoder_dims[i - 1], rng));
  }
  std::vector<int> decoder_dims(encoder_dims.rbegin(), encoder_dims.rend());
  for (std::size_t i = 1; i < decoder_dims.size(); ++i) {
    model.decoder_layers.push_back(init_layer(decoder_dims[i], decoder_dims[i - 1], rng));
  }
  return model;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> forward(const AutoencoderModel& model,
                                                    const Eigen::VectorXd& x) {
  if (x.size() != model.input_dim) {
    throw NumericError("forward: input has " + std::to_string(x.size()) + " entries, expected " +
                       std::to_string(model.input_dim));
  }
  const auto activations = forward_batch(model, x);
  return {activations[model.encoder_layers.size()].col(0), activations.back().col(0)};
}

double reconstruction_loss(const Eigen::VectorXd& x, const Eigen::VectorXd& x_hat) {
  if (x.size() != x_hat.size()) throw NumericError("reconstruction_loss: length mismatch");
  return (x - x_hat).array().square().mean();
}

GradientSet gradients(const AutoencoderModel& model, const Eigen::MatrixXd& batch) {
  if (batch.rows() == 0) throw NumericError("gradients: empty batch");
  if (batch.cols() != model.input_dim) {
    throw NumericError("gradients: batch width mismatch");
  }
  GradientSet g = zero_gradients(model);
  backprop(model, batch.transpose(), g);
  return g;
}

namespace {

struct AdamState {
  GradientSet m;
  GradientSet v;
  std::int64_t t = 0;
};

void apply_update(AutoencoderModel& model, const GradientSet& g, const TrainConfig& cfg,
                  AdamState& adam) {
  const std::size_t layers = model.layer_count();
  if (cfg.optimizer == TrainConfig::Optimizer::sgd) {
    for (std::size_t i = 0; i < layers; ++i) {
      const DenseLayer& grad =
          i < g.encoder_layers.size() ? g.encoder_layers[i]
                                      : g.decoder_layers[i - g.encoder_layers.size()];
      model.layer(i).weights -= cfg.learning_rate * grad.weights;
      model.layer(i).bias -= cfg.learning_rate * grad.bias;
    }
    return;
  }

  adam.t += 1;
  const double b1 = cfg.adam_beta1;
  const double b2 = cfg.adam_beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(adam.t));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(adam.t));
  for (std::size_t i = 0; i < layers; ++i) {
    const DenseLayer& grad = i < g.encoder_layers.size()
                                 ? g.encoder_layers[i]
                                 : g.decoder_layers[i - g.encoder_layers.size()];
    DenseLayer& m = gradient_layer(adam.m, i);
    DenseLayer& v = gradient_layer(adam.v, i);
    m.weights = b1 * m.weights + (1.0 - b1) * grad.weights;
    m.bias = b1 * m.bias + (1.0 - b1) * grad.bias;
    v.weights = (b2 * v.weights.array() + (1.0 - b2) * grad.weights.array().square()).matrix();
    v.bias = (b2 * v.bias.array() + (1.0 - b2) * grad.bias.array().square()).matrix();

    const auto mw_hat = m.weights.array() / correction1;
    const auto vw_hat = v.weights.array() / correction2;
    model.layer(i).weights.array() -=
        cfg.learning_rate * mw_hat / (vw_hat.sqrt() + cfg.adam_epsilon);
    const auto mb_hat = m.bias.array() / correction1;
    const auto vb_hat = v.bias.array() / correction2;
    model.layer(i).bias.array() -=
        cfg.learning_rate * mb_hat / (vb_hat.sqrt() + cfg.adam_epsilon);
  }
}

}  // namespace

std::pair<AutoencoderModel, TrainTrace> train(AutoencoderModel model, const FeatureMatrix& data,
                                              const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw ConfigError("epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (cfg.learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
  if (cfg.validation_fraction < 0.0 || cfg.validation_fraction >= 1.0) {
    throw ConfigError("validation_fraction must be in [0, 1)");
  }
  if (data.col_count() != model.input_dim) {
    throw ConfigError("training data has " + std::to_string(data.col_count()) +
                      " columns, model expects " + std::to_string(model.input_dim));
  }
  const std::int64_t rows = data.row_count();
  if (rows < 1) throw ConfigError("training data is empty");

  Rng rng(cfg.seed);
  std::vector<std::int64_t> order(static_cast<std::size_t>(rows));
  std::iota(order.begin(), order.end(), std::int64_t{0});
  rng.shuffle(order);
  const std::int64_t val_rows =
      static_cast<std::int64_t>(std::floor(cfg.validation_fraction * static_cast<double>(rows)));
  if (rows - val_rows < 1) throw ConfigError("validation fraction leaves no training rows");
  std::vector<std::int64_t> train_ids(order.begin(), order.end() - val_rows);
  std::vector<std::int64_t> val_ids(order.end() - val_rows, order.end());

  Eigen::MatrixXd val_inputs(model.input_dim, val_rows);
  for (std::int64_t i = 0; i < val_rows; ++i) {
    val_inputs.col(i) = data.values.row(val_ids[static_cast<std::size_t>(i)]).transpose();
  }

  AdamState adam{zero_gradients(model), zero_gradients(model), 0};
  GradientSet g = zero_gradients(model);
  TrainTrace trace;

  const std::int64_t n_train = static_cast<std::int64_t>(train_ids.size());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train_ids);
    double loss_sum = 0.0;
    for (std::int64_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::int64_t b = std::min<std::int64_t>(cfg.batch_size, n_train - start);
      Eigen::MatrixXd batch(model.input_dim, b);
      for (std::int64_t i = 0; i < b; ++i) {
        batch.col(i) = data.values.row(train_ids[static_cast<std::size_t>(start + i)]).transpose();
      }
      const double batch_loss = backprop(model, batch, g);
      loss_sum += batch_loss * static_cast<double>(b);
      apply_update(model, g, cfg, adam);
    }
    const double train_loss = loss_sum / static_cast<double>(n_train);
    if (!std::isfinite(train_loss)) {
      throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch + 1));
    }
    double val_loss = std::numeric_limits<double>::quiet_NaN();
    if (val_rows > 0) {
      const auto val_out = forward_batch(model, val_inputs).back();
      val_loss = (val_out - val_inputs).array().square().sum() /
                 static_cast<double>(model.input_dim * val_rows);
    }
    trace.train_loss.push_back(train_loss);
    trace.val_loss.push_back(val_loss);
  }
  return {std::move(model), std::move(trace)};
}

Eigen::VectorXd reconstruction_errors(const AutoencoderModel& model, const FeatureMatrix& data) {
  if (data.col_count() != model.input_dim) {
    throw NumericError("reconstruction_errors: data width mismatch");
  }
  const Eigen::MatrixXd inputs = data.values.transpose();
  const Eigen::MatrixXd output = forward_batch(model, inputs).back();
  return (output - inputs).array().square().colwise().mean().matrix().transpose();
}

namespace {

nlohmann::json layer_to_json(const DenseLayer& l) {
  nlohmann::json j;
  auto rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
    rows.push_back(std::vector<double>(l.weights.row(r).begin(), l.weights.row(r).end()));
  }
  j["weights"] = std::move(rows);
  j["bias"] = std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size());
  return j;
}

DenseLayer layer_from_json(const nlohmann::json& j) {
  DenseLayer l;
  const auto rows = j.at("weights").get<std::vector<std::vector<double>>>();
  const auto bias = j.at("bias").get<std::vector<double>>();
  if (rows.empty() || rows.size() != bias.size()) throw ParseError("malformed layer shapes");
  l.weights.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw ParseError("ragged weight matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      l.weights(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  l.bias = Eigen::Map<const Eigen::VectorXd>(bias.data(), static_cast<Eigen::Index>(bias.size()));
  return l;
}

}  // namespace

nlohmann::json model_to_json(const AutoencoderModel& model) {
  nlohmann::json j;
  j["activation"] = "sigmoid";
  j["input_dim"] = model.input_dim;
  j["latent_dim"] = model.latent_dim;
  j["encoder"] = nlohmann::json::array();
  for (const auto& l : model.encoder_layers) j["encoder"].push_back(layer_to_json(l));
  j["decoder"] = nlohmann::json::array();
  for (const auto& l : model.decoder_layers) j["decoder"].push_back(layer_to_json(l));
  return j;
}

AutoencoderModel model_from_json(const nlohmann::json& j) {
  AutoencoderModel model;
  try {
    model.input_dim = j.at("input_dim").get<int>();
    model.latent_dim = j.at("latent_dim").get<int>();
    for (const auto& lj : j.at("encoder")) model.encoder_layers.push_back(layer_from_json(lj));
    for (const auto& lj : j.at("decoder")) model.decoder_layers.push_back(layer_from_json(lj));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed autoencoder model: ") + e.what());
  }
  return model;
}

std::string trace_to_csv(const TrainTrace& trace) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (std::size_t i = 0; i < trace.train_loss.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += format_csv(trace.train_loss[i]);
    out += ',';
    out += format_csv(trace.val_loss[i]);
    out += '\n';
  }
  return out;
}

}  // namespace iotguard
