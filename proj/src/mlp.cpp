#include "intent/mlp.hpp"

#include <cmath>
#include <random>

#include "intent/error.hpp"

namespace intent {

namespace {

void apply_activation(Activation activation, Eigen::MatrixXd& z) {
  switch (activation) {
    case Activation::kTanh: z = z.array().tanh(); break;
    case Activation::kRelu: z = z.cwiseMax(0.0); break;
    case Activation::kIdentity: break;
  }
}

// Derivative expressed through the activation output a = f(z).
Eigen::MatrixXd activation_derivative(Activation activation, const Eigen::MatrixXd& a) {
  switch (activation) {
    case Activation::kTanh: return (1.0 - a.array().square()).matrix();
    case Activation::kRelu: return (a.array() > 0.0).cast<double>().matrix();
    case Activation::kIdentity: break;
  }
  return Eigen::MatrixXd::Ones(a.rows(), a.cols());
}

// Activations of every layer, input included.
std::vector<Eigen::MatrixXd> forward_all(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != model.input_dim()) {
    fail(ErrorKind::kConfig, "input has " + std::to_string(inputs.rows()) + " rows, network expects " +
                                 std::to_string(model.input_dim()));
  }
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(model.layer_count() + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    Eigen::MatrixXd z = model.weights[l] * acts.back();
    z.colwise() += model.biases[l];
    if (l + 1 < model.layer_count()) apply_activation(model.activation, z);
    if (!z.allFinite()) {
      fail(ErrorKind::kNumeric, "numerical blow-up: non-finite activation in layer " + std::to_string(l + 1));
    }
    acts.push_back(std::move(z));
  }
  return acts;
}

}  // namespace

const char* to_string(Activation activation) {
  switch (activation) {
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
    case Activation::kIdentity: return "identity";
  }
  return "unknown";
}

Activation parse_activation(const std::string& name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  if (name == "identity" || name == "linear") return Activation::kIdentity;
  fail(ErrorKind::kConfig, "unknown activation '" + name + "'");
}

const char* to_string(OutputMode mode) { return mode == OutputMode::kResidual ? "residual" : "absolute"; }

OutputMode parse_output_mode(const std::string& name) {
  if (name == "residual") return OutputMode::kResidual;
  if (name == "absolute") return OutputMode::kAbsolute;
  fail(ErrorKind::kConfig, "unknown output mode '" + name + "'");
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].size() + biases[l].size();
  return n;
}

void MlpModel::check() const {
  if (layer_dims.size() < 2 || weights.size() != layer_dims.size() - 1 || biases.size() != weights.size()) {
    fail(ErrorKind::kFormat, "dimension inconsistency: layer count mismatch");
  }
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != layer_dims[l + 1] || weights[l].cols() != layer_dims[l] ||
        biases[l].size() != layer_dims[l + 1]) {
      fail(ErrorKind::kFormat, "dimension inconsistency in layer " + std::to_string(l + 1));
    }
    if (!weights[l].allFinite() || !biases[l].allFinite()) {
      fail(ErrorKind::kFormat, "non-finite parameter in layer " + std::to_string(l + 1));
    }
  }
  if (!scaler.valid()) fail(ErrorKind::kFormat, "invalid scaler");
}

std::vector<Eigen::Index> default_layer_dims(std::size_t channels) {
  const auto c = static_cast<Eigen::Index>(channels);
  return {static_cast<Eigen::Index>(kHistoryLength) * c, 100, 100, 100, c};
}

MlpModel init_mlp(const std::vector<Eigen::Index>& layer_dims, Activation activation, std::uint64_t seed) {
  if (layer_dims.size() < 2) fail(ErrorKind::kConfig, "a network needs at least an input and an output layer");
  for (Eigen::Index d : layer_dims) {
    if (d <= 0) fail(ErrorKind::kConfig, "layer dimensions must be positive");
  }
  MlpModel model;
  model.layer_dims = layer_dims;
  model.activation = activation;
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const Eigen::Index fan_in = layer_dims[l];
    const Eigen::Index fan_out = layer_dims[l + 1];
    const double limit = std::sqrt(3.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Eigen::MatrixXd w(fan_out, fan_in);
    for (Eigen::Index r = 0; r < fan_out; ++r) {
      for (Eigen::Index c = 0; c < fan_in; ++c) w(r, c) = dist(rng);
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
  }
  return model;
}

Eigen::VectorXd forward(const MlpModel& model, std::span<const double> input) {
  const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  return forward_batch(model, x);
}

Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != model.input_dim()) {
    fail(ErrorKind::kConfig, "input has length " + std::to_string(inputs.rows()) + ", network expects " +
                                 std::to_string(model.input_dim()));
  }
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    Eigen::MatrixXd z = model.weights[l] * a;
    z.colwise() += model.biases[l];
    if (l + 1 < model.layer_count()) apply_activation(model.activation, z);
    a = std::move(z);
  }
  return a;
}

ParameterSet ParameterSet::zeros_like(const MlpModel& model) {
  ParameterSet p;
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    p.weights.push_back(Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols()));
    p.biases.push_back(Eigen::VectorXd::Zero(model.biases[l].size()));
  }
  return p;
}

void ParameterSet::scale(double factor) {
  for (auto& w : weights) w *= factor;
  for (auto& b : biases) b *= factor;
}

bool ParameterSet::matches(const MlpModel& model) const {
  if (weights.size() != model.layer_count() || biases.size() != model.layer_count()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != model.weights[l].rows() || weights[l].cols() != model.weights[l].cols() ||
        biases[l].size() != model.biases[l].size()) {
      return false;
    }
  }
  return true;
}

LossGradients loss_and_gradients(const MlpModel& model, const TrainBatch& batch) {
  if (batch.inputs.cols() != batch.targets.cols() || batch.targets.rows() != model.output_dim() ||
      batch.inputs.cols() == 0) {
    fail(ErrorKind::kConfig, "batch shape does not match the network");
  }
  const std::vector<Eigen::MatrixXd> acts = forward_all(model, batch.inputs);
  const Eigen::MatrixXd residual = acts.back() - batch.targets;

  LossGradients out;
  out.loss = residual.squaredNorm();
  out.mean_loss = out.loss / static_cast<double>(residual.size());
  out.gradients = ParameterSet::zeros_like(model);

  Eigen::MatrixXd delta = 2.0 * residual;
  for (std::size_t l = model.layer_count(); l-- > 0;) {
    out.gradients.weights[l].noalias() = delta * acts[l].transpose();
    out.gradients.biases[l] = delta.rowwise().sum();
    if (l > 0) {
      Eigen::MatrixXd back = model.weights[l].transpose() * delta;
      delta = back.cwiseProduct(activation_derivative(model.activation, acts[l]));
    }
  }
  return out;
}

double mean_squared_error(const MlpModel& model, const TrainBatch& batch) {
  const Eigen::MatrixXd pred = forward_batch(model, batch.inputs);
  return (pred - batch.targets).squaredNorm() / static_cast<double>(pred.size());
}

void optimizer_step(MlpModel& model, const ParameterSet& gradients, AdamState& state, const AdamConfig& config) {
  if (!gradients.matches(model)) fail(ErrorKind::kConfig, "gradient shapes do not match the network");
  if (state.m.weights.empty()) {
    state.m = ParameterSet::zeros_like(model);
    state.v = ParameterSet::zeros_like(model);
  } else if (!state.m.matches(model)) {
    fail(ErrorKind::kConfig, "optimizer state shapes do not match the network");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  const double step_size = config.learning_rate / correction1;
  const double root_correction2 = std::sqrt(correction2);

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = config.beta1 * m + (1.0 - config.beta1) * grad;
    v = config.beta2 * v + (1.0 - config.beta2) * grad.cwiseProduct(grad);
    param.array() -= step_size * m.array() / (v.array().sqrt() / root_correction2 + config.epsilon);
  };
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    update(model.weights[l], gradients.weights[l], state.m.weights[l], state.v.weights[l]);
    update(model.biases[l], gradients.biases[l], state.m.biases[l], state.v.biases[l]);
  }
}

}  // namespace intent
