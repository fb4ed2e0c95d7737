#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "intent/trajectory.hpp"

namespace intent {

/// Hidden-layer nonlinearity. The output layer is always linear.
enum class Activation : std::uint32_t { kTanh = 1, kRelu = 2, kIdentity = 3 };

const char* to_string(Activation activation);
Activation parse_activation(const std::string& name);

/// How the output layer relates to the forecast. kResidual: the network
/// emits the change from the newest input frame, which is added back.
enum class OutputMode : std::uint32_t { kAbsolute = 0, kResidual = 1 };

const char* to_string(OutputMode mode);
OutputMode parse_output_mode(const std::string& name);

/// Feed-forward regression network with its input/output scaler bundled.
/// weights[l] maps layer l (dims[l]) to layer l+1 (dims[l+1]).
struct MlpModel {
  std::vector<Eigen::Index> layer_dims;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  Activation activation = Activation::kTanh;
  OutputMode output_mode = OutputMode::kAbsolute;
  ChannelScaler scaler;
  // Highest curriculum stage (number of appended predictions) the weights
  // were trained through; -1 for an untrained network.
  std::int32_t curriculum_k = -1;

  Eigen::Index input_dim() const { return layer_dims.front(); }
  Eigen::Index output_dim() const { return layer_dims.back(); }
  std::size_t layer_count() const { return weights.size(); }
  std::size_t parameter_count() const;

  /// Throws kFormat if dimensions do not chain or a parameter is non-finite.
  void check() const;
};

/// Default topology: 150 steps x 6 channels in, three hidden layers of 100,
/// one step of 6 channels out.
std::vector<Eigen::Index> default_layer_dims(std::size_t channels = kChannels);

/// Weights uniform in +-sqrt(3 / fan_in) (unit pre-activation variance for
/// unit-variance inputs), biases zero. Deterministic per seed.
MlpModel init_mlp(const std::vector<Eigen::Index>& layer_dims, Activation activation, std::uint64_t seed);

Eigen::VectorXd forward(const MlpModel& model, std::span<const double> input);

/// Column-per-example forward pass: inputs is input_dim x batch.
Eigen::MatrixXd forward_batch(const MlpModel& model, const Eigen::MatrixXd& inputs);

/// Parameter-shaped container (gradients, optimizer moments).
struct ParameterSet {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static ParameterSet zeros_like(const MlpModel& model);
  void scale(double factor);
  bool matches(const MlpModel& model) const;
};

/// One column per example.
struct TrainBatch {
  Eigen::MatrixXd inputs;   // input_dim x batch
  Eigen::MatrixXd targets;  // output_dim x batch
};

struct LossGradients {
  double loss = 0.0;       // sum over examples and outputs of squared error
  double mean_loss = 0.0;  // loss / (batch * output_dim)
  ParameterSet gradients;  // d loss / d parameters (sum convention)
};

/// Exact backpropagation. Throws kNumeric "numerical blow-up" naming the
/// layer if an activation becomes non-finite.
LossGradients loss_and_gradients(const MlpModel& model, const TrainBatch& batch);

/// Mean squared error per element, no gradients.
double mean_squared_error(const MlpModel& model, const TrainBatch& batch);

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  std::int64_t step = 0;
  ParameterSet m;
  ParameterSet v;
};

/// One bias-corrected Adam update in place. Throws kConfig on shape mismatch.
void optimizer_step(MlpModel& model, const ParameterSet& gradients, AdamState& state,
                    const AdamConfig& config = {});

// Model file: see model_io.cpp for the byte layout.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string serialize_model(const MlpModel& model);
MlpModel deserialize_model(const std::string& bytes);
void save_model(const MlpModel& model, const std::string& path);
MlpModel load_model(const std::string& path);

}  // namespace intent
