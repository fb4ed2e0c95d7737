#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "intent/mlp.hpp"
#include "intent/trajectory.hpp"

namespace intent {

inline constexpr std::size_t kMaxHorizon = 100;

/// Predicted continuation in physical units; steps.size() == horizon.
struct Forecast {
  std::vector<TrajectorySample> steps;
  std::size_t horizon() const { return steps.size(); }
};

/// Number of channels a model consumes and emits (6, or 3 for velocity-only).
std::size_t model_channels(const MlpModel& model);
/// History length a model consumes, input_dim / channels.
std::size_t model_history(const MlpModel& model);

/// Iterated prediction in scaled space: each column of `inputs` is a
/// flattened time-major history; every step appends the one-step prediction
/// and drops the oldest sample. On return `inputs` holds the slid windows.
/// Returns (steps * channels) x batch predictions. Throws kNumeric
/// "rollout diverged at step k" on a non-finite prediction.
Eigen::MatrixXd advance_scaled(const MlpModel& model, Eigen::MatrixXd& inputs, std::size_t steps);

/// Scales the history with the model's scaler, iterates `horizon` one-step
/// predictions, unscales. Channels a velocity-only model does not predict
/// are returned as zero.
Forecast rollout(const MlpModel& model, std::span<const TrajectorySample> history, std::size_t horizon);

/// Same as rollout for many histories at once.
std::vector<Forecast> rollout_batch(const MlpModel& model,
                                    std::span<const std::span<const TrajectorySample>> histories,
                                    std::size_t horizon);

/// Trials pre-scaled into contiguous time-major arrays, so any window is a
/// contiguous slice that is already a network input.
class ScaledTrialSet {
 public:
  ScaledTrialSet(std::span<const Trial> trials, const ChannelScaler& scaler, std::size_t channels,
                 std::size_t history_len = kHistoryLength);

  std::size_t channels() const { return channels_; }
  std::size_t history_len() const { return history_len_; }
  std::size_t trial_count() const { return series_.size(); }

  /// Windows whose history plus `extra` following samples fit in a trial.
  std::size_t unit_count(std::size_t extra) const;

  /// Uniform draw over all valid (trial, start) pairs for `extra`.
  struct Unit {
    std::size_t trial;
    std::size_t start;
  };
  template <typename Rng>
  Unit draw(std::size_t extra, Rng& rng) const;
  Unit unit_at(std::size_t extra, std::size_t index) const;

  /// Pointer to sample `index` of trial `trial` (channels() doubles).
  const double* at(std::size_t trial, std::size_t index) const {
    return series_[trial].data() + index * channels_;
  }

 private:
  std::vector<std::vector<double>> series_;
  std::size_t channels_;
  std::size_t history_len_;
};

template <typename Rng>
ScaledTrialSet::Unit ScaledTrialSet::draw(std::size_t extra, Rng& rng) const {
  const std::size_t total = unit_count(extra);
  if (total == 0) return unit_at(extra, 0);  // throws: nothing to draw
  const std::uint64_t r = rng();
  return unit_at(extra, static_cast<std::size_t>(r % total));
}

struct StageParams {
  double mse_threshold = 0.05;
  int patience = 5;
  int max_steps = 20000;
  std::size_t batch_size = 32;
  double mix_ratio = 0.5;  // share of prediction-augmented windows when k > 0
  int validate_every = 1;
  AdamConfig adam;
};

struct StageReport {
  int k = 0;
  int steps = 0;
  double threshold = 0.0;
  double train_mse = 0.0;       // mean over the last `patience` training batches
  double validation_mse = 0.0;  // mean over the last `patience` validation batches
  bool converged = false;
  double wall_time_s = 0.0;
  std::string diagnostic;
};

/// Assembles one batch at curriculum stage k: (1 - mix) real windows with
/// the true next sample as target, and mix windows whose trailing k entries
/// are the model's own predictions from the preceding real history, with
/// the true sample after them as target. Residual models get targets
/// relative to each window's newest frame.
TrainBatch make_stage_batch(const MlpModel& model, const ScaledTrialSet& data, int k,
                            const StageParams& params, std::mt19937_64& rng);

/// Trains in place until the validation MSE stays below the threshold for
/// `patience` consecutive validation batches, or `max_steps` is reached.
/// A non-finite loss ends the stage unconverged with a diagnostic.
StageReport train_stage(MlpModel& model, const ScaledTrialSet& train, const ScaledTrialSet& validation, int k,
                        const StageParams& params, std::uint64_t seed);

struct TrainConfig {
  std::vector<Eigen::Index> hidden = {100, 100, 100};
  Activation activation = Activation::kTanh;
  OutputMode output_mode = OutputMode::kResidual;
  std::size_t channels = kChannels;
  std::size_t batch_size = 32;
  AdamConfig adam;
  double mse_threshold = 0.05;
  double threshold_growth = 1.5;
  int patience = 5;
  int max_steps_per_stage = 20000;
  double mix_ratio = 0.5;
  int validate_every = 1;
  std::vector<int> schedule;  // stage k values; empty means 0, 1, ..., 50
  std::uint64_t seed = 1;

  std::vector<int> stages() const;
};

/// k = 0..max_k in unit steps, or 0, 1, 2, 4, ... capped at max_k.
std::vector<int> linear_schedule(int max_k);
std::vector<int> doubling_schedule(int max_k);

TrainConfig parse_train_config(const std::string& json_text);
std::string train_config_to_json(const TrainConfig& config);

struct TrainingReport {
  std::vector<StageReport> stages;
};

/// Report as JSON. Wall times are the only non-deterministic fields and are
/// dropped when include_timing is false.
std::string training_report_to_json(const TrainingReport& report, bool include_timing = true);

struct CurriculumResult {
  MlpModel model;                    // last converged model
  std::optional<MlpModel> base;      // model after stage 0, when run in this call
  TrainingReport report;
};

/// Stages run in schedule order from the current weights; stages up to
/// `resume->curriculum_k` are skipped when resuming. Stage i uses threshold
/// mse_threshold * threshold_growth^i. Stops at the first stage that fails
/// to converge and returns the model from before it. Throws kNumeric "base
/// training failed" if stage 0 does not converge.
CurriculumResult train_curriculum(std::span<const Trial> train, std::span<const Trial> validation,
                                  const ChannelScaler& scaler, const TrainConfig& config,
                                  const std::optional<MlpModel>& resume = std::nullopt);

}  // namespace intent
