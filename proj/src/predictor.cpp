#include "intent/predictor.hpp"

#include <algorithm>
#include <cstring>

#include "intent/error.hpp"

namespace intent {

std::size_t model_channels(const MlpModel& model) {
  const auto c = static_cast<std::size_t>(model.output_dim());
  if ((c != kChannels && c != kVelocityChannels) || model.input_dim() % model.output_dim() != 0) {
    fail(ErrorKind::kConfig, "network shape " + std::to_string(model.input_dim()) + " -> " +
                                 std::to_string(model.output_dim()) + " is not an iterated predictor");
  }
  return c;
}

std::size_t model_history(const MlpModel& model) {
  return static_cast<std::size_t>(model.input_dim()) / model_channels(model);
}

Eigen::MatrixXd advance_scaled(const MlpModel& model, Eigen::MatrixXd& inputs, std::size_t steps) {
  const auto c = static_cast<Eigen::Index>(model_channels(model));
  const Eigen::Index in = model.input_dim();
  Eigen::MatrixXd predictions(static_cast<Eigen::Index>(steps) * c, inputs.cols());
  for (std::size_t step = 0; step < steps; ++step) {
    Eigen::MatrixXd next = forward_batch(model, inputs);
    if (model.output_mode == OutputMode::kResidual) next += inputs.bottomRows(c);
    if (!next.allFinite()) {
      fail(ErrorKind::kNumeric, "rollout diverged at step " + std::to_string(step + 1));
    }
    predictions.middleRows(static_cast<Eigen::Index>(step) * c, c) = next;
    for (Eigen::Index col = 0; col < inputs.cols(); ++col) {
      double* p = inputs.col(col).data();
      std::memmove(p, p + c, static_cast<std::size_t>(in - c) * sizeof(double));
    }
    inputs.bottomRows(c) = next;
  }
  return predictions;
}

std::vector<Forecast> rollout_batch(const MlpModel& model,
                                    std::span<const std::span<const TrajectorySample>> histories,
                                    std::size_t horizon) {
  if (horizon < 1) fail(ErrorKind::kConfig, "horizon must be at least 1");
  const std::size_t channels = model_channels(model);
  const std::size_t history_len = model_history(model);
  const ChannelScaler& scaler = model.scaler;

  Eigen::MatrixXd inputs(model.input_dim(), static_cast<Eigen::Index>(histories.size()));
  for (std::size_t b = 0; b < histories.size(); ++b) {
    const auto& h = histories[b];
    if (h.size() != history_len) {
      fail(ErrorKind::kData, "insufficient history: need exactly " + std::to_string(history_len) +
                                 " samples, got " + std::to_string(h.size()));
    }
    double* col = inputs.col(static_cast<Eigen::Index>(b)).data();
    for (std::size_t t = 0; t < history_len; ++t) {
      for (std::size_t ch = 0; ch < channels; ++ch) col[t * channels + ch] = scaler.scale(h[t][ch], ch);
    }
  }

  const Eigen::MatrixXd predicted = advance_scaled(model, inputs, horizon);
  std::vector<Forecast> forecasts(histories.size());
  for (std::size_t b = 0; b < histories.size(); ++b) {
    Forecast& f = forecasts[b];
    f.steps.resize(horizon);
    const double* col = predicted.col(static_cast<Eigen::Index>(b)).data();
    for (std::size_t s = 0; s < horizon; ++s) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        f.steps[s][ch] = scaler.unscale(col[s * channels + ch], ch);
      }
    }
  }
  return forecasts;
}

Forecast rollout(const MlpModel& model, std::span<const TrajectorySample> history, std::size_t horizon) {
  const std::span<const TrajectorySample> one[] = {history};
  return std::move(rollout_batch(model, one, horizon).front());
}

ScaledTrialSet::ScaledTrialSet(std::span<const Trial> trials, const ChannelScaler& scaler, std::size_t channels,
                               std::size_t history_len)
    : channels_(channels), history_len_(history_len) {
  if (channels != kChannels && channels != kVelocityChannels) {
    fail(ErrorKind::kConfig, "channel count must be 6 or 3");
  }
  series_.reserve(trials.size());
  for (const Trial& trial : trials) {
    std::vector<double> values(trial.samples.size() * channels);
    for (std::size_t t = 0; t < trial.samples.size(); ++t) {
      for (std::size_t ch = 0; ch < channels; ++ch) {
        values[t * channels + ch] = scaler.scale(trial.samples[t][ch], ch);
      }
    }
    series_.push_back(std::move(values));
  }
}

std::size_t ScaledTrialSet::unit_count(std::size_t extra) const {
  std::size_t total = 0;
  for (const auto& s : series_) total += window_count(s.size() / channels_, history_len_, extra);
  return total;
}

ScaledTrialSet::Unit ScaledTrialSet::unit_at(std::size_t extra, std::size_t index) const {
  for (std::size_t trial = 0; trial < series_.size(); ++trial) {
    const std::size_t n = window_count(series_[trial].size() / channels_, history_len_, extra);
    if (index < n) return {trial, index};
    index -= n;
  }
  fail(ErrorKind::kData, "no training window long enough for " + std::to_string(extra) + " future samples");
}

}  // namespace intent
