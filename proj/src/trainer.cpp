#include <chrono>
#include <cmath>
#include <deque>
#include <numeric>

#include "intent/error.hpp"
#include "intent/predictor.hpp"
#include "json.hpp"

namespace intent {

namespace {

using nlohmann::json;

constexpr int kMaxCurriculumK = 50;

std::mt19937_64 stage_rng(std::uint64_t seed, int k, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), stream};
  return std::mt19937_64(seq);
}

double mean_of(const std::deque<double>& values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

void push_bounded(std::deque<double>& values, double v, std::size_t bound) {
  values.push_back(v);
  while (values.size() > bound) values.pop_front();
}

}  // namespace

TrainBatch make_stage_batch(const MlpModel& model, const ScaledTrialSet& data, int k, const StageParams& params,
                            std::mt19937_64& rng) {
  if (k < 0) fail(ErrorKind::kConfig, "curriculum stage k must be non-negative");
  const auto batch = static_cast<Eigen::Index>(params.batch_size);
  const auto channels = static_cast<Eigen::Index>(data.channels());
  const auto history = static_cast<Eigen::Index>(data.history_len());
  const Eigen::Index n_aug = k > 0 ? static_cast<Eigen::Index>(std::lround(params.mix_ratio * batch)) : 0;
  const Eigen::Index n_real = batch - n_aug;
  const Eigen::Index in = history * channels;

  TrainBatch out;
  out.inputs.resize(in, batch);
  out.targets.resize(channels, batch);

  for (Eigen::Index b = 0; b < n_real; ++b) {
    const auto unit = data.draw(1, rng);
    out.inputs.col(b) = Eigen::Map<const Eigen::VectorXd>(data.at(unit.trial, unit.start), in);
    out.targets.col(b) =
        Eigen::Map<const Eigen::VectorXd>(data.at(unit.trial, unit.start + data.history_len()), channels);
  }
  if (n_aug > 0) {
    Eigen::MatrixXd windows(in, n_aug);
    for (Eigen::Index b = 0; b < n_aug; ++b) {
      const auto unit = data.draw(static_cast<std::size_t>(k) + 1, rng);
      windows.col(b) = Eigen::Map<const Eigen::VectorXd>(data.at(unit.trial, unit.start), in);
      out.targets.col(n_real + b) = Eigen::Map<const Eigen::VectorXd>(
          data.at(unit.trial, unit.start + data.history_len() + static_cast<std::size_t>(k)), channels);
    }
    advance_scaled(model, windows, static_cast<std::size_t>(k));
    out.inputs.rightCols(n_aug) = windows;
  }
  if (model.output_mode == OutputMode::kResidual) out.targets -= out.inputs.bottomRows(channels);
  return out;
}

StageReport train_stage(MlpModel& model, const ScaledTrialSet& train, const ScaledTrialSet& validation, int k,
                        const StageParams& params, std::uint64_t seed) {
  if (params.patience < 1 || params.max_steps < 1 || params.batch_size < 1 || params.validate_every < 1) {
    fail(ErrorKind::kConfig, "stage parameters must be positive");
  }
  const auto started = std::chrono::steady_clock::now();
  StageReport report;
  report.k = k;
  report.threshold = params.mse_threshold;

  auto train_rng = stage_rng(seed, k, 1);
  auto val_rng = stage_rng(seed, k, 2);
  AdamState adam;
  std::deque<double> recent_train;
  std::deque<double> recent_val;
  const auto window = static_cast<std::size_t>(params.patience);
  int consecutive = 0;

  try {
    for (int step = 1; step <= params.max_steps; ++step) {
      const TrainBatch batch = make_stage_batch(model, train, k, params, train_rng);
      LossGradients lg = loss_and_gradients(model, batch);
      if (!std::isfinite(lg.loss)) fail(ErrorKind::kNumeric, "non-finite training loss at step " + std::to_string(step));
      lg.gradients.scale(1.0 / static_cast<double>(batch.targets.size()));
      optimizer_step(model, lg.gradients, adam, params.adam);
      report.steps = step;
      push_bounded(recent_train, lg.mean_loss, window);

      if (step % params.validate_every != 0) continue;
      const TrainBatch vbatch = make_stage_batch(model, validation, k, params, val_rng);
      const double vloss = mean_squared_error(model, vbatch);
      if (!std::isfinite(vloss)) {
        fail(ErrorKind::kNumeric, "non-finite validation loss at step " + std::to_string(step));
      }
      push_bounded(recent_val, vloss, window);
      consecutive = vloss < params.mse_threshold ? consecutive + 1 : 0;
      if (consecutive >= params.patience) {
        report.converged = true;
        break;
      }
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kNumeric) throw;
    report.converged = false;
    report.diagnostic = std::string("stage k=") + std::to_string(k) + " aborted: " + e.what();
  }

  report.train_mse = mean_of(recent_train);
  report.validation_mse = mean_of(recent_val);
  report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return report;
}

std::vector<int> linear_schedule(int max_k) {
  std::vector<int> s;
  for (int k = 0; k <= max_k; ++k) s.push_back(k);
  return s;
}

std::vector<int> doubling_schedule(int max_k) {
  std::vector<int> s{0};
  for (int k = 1; k < max_k; k *= 2) s.push_back(k);
  if (max_k > 0) s.push_back(max_k);
  return s;
}

std::vector<int> TrainConfig::stages() const {
  const std::vector<int> s = schedule.empty() ? linear_schedule(kMaxCurriculumK) : schedule;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0 || s[i] > kMaxCurriculumK || (i > 0 && s[i] <= s[i - 1])) {
      fail(ErrorKind::kConfig, "curriculum schedule must be strictly increasing within [0, 50]");
    }
  }
  return s;
}

TrainConfig parse_train_config(const std::string& json_text) {
  TrainConfig c;
  try {
    const json j = json::parse(json_text);
    if (!j.is_object()) fail(ErrorKind::kConfig, "train config must be a JSON object");
    if (j.contains("hidden")) c.hidden = j["hidden"].get<std::vector<Eigen::Index>>();
    if (j.contains("activation")) c.activation = parse_activation(j["activation"].get<std::string>());
    if (j.contains("output")) c.output_mode = parse_output_mode(j["output"].get<std::string>());
    if (j.contains("channels")) {
      const json& ch = j["channels"];
      if (ch.is_string()) {
        const auto name = ch.get<std::string>();
        if (name == "all") c.channels = kChannels;
        else if (name == "velocity") c.channels = kVelocityChannels;
        else fail(ErrorKind::kConfig, "channels must be 'all' or 'velocity'");
      } else {
        c.channels = ch.get<std::size_t>();
      }
    }
    c.batch_size = j.value("batch_size", c.batch_size);
    c.adam.learning_rate = j.value("learning_rate", c.adam.learning_rate);
    c.adam.beta1 = j.value("beta1", c.adam.beta1);
    c.adam.beta2 = j.value("beta2", c.adam.beta2);
    c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
    c.mse_threshold = j.value("mse_threshold", c.mse_threshold);
    c.threshold_growth = j.value("threshold_growth", c.threshold_growth);
    c.patience = j.value("patience", c.patience);
    c.max_steps_per_stage = j.value("max_steps_per_stage", c.max_steps_per_stage);
    c.mix_ratio = j.value("mix_ratio", c.mix_ratio);
    c.validate_every = j.value("validate_every", c.validate_every);
    c.seed = j.value("seed", c.seed);
    const int max_k = j.value("max_k", kMaxCurriculumK);
    if (j.contains("schedule")) {
      const json& s = j["schedule"];
      if (s.is_string()) {
        const auto name = s.get<std::string>();
        if (name == "linear") c.schedule = linear_schedule(max_k);
        else if (name == "doubling") c.schedule = doubling_schedule(max_k);
        else fail(ErrorKind::kConfig, "schedule must be 'linear', 'doubling' or a list");
      } else {
        c.schedule = s.get<std::vector<int>>();
      }
    } else if (max_k != kMaxCurriculumK) {
      c.schedule = linear_schedule(max_k);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("train config: ") + e.what());
  }
  if (c.channels != kChannels && c.channels != kVelocityChannels) fail(ErrorKind::kConfig, "channels must be 6 or 3");
  if (!(c.mix_ratio >= 0.0 && c.mix_ratio <= 1.0)) fail(ErrorKind::kConfig, "mix_ratio must lie in [0, 1]");
  if (!(c.mse_threshold > 0.0) || !(c.threshold_growth > 0.0)) fail(ErrorKind::kConfig, "thresholds must be positive");
  c.stages();
  return c;
}

std::string train_config_to_json(const TrainConfig& c) {
  json j;
  j["hidden"] = c.hidden;
  j["activation"] = to_string(c.activation);
  j["output"] = to_string(c.output_mode);
  j["channels"] = c.channels == kChannels ? "all" : "velocity";
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.adam.learning_rate;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["epsilon"] = c.adam.epsilon;
  j["mse_threshold"] = c.mse_threshold;
  j["threshold_growth"] = c.threshold_growth;
  j["patience"] = c.patience;
  j["max_steps_per_stage"] = c.max_steps_per_stage;
  j["mix_ratio"] = c.mix_ratio;
  j["validate_every"] = c.validate_every;
  j["schedule"] = c.stages();
  j["seed"] = c.seed;
  return j.dump(2);
}

std::string training_report_to_json(const TrainingReport& report, bool include_timing) {
  json stages = json::array();
  for (const StageReport& s : report.stages) {
    json j = {{"k", s.k},
              {"steps", s.steps},
              {"threshold", s.threshold},
              {"train_mse", s.train_mse},
              {"validation_mse", s.validation_mse},
              {"converged", s.converged}};
    if (include_timing) j["wall_time_s"] = s.wall_time_s;
    if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
    stages.push_back(std::move(j));
  }
  return json{{"stages", stages}}.dump(2);
}

CurriculumResult train_curriculum(std::span<const Trial> train, std::span<const Trial> validation,
                                  const ChannelScaler& scaler, const TrainConfig& config,
                                  const std::optional<MlpModel>& resume) {
  const std::vector<int> schedule = config.stages();
  CurriculumResult result;
  if (resume) {
    result.model = *resume;
    if (model_channels(result.model) != config.channels) {
      fail(ErrorKind::kConfig, "resumed model channel count differs from the train config");
    }
  } else {
    std::vector<Eigen::Index> dims{static_cast<Eigen::Index>(kHistoryLength * config.channels)};
    dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
    dims.push_back(static_cast<Eigen::Index>(config.channels));
    result.model = init_mlp(dims, config.activation, config.seed);
    result.model.output_mode = config.output_mode;
    result.model.scaler = scaler;
  }

  const ScaledTrialSet train_set(train, result.model.scaler, config.channels, model_history(result.model));
  const ScaledTrialSet val_set(validation, result.model.scaler, config.channels, model_history(result.model));
  if (train_set.unit_count(1) == 0 || val_set.unit_count(1) == 0) {
    fail(ErrorKind::kData, "training and validation sets each need at least one 151-sample trial");
  }

  StageParams params;
  params.patience = config.patience;
  params.max_steps = config.max_steps_per_stage;
  params.batch_size = config.batch_size;
  params.mix_ratio = config.mix_ratio;
  params.validate_every = config.validate_every;
  params.adam = config.adam;

  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const int k = schedule[i];
    if (k <= result.model.curriculum_k) continue;
    params.mse_threshold = config.mse_threshold * std::pow(config.threshold_growth, static_cast<double>(i));
    MlpModel candidate = result.model;
    StageReport stage = train_stage(candidate, train_set, val_set, k, params, config.seed);
    result.report.stages.push_back(stage);
    if (!stage.converged) {
      if (k == 0) {
        fail(ErrorKind::kNumeric, "base training failed: stage 0 did not converge in " +
                                      std::to_string(stage.steps) + " steps" +
                                      (stage.diagnostic.empty() ? "" : " (" + stage.diagnostic + ")"));
      }
      break;
    }
    candidate.curriculum_k = k;
    result.model = std::move(candidate);
    if (k == 0) result.base = result.model;
  }
  return result;
}

}  // namespace intent
