#pragma once

#include <optional>
#include <string>
#include <vector>

#include "intent/eval.hpp"
#include "intent/predictor.hpp"
#include "intent/synthetic.hpp"

namespace intent {

/// Everything `run-all` needs; every random choice flows from the seeds here.
struct RunConfig {
  CorpusConfig corpus = default_corpus_config();
  TrainConfig train;
  double train_fraction = 0.75;
  std::uint64_t split_seed = 11;
  bool scaler_from_train_only = false;
  bool velocity_ablation = true;

  std::size_t horizon = kMaxHorizon;
  std::size_t eval_stride = 10;
  int poly_degree = kDefaultPolyDegree;
  NoiseSpec eval_noise = NoiseSpec::standard(404);
  std::size_t threads = 0;

  FollowerImpedance robot_follower = default_robot_follower();
  std::vector<std::vector<PlanSegment>> robot_plans = default_robot_plans();

  double overlay_period_s = 1.0;
  std::size_t overlay_horizon = 50;
};

/// Training settings used by run-all unless overridden.
TrainConfig default_run_train_config();
RunConfig default_run_config();

/// JSON with optional keys "corpus", "train", "split", "eval", "robot",
/// "overlay"; see README for the schema.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

struct RunAllResult {
  std::size_t trials = 0;
  std::size_t train_trials = 0;
  std::size_t validation_trials = 0;
  DatasetSplit split;
  TrainingReport training;
  std::optional<TrainingReport> ablation_training;

  HorizonReport nn_train;
  HorizonReport nn_validation;
  HorizonReport poly_train;
  HorizonReport poly_validation;
  HorizonReport nn_noisy;
  HorizonReport poly_noisy;
  HorizonReport base_validation;  // stage-0 model
  std::optional<HorizonReport> ablation_validation;
  HorizonReport robot;
  std::optional<std::size_t> crossover_validation;
};

/// Generates the corpus, splits by dyad, trains the curriculum model (and
/// the velocity-only ablation), evaluates every predictor/dataset pair and
/// writes all artifacts to `out_dir`:
///   corpus.csv, model.bin, model_stage0.bin, model_velocity_only.bin,
///   training_report.json, training_report_velocity_only.json,
///   reports.csv, compare_train.csv, compare_validation.csv,
///   compare_noisy.csv, compare_overfit.csv, overlay.csv, summary.json
RunAllResult run_all(const std::string& out_dir, const RunConfig& config);

/// JSON summary of the headline numbers.
std::string run_summary_json(const RunAllResult& result);

}  // namespace intent
