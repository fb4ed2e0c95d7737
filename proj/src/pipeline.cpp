#include "intent/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "intent/error.hpp"
#include "json.hpp"

namespace intent {

namespace {

using nlohmann::json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorKind::kIo, "failed writing '" + path.string() + "'");
}

void write_comparison(const std::filesystem::path& path, const std::vector<HorizonReport>& reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  write_comparison_csv(out, compare(reports));
}

}  // namespace

TrainConfig default_run_train_config() {
  TrainConfig c;
  c.adam.learning_rate = 1e-4;
  c.mse_threshold = 0.005;
  c.threshold_growth = 1.04;
  c.validate_every = 10;
  c.seed = 7;
  return c;
}

RunConfig default_run_config() {
  RunConfig c;
  c.train = default_run_train_config();
  return c;
}

RunConfig parse_run_config(const std::string& json_text) {
  RunConfig c = default_run_config();
  try {
    const json j = json::parse(json_text);
    if (j.contains("corpus")) c.corpus = parse_corpus_config(j["corpus"].dump());
    if (j.contains("train")) {
      // Keys not given fall back to the run-all defaults, not the library ones.
      json merged = json::parse(train_config_to_json(c.train));
      merged.merge_patch(j["train"]);
      if (j["train"].contains("max_k") && !j["train"].contains("schedule")) merged.erase("schedule");
      c.train = parse_train_config(merged.dump());
    }
    if (j.contains("split")) {
      const json& s = j["split"];
      c.train_fraction = s.value("train_fraction", c.train_fraction);
      c.split_seed = s.value("seed", c.split_seed);
      c.scaler_from_train_only = s.value("scaler_fit", std::string("all")) == "train";
    }
    if (j.contains("eval")) {
      const json& e = j["eval"];
      c.horizon = e.value("horizon", c.horizon);
      c.eval_stride = e.value("stride", c.eval_stride);
      c.poly_degree = e.value("poly_degree", c.poly_degree);
      c.threads = e.value("threads", c.threads);
      c.velocity_ablation = e.value("velocity_ablation", c.velocity_ablation);
      if (e.contains("noise")) {
        const json& n = e["noise"];
        const double sv = n.value("velocity_std", c.eval_noise.std[0]);
        const double sa = n.value("acceleration_std", c.eval_noise.std[3]);
        c.eval_noise = NoiseSpec{{sv, sv, sv, sa, sa, sa}, n.value("seed", c.eval_noise.seed)};
      }
    }
    if (j.contains("robot")) {
      const json& r = j["robot"];
      if (r.contains("follower")) {
        c.robot_follower.mass = r["follower"].value("mass", c.robot_follower.mass);
        c.robot_follower.damping = r["follower"].value("damping", c.robot_follower.damping);
        c.robot_follower.stiffness = r["follower"].value("stiffness", c.robot_follower.stiffness);
      }
      if (r.contains("plans") && r["plans"].is_array()) {
        c.robot_plans.clear();
        for (const json& p : r["plans"]) c.robot_plans.push_back(parse_plan_json(p.dump()));
      }
    }
    if (j.contains("overlay")) {
      c.overlay_period_s = j["overlay"].value("period_s", c.overlay_period_s);
      c.overlay_horizon = j["overlay"].value("horizon", c.overlay_horizon);
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::kConfig, std::string("run config: ") + e.what());
  }
  if (c.horizon < 1 || c.horizon > kMaxHorizon) fail(ErrorKind::kConfig, "horizon must lie in [1, 100]");
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open run config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

RunAllResult run_all(const std::string& out_dir, const RunConfig& config) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) fail(ErrorKind::kIo, "cannot create output directory '" + out_dir + "'");

  RunAllResult result;
  const std::vector<Trial> corpus = make_corpus(config.corpus);
  save_trajectory_csv((dir / "corpus.csv").string(), corpus);
  result.trials = corpus.size();

  result.split = split_by_dyad(corpus, config.train_fraction, config.split_seed);
  const std::vector<Trial> train = select_dyads(corpus, result.split.train_dyads);
  const std::vector<Trial> validation = select_dyads(corpus, result.split.validation_dyads);
  result.train_trials = train.size();
  result.validation_trials = validation.size();
  const ChannelScaler scaler = fit_scaler(config.scaler_from_train_only ? std::span<const Trial>(train)
                                                                        : std::span<const Trial>(corpus));

  CurriculumResult trained = train_curriculum(train, validation, scaler, config.train);
  save_model(trained.model, (dir / "model.bin").string());
  save_model(*trained.base, (dir / "model_stage0.bin").string());
  write_text(dir / "training_report.json", training_report_to_json(trained.report));
  result.training = trained.report;

  EvalOptions opts;
  opts.horizon = config.horizon;
  opts.stride = config.eval_stride;
  opts.threads = config.threads;

  const NnPredictor nn(trained.model);
  const PolyPredictor poly(config.poly_degree, config.corpus.rate_hz);

  opts.dataset_id = "train";
  result.nn_train = evaluate(nn, train, opts);
  result.poly_train = evaluate(poly, train, opts);
  opts.dataset_id = "validation";
  result.nn_validation = evaluate(nn, validation, opts);
  result.poly_validation = evaluate(poly, validation, opts);
  result.base_validation = evaluate(NnPredictor(*trained.base, "nn-stage0"), validation, opts);

  std::vector<HorizonReport> all{result.nn_train, result.poly_train, result.nn_validation, result.poly_validation,
                                 result.base_validation};

  if (config.velocity_ablation) {
    TrainConfig ablation = config.train;
    ablation.channels = kVelocityChannels;
    CurriculumResult vel = train_curriculum(train, validation, scaler, ablation);
    save_model(vel.model, (dir / "model_velocity_only.bin").string());
    write_text(dir / "training_report_velocity_only.json", training_report_to_json(vel.report));
    result.ablation_training = vel.report;
    result.ablation_validation = evaluate(NnPredictor(vel.model, "nn-velocity-only"), validation, opts);
    all.push_back(*result.ablation_validation);
  }

  opts.dataset_id = "noisy";
  opts.noise = config.eval_noise;
  result.nn_noisy = evaluate(nn, validation, opts);
  result.poly_noisy = evaluate(poly, validation, opts);
  opts.noise.reset();
  all.push_back(result.nn_noisy);
  all.push_back(result.poly_noisy);

  result.robot = robot_in_loop_eval(trained.model, config.robot_follower, config.robot_plans, opts,
                                    config.corpus.rate_hz);
  all.push_back(result.robot);

  save_report_csv((dir / "reports.csv").string(), all);
  write_comparison(dir / "compare_train.csv", {result.nn_train, result.poly_train});
  write_comparison(dir / "compare_validation.csv", {result.nn_validation, result.poly_validation});
  write_comparison(dir / "compare_noisy.csv", {result.nn_noisy, result.poly_noisy});
  write_comparison(dir / "compare_overfit.csv", {result.nn_train, result.nn_validation});
  const std::vector<HorizonReport> val_pair{result.nn_validation, result.poly_validation};
  result.crossover_validation = compare(val_pair).crossover_step;

  {
    std::ofstream out(dir / "overlay.csv", std::ios::binary);
    if (!out) fail(ErrorKind::kIo, "cannot write overlay.csv");
    write_overlay_csv(out, overlay(nn, validation.front(), config.overlay_period_s, config.overlay_horizon));
  }

  write_text(dir / "summary.json", run_summary_json(result));
  return result;
}

std::string run_summary_json(const RunAllResult& r) {
  auto at = [](const HorizonReport& h, std::size_t step) { return step <= h.horizon() ? h.mse_v_mean(step) : 0.0; };
  json j;
  j["trials"] = r.trials;
  j["train_trials"] = r.train_trials;
  j["validation_trials"] = r.validation_trials;
  j["train_dyads"] = r.split.train_dyads;
  j["validation_dyads"] = r.split.validation_dyads;
  int converged = 0;
  int last_k = -1;
  for (const auto& s : r.training.stages) {
    if (s.converged) {
      ++converged;
      last_k = s.k;
    }
  }
  j["curriculum_stages_converged"] = converged;
  j["final_k"] = last_k;
  j["n_windows_validation"] = r.nn_validation.n_windows;
  j["nn_validation_mse_v_step50"] = at(r.nn_validation, 50);
  j["nn_train_mse_v_step50"] = at(r.nn_train, 50);
  j["nn_validation_mse_v_step100"] = at(r.nn_validation, 100);
  j["poly_validation_mse_v_step50"] = at(r.poly_validation, 50);
  j["poly_validation_mse_v_step100"] = at(r.poly_validation, 100);
  j["nn_noisy_mse_v_step50"] = at(r.nn_noisy, 50);
  j["nn_noisy_mse_v_step100"] = at(r.nn_noisy, 100);
  j["poly_noisy_mse_v_step100"] = at(r.poly_noisy, 100);
  j["stage0_validation_mse_v_step50"] = at(r.base_validation, 50);
  j["robot_mse_v_step50"] = at(r.robot, 50);
  if (r.ablation_validation) j["velocity_only_validation_mse_v_step50"] = at(*r.ablation_validation, 50);
  if (r.crossover_validation) j["crossover_step_validation"] = *r.crossover_validation;
  return j.dump(2);
}

}  // namespace intent
