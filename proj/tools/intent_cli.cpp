// intent: command-line front end over the C API.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "intent/intent.h"

namespace {

struct Failure {
  intent_status status;
  std::string message;
};

void check(intent_status s) {
  if (s != INTENT_OK) throw Failure{s, intent_last_error()};
}

struct CorpusDeleter {
  void operator()(intent_corpus* c) const { intent_corpus_free(c); }
};
struct ModelDeleter {
  void operator()(intent_model* m) const { intent_model_free(m); }
};
struct ReportDeleter {
  void operator()(intent_report* r) const { intent_report_free(r); }
};
using CorpusPtr = std::unique_ptr<intent_corpus, CorpusDeleter>;
using ModelPtr = std::unique_ptr<intent_model, ModelDeleter>;
using ReportPtr = std::unique_ptr<intent_report, ReportDeleter>;

struct OwnedString {
  char* p = nullptr;
  ~OwnedString() { intent_string_free(p); }
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure{INTENT_ERR_IO, "cannot open '" + path + "'"};
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Failure{INTENT_ERR_IO, "cannot open '" + path + "' for writing"};
  out << text;
}

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

CorpusPtr load_corpus(const std::string& path) {
  intent_corpus* c = nullptr;
  check(intent_corpus_load(path.c_str(), &c));
  return CorpusPtr(c);
}

ModelPtr load_model(const std::string& path) {
  intent_model* m = nullptr;
  check(intent_model_load(path.c_str(), &m));
  return ModelPtr(m);
}

struct SplitArgs {
  double fraction = 0.75;
  std::uint64_t seed = 11;
};

void add_split_options(CLI::App* cmd, SplitArgs& split) {
  cmd->add_option("--train-fraction", split.fraction, "Share of dyads used for training")->capture_default_str();
  cmd->add_option("--split-seed", split.seed, "Seed of the dyad split")->capture_default_str();
}

std::pair<CorpusPtr, CorpusPtr> split_corpus(const intent_corpus* corpus, const SplitArgs& split) {
  intent_corpus* tr = nullptr;
  intent_corpus* va = nullptr;
  check(intent_corpus_split(corpus, split.fraction, split.seed, &tr, &va));
  return {CorpusPtr(tr), CorpusPtr(va)};
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string config;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  std::string text;
  if (!a.config.empty()) text = read_text(a.config);
  intent_corpus* c = nullptr;
  check(intent_corpus_generate(a.config.empty() ? nullptr : text.c_str(), &c));
  CorpusPtr corpus(c);
  check(intent_corpus_save(corpus.get(), a.out.c_str()));
  std::cout << "trials " << intent_corpus_trial_count(corpus.get()) << "\n"
            << "dyads " << intent_corpus_dyad_count(corpus.get()) << "\n"
            << "windows " << intent_corpus_window_count(corpus.get(), INTENT_HISTORY, 50) << "\n";
  return 0;
}

// --- train ------------------------------------------------------------------

struct TrainArgs {
  std::string corpus;
  std::string config;
  std::string out = "model.bin";
  std::string report;
  std::string resume;
  std::string scaler_fit = "all";
  std::string channels;
  SplitArgs split;
};

int cmd_train(const TrainArgs& a) {
  CorpusPtr corpus = load_corpus(a.corpus);
  auto [train, validation] = split_corpus(corpus.get(), a.split);

  std::string config = a.config.empty() ? std::string("{}") : read_text(a.config);
  if (!a.channels.empty()) {
    // Splice the override into the JSON object.
    const auto brace = config.find('{');
    if (brace == std::string::npos) throw Failure{INTENT_ERR_CONFIG, "train config must be a JSON object"};
    const bool empty_object = config.find_first_not_of(" \t\r\n", brace + 1) == config.find('}', brace);
    config.insert(brace + 1, "\"channels\":\"" + a.channels + "\"" + (empty_object ? "" : ","));
  }

  ModelPtr resume;
  if (!a.resume.empty()) resume = load_model(a.resume);
  const intent_corpus* scaler_source = a.scaler_fit == "train" ? train.get() : corpus.get();

  intent_model* m = nullptr;
  OwnedString report;
  check(intent_train(train.get(), validation.get(), scaler_source, config.c_str(), resume.get(), &m, &report.p));
  ModelPtr model(m);
  check(intent_model_save(model.get(), a.out.c_str()));
  const std::string report_path = a.report.empty() ? a.out + ".report.json" : a.report;
  write_text(report_path, std::string(report.p) + "\n");

  intent_model_info info{};
  check(intent_model_info_get(model.get(), &info));
  std::cout << "model " << a.out << "\n"
            << "channels " << info.channels << "\n"
            << "curriculum_k " << info.curriculum_k << "\n"
            << "output " << (info.residual ? "residual" : "absolute") << "\n"
            << "report " << report_path << "\n";
  return 0;
}

// --- predict ----------------------------------------------------------------

struct PredictArgs {
  std::string model;
  std::string input;
  std::string out;
  std::size_t horizon = 50;
  std::size_t trial = 0;
};

int cmd_predict(const PredictArgs& a) {
  ModelPtr model = load_model(a.model);
  CorpusPtr input = load_corpus(a.input);
  std::size_t count = 0;
  double rate = 0.0;
  check(intent_corpus_trial_info(input.get(), a.trial, &count, &rate));
  std::vector<double> samples(count * INTENT_CHANNELS);
  check(intent_corpus_trial_samples(input.get(), a.trial, samples.data()));
  const double dt = 1.0 / rate;

  std::vector<double> out(a.horizon * INTENT_CHANNELS);
  check(intent_predict(model.get(), samples.data(), count, a.horizon, out.data()));

  std::ostringstream csv;
  csv << "step,t,vx,vy,vz,ax,ay,az\n";
  for (std::size_t s = 0; s < a.horizon; ++s) {
    csv << s + 1 << ',' << fmt(static_cast<double>(s + 1) * dt);
    for (int c = 0; c < INTENT_CHANNELS; ++c) csv << ',' << fmt(out[s * INTENT_CHANNELS + c]);
    csv << '\n';
  }
  if (a.out.empty()) std::cout << csv.str();
  else write_text(a.out, csv.str());
  return 0;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string model;
  std::string corpus;
  std::string predictor = "nn";
  int degree = 8;
  std::size_t horizon = 100;
  std::size_t stride = 1;
  std::string noise = "none";
  std::uint64_t noise_seed = 404;
  std::string subset = "all";
  std::string dataset;
  std::string out = "report.csv";
  std::string overlay;
  std::size_t overlay_trial = 0;
  double anchor_period = 1.0;
  std::size_t overlay_horizon = 50;
  bool robot_sim = false;
  std::vector<double> robot_follower;
  SplitArgs split;
};

int cmd_evaluate(const EvaluateArgs& a, std::size_t threads) {
  intent_eval_options opts;
  intent_eval_options_default(&opts);
  opts.horizon = a.horizon;
  opts.stride = a.stride;
  opts.threads = threads;
  opts.noise_seed = a.noise_seed;
  opts.add_noise = a.noise == "default" ? 1 : 0;
  std::string dataset = a.dataset;
  if (dataset.empty()) dataset = a.robot_sim ? "robot-sim" : a.noise == "default" ? "noisy" : a.subset;
  opts.dataset_id = dataset.c_str();

  const bool nn = a.predictor == "nn";
  ModelPtr model;
  if (nn || a.robot_sim || !a.overlay.empty()) {
    if (a.model.empty()) throw Failure{INTENT_ERR_CONFIG, "--model is required for this evaluation"};
    model = load_model(a.model);
  }

  intent_report* r = nullptr;
  if (a.robot_sim) {
    if (!a.robot_follower.empty() && a.robot_follower.size() != 3) {
      throw Failure{INTENT_ERR_CONFIG, "--follower takes mass damping stiffness"};
    }
    check(intent_evaluate_robot(model.get(), a.robot_follower.empty() ? nullptr : a.robot_follower.data(), &opts,
                                &r));
  } else {
    if (a.corpus.empty()) throw Failure{INTENT_ERR_CONFIG, "--corpus is required"};
    CorpusPtr corpus = load_corpus(a.corpus);
    CorpusPtr picked;
    const intent_corpus* target = corpus.get();
    if (a.subset != "all") {
      auto [train, validation] = split_corpus(corpus.get(), a.split);
      picked = a.subset == "train" ? std::move(train) : std::move(validation);
      target = picked.get();
    }
    if (nn) check(intent_evaluate_nn(model.get(), target, &opts, &r));
    else check(intent_evaluate_poly(a.degree, target, &opts, &r));
    if (!a.overlay.empty()) {
      check(intent_overlay_nn(model.get(), target, a.overlay_trial, a.anchor_period, a.overlay_horizon,
                              a.overlay.c_str()));
    }
  }
  ReportPtr report(r);
  check(intent_report_save(report.get(), a.out.c_str()));

  const std::size_t h = intent_report_horizon(report.get(), 0);
  std::cout << "report " << a.out << "\n";
  for (std::size_t step : {std::size_t{1}, std::size_t{25}, std::size_t{50}, std::size_t{100}}) {
    if (step <= h) std::cout << "mse_v step " << step << " " << fmt(intent_report_mse_v(report.get(), 0, step)) << "\n";
  }
  return 0;
}

// --- compare ----------------------------------------------------------------

struct CompareArgs {
  std::vector<std::string> reports;
  std::string out = "comparison.csv";
};

int cmd_compare(const CompareArgs& a) {
  ReportPtr all;
  for (const auto& path : a.reports) {
    intent_report* r = nullptr;
    check(intent_report_load(path.c_str(), &r));
    ReportPtr loaded(r);
    if (!all) all = std::move(loaded);
    else check(intent_report_append(all.get(), loaded.get()));
  }
  std::size_t crossover = 0;
  check(intent_compare(all.get(), a.out.c_str(), &crossover));
  std::cout << "comparison " << a.out << "\n";
  if (crossover > 0) std::cout << "crossover_step " << crossover << "\n";
  else std::cout << "crossover_step none\n";
  return 0;
}

// --- run-all ----------------------------------------------------------------

struct RunAllArgs {
  std::string config;
  std::string out = "run";
};

int cmd_run_all(const RunAllArgs& a, std::size_t threads) {
  std::string text = a.config.empty() ? std::string("{}") : read_text(a.config);
  if (threads > 0) {
    const auto brace = text.find('{');
    if (brace == std::string::npos) throw Failure{INTENT_ERR_CONFIG, "run config must be a JSON object"};
    // Thread count only affects speed; results are identical.
    const bool has_eval = text.find("\"eval\"") != std::string::npos;
    if (!has_eval) {
      const bool empty_object = text.find_first_not_of(" \t\r\n", brace + 1) == text.find('}', brace);
      text.insert(brace + 1, "\"eval\":{\"threads\":" + std::to_string(threads) + "}" + (empty_object ? "" : ","));
    }
  }
  OwnedString summary;
  check(intent_run_all(a.out.c_str(), text.c_str(), &summary.p));
  std::cout << summary.p << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-horizon motion intent forecasting for co-manipulated objects"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0: all cores); results do not depend on it");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a synthetic dyad corpus");
  generate->add_option("--config", gen.config, "Corpus config JSON (default corpus if omitted)")->check(CLI::ExistingFile);
  generate->add_option("-o,--out", gen.out, "Output trajectory CSV")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train the forecasting network with the stabilisation curriculum");
  train->add_option("--corpus", tr.corpus, "Trajectory CSV")->required();
  train->add_option("--config", tr.config, "Train config JSON");
  train->add_option("-o,--out", tr.out, "Output model file")->capture_default_str();
  train->add_option("--report", tr.report, "Training report path (default <out>.report.json)");
  train->add_option("--resume", tr.resume, "Continue the curriculum of a saved model");
  train->add_option("--scaler-fit", tr.scaler_fit, "Fit the scaler on all data or the training split")
      ->check(CLI::IsMember({"all", "train"}))
      ->capture_default_str();
  train->add_option("--channels", tr.channels, "Input/output channels")->check(CLI::IsMember({"all", "velocity"}));
  add_split_options(train, tr.split);

  PredictArgs pr;
  auto* predict = app.add_subcommand("predict", "Forecast the motion following a history");
  predict->add_option("--model", pr.model, "Model file")->required();
  predict->add_option("--input", pr.input, "Trajectory CSV holding the history")->required();
  predict->add_option("--trial", pr.trial, "Index of the trial in the input file")->capture_default_str();
  predict->add_option("--horizon", pr.horizon, "Steps to forecast")->capture_default_str();
  predict->add_option("-o,--out", pr.out, "Forecast CSV (stdout if omitted)");

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score a predictor per step ahead");
  evaluate->add_option("--model", ev.model, "Model file (nn predictor, overlays, robot simulation)");
  evaluate->add_option("--corpus", ev.corpus, "Trajectory CSV");
  evaluate->add_option("--predictor", ev.predictor, "Predictor")
      ->check(CLI::IsMember({"nn", "poly"}))
      ->capture_default_str();
  evaluate->add_option("--degree", ev.degree, "Polynomial degree")->capture_default_str();
  evaluate->add_option("--horizon", ev.horizon, "Steps ahead")->capture_default_str();
  evaluate->add_option("--stride", ev.stride, "Use every n-th window")->capture_default_str();
  evaluate->add_option("--noise", ev.noise, "Corrupt histories with white noise")
      ->check(CLI::IsMember({"none", "default"}))
      ->capture_default_str();
  evaluate->add_option("--noise-seed", ev.noise_seed, "Noise seed")->capture_default_str();
  evaluate->add_option("--subset", ev.subset, "Dyad subset of the corpus")
      ->check(CLI::IsMember({"all", "train", "validation"}))
      ->capture_default_str();
  evaluate->add_option("--dataset", ev.dataset, "Dataset tag written to the report");
  evaluate->add_option("-o,--out", ev.out, "Report CSV")->capture_default_str();
  evaluate->add_option("--overlay", ev.overlay, "Also write an anchored-forecast overlay CSV");
  evaluate->add_option("--overlay-trial", ev.overlay_trial, "Trial index for the overlay")->capture_default_str();
  evaluate->add_option("--anchor-period", ev.anchor_period, "Seconds between overlay anchors")->capture_default_str();
  evaluate->add_option("--overlay-horizon", ev.overlay_horizon, "Steps per overlay forecast")->capture_default_str();
  evaluate->add_flag("--robot-sim", ev.robot_sim, "Evaluate on simulated robot-follower trials");
  evaluate->add_option("--follower", ev.robot_follower, "Robot follower mass damping stiffness")->expected(3);
  add_split_options(evaluate, ev.split);

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Side-by-side per-step comparison of report CSVs");
  compare->add_option("reports", cmp.reports, "Report CSV files")->required()->check(CLI::ExistingFile);
  compare->add_option("-o,--out", cmp.out, "Comparison CSV")->capture_default_str();

  RunAllArgs ra;
  auto* run_all = app.add_subcommand("run-all", "Full reproduction: corpus, training, every evaluation");
  run_all->add_option("--config", ra.config, "Run config JSON");
  run_all->add_option("-o,--out", ra.out, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : INTENT_ERR_CONFIG;
  }

  try {
    if (*generate) return cmd_generate(gen);
    if (*train) return cmd_train(tr);
    if (*predict) return cmd_predict(pr);
    if (*evaluate) return cmd_evaluate(ev, threads);
    if (*compare) return cmd_compare(cmp);
    if (*run_all) return cmd_run_all(ra, threads);
  } catch (const Failure& f) {
    std::cerr << "error: " << intent_status_name(f.status) << ": " << f.message << "\n";
    return f.status == INTENT_ERR_ARGUMENT ? INTENT_ERR_CONFIG : static_cast<int>(f.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return INTENT_ERR_INTERNAL;
  }
  return INTENT_ERR_INTERNAL;
}
