#include "intent/intent.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "intent/error.hpp"
#include "intent/eval.hpp"
#include "intent/pipeline.hpp"

struct intent_corpus {
  std::vector<intent::Trial> trials;
};

struct intent_model {
  intent::MlpModel model;
};

struct intent_report {
  std::vector<intent::HorizonReport> reports;
};

namespace {

thread_local std::string g_last_error;

intent_status status_of(intent::ErrorKind kind) {
  switch (kind) {
    case intent::ErrorKind::kConfig: return INTENT_ERR_CONFIG;
    case intent::ErrorKind::kData: return INTENT_ERR_DATA;
    case intent::ErrorKind::kNumeric: return INTENT_ERR_NUMERIC;
    case intent::ErrorKind::kIo: return INTENT_ERR_IO;
    case intent::ErrorKind::kFormat: return INTENT_ERR_FORMAT;
    case intent::ErrorKind::kVersion: return INTENT_ERR_VERSION;
  }
  return INTENT_ERR_INTERNAL;
}

template <typename Fn>
intent_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return INTENT_OK;
  } catch (const intent::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return INTENT_ERR_INTERNAL;
}

intent_status bad_argument(const char* what) {
  g_last_error = std::string("invalid argument: ") + what;
  return INTENT_ERR_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<intent::TrajectorySample> read_samples(const double* samples, std::size_t n) {
  std::vector<intent::TrajectorySample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < intent::kChannels; ++c) out[i][c] = samples[i * intent::kChannels + c];
  }
  return out;
}

void write_forecast(const intent::Forecast& f, std::size_t channels, double* out) {
  for (std::size_t s = 0; s < f.steps.size(); ++s) {
    for (std::size_t c = 0; c < intent::kChannels; ++c) {
      out[s * intent::kChannels + c] = c < channels ? f.steps[s][c] : 0.0;
    }
  }
}

intent::EvalOptions to_options(const intent_eval_options* o) {
  intent::EvalOptions opts;
  if (!o) return opts;
  opts.horizon = o->horizon;
  opts.stride = o->stride;
  opts.threads = o->threads;
  if (o->dataset_id) opts.dataset_id = o->dataset_id;
  if (o->add_noise) {
    const double sv = o->noise_velocity_std;
    const double sa = o->noise_acceleration_std;
    opts.noise = intent::NoiseSpec{{sv, sv, sv, sa, sa, sa}, o->noise_seed};
  }
  return opts;
}

}  // namespace

extern "C" {

const char* intent_last_error(void) { return g_last_error.c_str(); }

const char* intent_version(void) { return "1.0.0"; }

const char* intent_status_name(intent_status status) {
  switch (status) {
    case INTENT_OK: return "ok";
    case INTENT_ERR_INTERNAL: return "internal error";
    case INTENT_ERR_CONFIG: return "config error";
    case INTENT_ERR_DATA: return "data error";
    case INTENT_ERR_NUMERIC: return "numeric error";
    case INTENT_ERR_IO: return "io error";
    case INTENT_ERR_FORMAT: return "format error";
    case INTENT_ERR_VERSION: return "version error";
    case INTENT_ERR_ARGUMENT: return "invalid argument";
  }
  return "unknown status";
}

void intent_string_free(char* s) { delete[] s; }

intent_status intent_corpus_generate(const char* config_json, intent_corpus** out) {
  if (!out) return bad_argument("out is null");
  return guarded([&] {
    const intent::CorpusConfig config =
        config_json ? intent::parse_corpus_config(config_json) : intent::default_corpus_config();
    *out = new intent_corpus{intent::make_corpus(config)};
  });
}

intent_status intent_corpus_load(const char* path, intent_corpus** out) {
  if (!path || !out) return bad_argument("path or out is null");
  return guarded([&] { *out = new intent_corpus{intent::load_trajectory_csv(path)}; });
}

intent_status intent_corpus_save(const intent_corpus* corpus, const char* path) {
  if (!corpus || !path) return bad_argument("corpus or path is null");
  return guarded([&] { intent::save_trajectory_csv(path, corpus->trials); });
}

void intent_corpus_free(intent_corpus* corpus) { delete corpus; }

size_t intent_corpus_trial_count(const intent_corpus* corpus) { return corpus ? corpus->trials.size() : 0; }

size_t intent_corpus_dyad_count(const intent_corpus* corpus) {
  return corpus ? intent::dyad_ids(corpus->trials).size() : 0;
}

size_t intent_corpus_window_count(const intent_corpus* corpus, size_t history, size_t future) {
  if (!corpus) return 0;
  std::size_t n = 0;
  for (const auto& t : corpus->trials) n += intent::window_count(t.samples.size(), history, future);
  return n;
}

intent_status intent_corpus_trial_info(const intent_corpus* corpus, size_t index, size_t* n_samples,
                                       double* rate_hz) {
  if (!corpus) return bad_argument("corpus is null");
  return guarded([&] {
    if (index >= corpus->trials.size()) {
      intent::fail(intent::ErrorKind::kConfig, "trial index " + std::to_string(index) + " out of range");
    }
    if (n_samples) *n_samples = corpus->trials[index].samples.size();
    if (rate_hz) *rate_hz = corpus->trials[index].sample_rate_hz;
  });
}

intent_status intent_corpus_trial_samples(const intent_corpus* corpus, size_t index, double* out) {
  if (!corpus || !out) return bad_argument("null pointer");
  return guarded([&] {
    if (index >= corpus->trials.size()) {
      intent::fail(intent::ErrorKind::kConfig, "trial index " + std::to_string(index) + " out of range");
    }
    const auto& samples = corpus->trials[index].samples;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      for (std::size_t c = 0; c < intent::kChannels; ++c) out[i * intent::kChannels + c] = samples[i][c];
    }
  });
}

intent_status intent_corpus_split(const intent_corpus* corpus, double train_fraction, uint64_t seed,
                                  intent_corpus** train, intent_corpus** validation) {
  if (!corpus || !train || !validation) return bad_argument("null handle");
  return guarded([&] {
    const intent::DatasetSplit split = intent::split_by_dyad(corpus->trials, train_fraction, seed);
    auto tr = std::make_unique<intent_corpus>(intent_corpus{intent::select_dyads(corpus->trials, split.train_dyads)});
    auto va =
        std::make_unique<intent_corpus>(intent_corpus{intent::select_dyads(corpus->trials, split.validation_dyads)});
    *train = tr.release();
    *validation = va.release();
  });
}

intent_status intent_train(const intent_corpus* train, const intent_corpus* validation,
                           const intent_corpus* scaler_source, const char* config_json, const intent_model* resume,
                           intent_model** out, char** report_json) {
  if (!train || !validation || !out) return bad_argument("null handle");
  return guarded([&] {
    const intent::TrainConfig config =
        config_json ? intent::parse_train_config(config_json) : intent::TrainConfig{};
    intent::ChannelScaler scaler;
    if (!resume) {
      if (scaler_source) {
        scaler = intent::fit_scaler(scaler_source->trials);
      } else {
        std::vector<intent::Trial> pooled = train->trials;
        pooled.insert(pooled.end(), validation->trials.begin(), validation->trials.end());
        scaler = intent::fit_scaler(pooled);
      }
    }
    std::optional<intent::MlpModel> start;
    if (resume) start = resume->model;
    intent::CurriculumResult result = intent::train_curriculum(train->trials, validation->trials, scaler, config, start);
    const std::string report = intent::training_report_to_json(result.report);
    auto model = std::make_unique<intent_model>(intent_model{std::move(result.model)});
    if (report_json) *report_json = dup_string(report);
    *out = model.release();
  });
}

intent_status intent_model_load(const char* path, intent_model** out) {
  if (!path || !out) return bad_argument("path or out is null");
  return guarded([&] { *out = new intent_model{intent::load_model(path)}; });
}

intent_status intent_model_save(const intent_model* model, const char* path) {
  if (!model || !path) return bad_argument("model or path is null");
  return guarded([&] { intent::save_model(model->model, path); });
}

void intent_model_free(intent_model* model) { delete model; }

intent_status intent_model_info_get(const intent_model* model, intent_model_info* info) {
  if (!model || !info) return bad_argument("model or info is null");
  return guarded([&] {
    const intent::MlpModel& m = model->model;
    info->input_dim = static_cast<size_t>(m.input_dim());
    info->output_dim = static_cast<size_t>(m.output_dim());
    info->channels = intent::model_channels(m);
    info->history = intent::model_history(m);
    info->layer_count = m.layer_count();
    info->parameter_count = m.parameter_count();
    info->curriculum_k = m.curriculum_k;
    info->residual = m.output_mode == intent::OutputMode::kResidual ? 1 : 0;
  });
}

intent_status intent_predict(const intent_model* model, const double* samples, size_t n_samples, size_t horizon,
                             double* out) {
  if (!model || !samples || !out) return bad_argument("null pointer");
  return guarded([&] {
    const std::size_t history = intent::model_history(model->model);
    if (n_samples < history) {
      intent::fail(intent::ErrorKind::kData, "insufficient history: need " + std::to_string(history) +
                                                 " samples, got " + std::to_string(n_samples));
    }
    if (horizon < 1 || horizon > intent::kMaxHorizon) {
      intent::fail(intent::ErrorKind::kConfig, "horizon must lie in [1, 100]");
    }
    const auto hist = read_samples(samples + (n_samples - history) * intent::kChannels, history);
    const intent::Forecast f = intent::rollout(model->model, hist, horizon);
    write_forecast(f, intent::model_channels(model->model), out);
  });
}

intent_status intent_poly_predict(int degree, double rate_hz, const double* samples, size_t n_samples,
                                  size_t horizon, double* out) {
  if (!samples || !out) return bad_argument("null pointer");
  return guarded([&] {
    if (n_samples < intent::kHistoryLength) {
      intent::fail(intent::ErrorKind::kData, "insufficient history: need " + std::to_string(intent::kHistoryLength) +
                                                 " samples, got " + std::to_string(n_samples));
    }
    if (horizon < 1 || horizon > intent::kMaxHorizon) {
      intent::fail(intent::ErrorKind::kConfig, "horizon must lie in [1, 100]");
    }
    const auto hist =
        read_samples(samples + (n_samples - intent::kHistoryLength) * intent::kChannels, intent::kHistoryLength);
    write_forecast(intent::extrapolate(intent::fit_poly(hist, degree), horizon, rate_hz), intent::kChannels, out);
  });
}

void intent_eval_options_default(intent_eval_options* options) {
  if (!options) return;
  const intent::NoiseSpec noise = intent::NoiseSpec::standard(404);
  options->horizon = intent::kMaxHorizon;
  options->stride = 1;
  options->add_noise = 0;
  options->noise_velocity_std = noise.std[0];
  options->noise_acceleration_std = noise.std[3];
  options->noise_seed = noise.seed;
  options->threads = 0;
  options->dataset_id = nullptr;
}

intent_status intent_evaluate_nn(const intent_model* model, const intent_corpus* corpus,
                                 const intent_eval_options* options, intent_report** out) {
  if (!model || !corpus || !out) return bad_argument("null handle");
  return guarded([&] {
    const intent::NnPredictor nn(model->model);
    *out = new intent_report{{intent::evaluate(nn, corpus->trials, to_options(options))}};
  });
}

intent_status intent_evaluate_poly(int degree, const intent_corpus* corpus, const intent_eval_options* options,
                                   intent_report** out) {
  if (!corpus || !out) return bad_argument("null handle");
  return guarded([&] {
    const double rate = corpus->trials.empty() ? intent::kNominalRateHz : corpus->trials.front().sample_rate_hz;
    const intent::PolyPredictor poly(degree, rate);
    *out = new intent_report{{intent::evaluate(poly, corpus->trials, to_options(options))}};
  });
}

intent_status intent_evaluate_robot(const intent_model* model, const double* follower_mbk,
                                    const intent_eval_options* options, intent_report** out) {
  if (!model || !out) return bad_argument("null handle");
  return guarded([&] {
    intent::FollowerImpedance follower = intent::default_robot_follower();
    if (follower_mbk) follower = {follower_mbk[0], follower_mbk[1], follower_mbk[2]};
    const auto plans = intent::default_robot_plans();
    *out = new intent_report{{intent::robot_in_loop_eval(model->model, follower, plans, to_options(options))}};
  });
}

intent_status intent_report_load(const char* path, intent_report** out) {
  if (!path || !out) return bad_argument("path or out is null");
  return guarded([&] { *out = new intent_report{intent::load_report_csv(path)}; });
}

intent_status intent_report_save(const intent_report* report, const char* path) {
  if (!report || !path) return bad_argument("report or path is null");
  return guarded([&] { intent::save_report_csv(path, report->reports); });
}

intent_status intent_report_append(intent_report* report, const intent_report* other) {
  if (!report || !other) return bad_argument("null handle");
  return guarded([&] { report->reports.insert(report->reports.end(), other->reports.begin(), other->reports.end()); });
}

void intent_report_free(intent_report* report) { delete report; }

size_t intent_report_count(const intent_report* report) { return report ? report->reports.size() : 0; }

size_t intent_report_horizon(const intent_report* report, size_t index) {
  if (!report || index >= report->reports.size()) return 0;
  return report->reports[index].horizon();
}

double intent_report_mse_v(const intent_report* report, size_t index, size_t step) {
  if (!report || index >= report->reports.size()) return std::numeric_limits<double>::quiet_NaN();
  const auto& r = report->reports[index];
  if (step < 1 || step > r.horizon()) return std::numeric_limits<double>::quiet_NaN();
  return r.mse_v_mean(step);
}

intent_status intent_compare(const intent_report* report, const char* csv_path, size_t* crossover_step) {
  if (!report || !csv_path) return bad_argument("report or path is null");
  return guarded([&] {
    const intent::ComparisonTable table = intent::compare(report->reports);
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) intent::fail(intent::ErrorKind::kIo, std::string("cannot open '") + csv_path + "' for writing");
    intent::write_comparison_csv(out, table);
    if (!out) intent::fail(intent::ErrorKind::kIo, std::string("failed writing '") + csv_path + "'");
    if (crossover_step) *crossover_step = table.crossover_step.value_or(0);
  });
}

intent_status intent_overlay_nn(const intent_model* model, const intent_corpus* corpus, size_t trial_index,
                                double anchor_period_s, size_t horizon, const char* csv_path) {
  if (!model || !corpus || !csv_path) return bad_argument("null pointer");
  return guarded([&] {
    if (trial_index >= corpus->trials.size()) {
      intent::fail(intent::ErrorKind::kConfig, "trial index " + std::to_string(trial_index) + " out of range");
    }
    const intent::NnPredictor nn(model->model);
    const intent::OverlayTrace trace = intent::overlay(nn, corpus->trials[trial_index], anchor_period_s, horizon);
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) intent::fail(intent::ErrorKind::kIo, std::string("cannot open '") + csv_path + "' for writing");
    intent::write_overlay_csv(out, trace);
  });
}

intent_status intent_run_all(const char* out_dir, const char* config_json, char** summary_json) {
  if (!out_dir) return bad_argument("out_dir is null");
  return guarded([&] {
    const intent::RunConfig config =
        config_json ? intent::parse_run_config(config_json) : intent::default_run_config();
    const intent::RunAllResult result = intent::run_all(out_dir, config);
    if (summary_json) *summary_json = dup_string(intent::run_summary_json(result));
  });
}

}  // extern "C"
