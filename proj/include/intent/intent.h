/* C interface to the motion-intent forecasting library.
 *
 * Every function returns an intent_status. On failure the message is
 * available from intent_last_error() until the next call on the same
 * thread. Handles are opaque and owned by the caller; release them with the
 * matching *_free function. Strings returned through char** must be released
 * with intent_string_free.
 */
#ifndef INTENT_INTENT_H
#define INTENT_INTENT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(INTENT_BUILDING_LIBRARY)
#    define INTENT_API __declspec(dllexport)
#  else
#    define INTENT_API __declspec(dllimport)
#  endif
#else
#  define INTENT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum intent_status {
  INTENT_OK = 0,
  INTENT_ERR_INTERNAL = 1,
  INTENT_ERR_CONFIG = 2,
  INTENT_ERR_DATA = 3,
  INTENT_ERR_NUMERIC = 4,
  INTENT_ERR_IO = 5,
  INTENT_ERR_FORMAT = 6,
  INTENT_ERR_VERSION = 7,
  INTENT_ERR_ARGUMENT = 8
} intent_status;

#define INTENT_CHANNELS 6
#define INTENT_HISTORY 150
#define INTENT_MAX_HORIZON 100

typedef struct intent_corpus intent_corpus;
typedef struct intent_model intent_model;
typedef struct intent_report intent_report;

INTENT_API const char* intent_last_error(void);
INTENT_API const char* intent_version(void);
INTENT_API const char* intent_status_name(intent_status status);
INTENT_API void intent_string_free(char* s);

/* Corpus: a set of trials. */
INTENT_API intent_status intent_corpus_generate(const char* config_json, intent_corpus** out);
INTENT_API intent_status intent_corpus_load(const char* path, intent_corpus** out);
INTENT_API intent_status intent_corpus_save(const intent_corpus* corpus, const char* path);
INTENT_API void intent_corpus_free(intent_corpus* corpus);
INTENT_API size_t intent_corpus_trial_count(const intent_corpus* corpus);
INTENT_API size_t intent_corpus_dyad_count(const intent_corpus* corpus);
/* Windows of `history` past and `future` next samples summed over trials. */
INTENT_API size_t intent_corpus_window_count(const intent_corpus* corpus, size_t history, size_t future);
/* Sample count and rate of one trial, and a copy of its samples as
 * n_samples rows of INTENT_CHANNELS values. */
INTENT_API intent_status intent_corpus_trial_info(const intent_corpus* corpus, size_t index, size_t* n_samples,
                                                  double* rate_hz);
INTENT_API intent_status intent_corpus_trial_samples(const intent_corpus* corpus, size_t index, double* out);
INTENT_API intent_status intent_corpus_split(const intent_corpus* corpus, double train_fraction, uint64_t seed,
                                             intent_corpus** train, intent_corpus** validation);

/* Training. config_json may be NULL for defaults. scaler_source is fitted
 * for a fresh model (ignored on resume); pass the training corpus for a
 * train-only fit. report_json may be NULL. */
INTENT_API intent_status intent_train(const intent_corpus* train, const intent_corpus* validation,
                                      const intent_corpus* scaler_source, const char* config_json,
                                      const intent_model* resume, intent_model** out, char** report_json);

typedef struct intent_model_info {
  size_t input_dim;
  size_t output_dim;
  size_t channels;
  size_t history;
  size_t layer_count;
  size_t parameter_count;
  int32_t curriculum_k;
  int residual; /* 1 when outputs are added to the newest history frame */
} intent_model_info;

INTENT_API intent_status intent_model_load(const char* path, intent_model** out);
INTENT_API intent_status intent_model_save(const intent_model* model, const char* path);
INTENT_API void intent_model_free(intent_model* model);
INTENT_API intent_status intent_model_info_get(const intent_model* model, intent_model_info* info);

/* samples: n_samples rows of INTENT_CHANNELS values (vx vy vz ax ay az).
 * The last `history` rows are used. out receives horizon rows of
 * INTENT_CHANNELS values; acceleration columns are zero for velocity-only
 * models. */
INTENT_API intent_status intent_predict(const intent_model* model, const double* samples, size_t n_samples,
                                        size_t horizon, double* out);
/* Polynomial baseline on the last INTENT_HISTORY rows. */
INTENT_API intent_status intent_poly_predict(int degree, double rate_hz, const double* samples, size_t n_samples,
                                             size_t horizon, double* out);

/* Evaluation. */
typedef struct intent_eval_options {
  size_t horizon;             /* 1..100 */
  size_t stride;              /* every stride-th window */
  int add_noise;              /* nonzero: corrupt histories */
  double noise_velocity_std;  /* m/s */
  double noise_acceleration_std;
  uint64_t noise_seed;
  size_t threads;             /* 0: hardware concurrency */
  const char* dataset_id;     /* NULL: "validation" */
} intent_eval_options;

INTENT_API void intent_eval_options_default(intent_eval_options* options);

/* Holds one or more horizon reports. */
INTENT_API intent_status intent_evaluate_nn(const intent_model* model, const intent_corpus* corpus,
                                            const intent_eval_options* options, intent_report** out);
INTENT_API intent_status intent_evaluate_poly(int degree, const intent_corpus* corpus,
                                              const intent_eval_options* options, intent_report** out);
/* Robot-in-the-loop surrogate with the built-in plans; follower NULL uses
 * the default robot follower (mass, damping, stiffness). */
INTENT_API intent_status intent_evaluate_robot(const intent_model* model, const double* follower_mbk,
                                               const intent_eval_options* options, intent_report** out);
INTENT_API intent_status intent_report_load(const char* path, intent_report** out);
INTENT_API intent_status intent_report_save(const intent_report* report, const char* path);
/* Appends copies of all reports in `other`. */
INTENT_API intent_status intent_report_append(intent_report* report, const intent_report* other);
INTENT_API void intent_report_free(intent_report* report);
INTENT_API size_t intent_report_count(const intent_report* report);
INTENT_API size_t intent_report_horizon(const intent_report* report, size_t index);
/* Mean velocity MSE at a 1-based step; NaN when out of range. */
INTENT_API double intent_report_mse_v(const intent_report* report, size_t index, size_t step);

/* Comparison CSV over every report held; crossover_step receives the first
 * step where the first nn report beats the first poly report, or 0. */
INTENT_API intent_status intent_compare(const intent_report* report, const char* csv_path, size_t* crossover_step);

/* Overlay CSV for one trial of the corpus, selected by index. */
INTENT_API intent_status intent_overlay_nn(const intent_model* model, const intent_corpus* corpus, size_t trial_index,
                                           double anchor_period_s, size_t horizon, const char* csv_path);

/* Full reproduction pipeline. config_json may be NULL. summary_json may be
 * NULL. */
INTENT_API intent_status intent_run_all(const char* out_dir, const char* config_json, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif
