/* zicopula: copula density models for zero-inflated nonnegative data. */
#ifndef ZICOPULA_H
#define ZICOPULA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(ZICOPULA_BUILDING)
#    define ZC_API __declspec(dllexport)
#  else
#    define ZC_API __declspec(dllimport)
#  endif
#else
#  define ZC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum zc_status
{
  ZC_OK = 0,
  ZC_E_USAGE = 1,   /* bad arguments */
  ZC_E_DATA = 2,    /* unusable input data or files */
  ZC_E_NUMERIC = 3, /* numerical breakdown */
  ZC_E_INTERNAL = 4
} zc_status;

/* Message of the last failing call on this thread ("" if none). */
ZC_API const char* zc_last_error(void);
ZC_API const char* zc_version(void);

/* ---- datasets: row-major N x D nonnegative matrices ---- */

typedef struct zc_dataset zc_dataset;

/* Header row required. Negatives are an error unless clip_negatives != 0;
   n_clipped (nullable) receives the number of replaced entries. */
ZC_API zc_status zc_dataset_read_csv(const char* path, int clip_negatives, zc_dataset** out, size_t* n_clipped);
ZC_API zc_status zc_dataset_create(const double* row_major, size_t rows, size_t cols, zc_dataset** out);
/* Header x1..xD, shortest round-trip decimals. */
ZC_API zc_status zc_dataset_write_csv(const zc_dataset* ds, const char* path);
ZC_API size_t zc_dataset_rows(const zc_dataset* ds);
ZC_API size_t zc_dataset_cols(const zc_dataset* ds);
ZC_API zc_status zc_dataset_copy_values(const zc_dataset* ds, double* out, size_t capacity);
ZC_API void zc_dataset_free(zc_dataset* ds);

/* ---- models ---- */

typedef struct zc_model zc_model;

typedef enum zc_model_kind
{
  ZC_MODEL_ZICAR = 0,
  ZC_MODEL_ZIBT = 1,
  ZC_MODEL_GMM = 2,
  ZC_MODEL_KDE = 3
} zc_model_kind;

typedef enum zc_mask_kind
{
  ZC_MASK_BERNOULLI = 0,
  ZC_MASK_RBM = 1
} zc_mask_kind;

typedef enum zc_likelihood_mode
{
  ZC_LIK_EXACT = 0,
  ZC_LIK_APPROX = 1
} zc_likelihood_mode;

typedef struct zc_fit_options
{
  zc_model_kind kind;
  zc_mask_kind mask;                  /* zicar */
  int use_mle;                        /* zicar, zibt */
  int use_rescale;                    /* zicar, zibt */
  zc_likelihood_mode likelihood_mode; /* zibt */
  uint64_t mc_samples;                /* zibt exact mode */
  uint64_t seed;
  uint32_t gmm_k;                     /* 0 = tune */
  double gmm_reg;
  double kde_multiplier;              /* 0 = tune */
  uint32_t rbm_hidden;                /* 0 = 2 D */
  uint32_t rbm_epochs;
  double rbm_learning_rate;
  uint32_t rbm_batch_size;
} zc_fit_options;

ZC_API void zc_fit_options_default(zc_fit_options* opts);

ZC_API zc_status zc_model_fit(const zc_dataset* data, const zc_fit_options* opts, zc_model** out);
ZC_API zc_status zc_model_load(const char* path, zc_model** out);
ZC_API zc_status zc_model_save(const zc_model* model, const char* path);
ZC_API size_t zc_model_dim(const zc_model* model);
ZC_API zc_model_kind zc_model_get_kind(const zc_model* model);
ZC_API void zc_model_free(zc_model* model);

/* Copies a NUL-terminated text into buf (truncating to capacity);
   needed (nullable) receives the full size including the terminator. */
ZC_API zc_status zc_model_summary(const zc_model* model, char* buf, size_t capacity, size_t* needed);

/* One negative log-likelihood per row into nll (capacity >= rows). */
ZC_API zc_status zc_model_score(const zc_model* model, const zc_dataset* data, double* nll, size_t capacity);

/* ---- synthetic ground truth and benchmark metrics ---- */

typedef struct zc_ground_truth zc_ground_truth;

typedef enum zc_data_kind
{
  ZC_DATA_ZICAR = 0,
  ZC_DATA_ZIBT = 1
} zc_data_kind;

ZC_API zc_status zc_ground_truth_make(zc_data_kind kind, size_t dim, uint64_t seed, zc_ground_truth** out);
ZC_API zc_status zc_ground_truth_sample(const zc_ground_truth* gt, size_t n, uint64_t seed, zc_dataset** out);
/* Row-major D x D correlation matrix. */
ZC_API zc_status zc_ground_truth_sigma(const zc_ground_truth* gt, double* out, size_t capacity);
ZC_API void zc_ground_truth_free(zc_ground_truth* gt);

/* Positive entries of rows replaced by Uniform(p1, p99) of train positives. */
ZC_API zc_status zc_corrupt(const zc_dataset* rows, const zc_dataset* train, uint64_t seed, zc_dataset** out);
ZC_API zc_status zc_auc(const double* normal, size_t n_normal, const double* abnormal, size_t n_abnormal,
                        double* out);

/* ---- benchmark runs ---- */

typedef struct zc_bench_config
{
  zc_data_kind kind;
  size_t dim;
  size_t n_train;
  size_t n_test;         /* normal rows; as many corrupted rows */
  const uint64_t* seeds;
  size_t n_seeds;
  const char* variants;  /* comma-separated tags, NULL or "" = all */
  uint64_t mc_samples;
  uint32_t jobs;
} zc_bench_config;

/* Fills sizes and seed list of "desk" or "paper"; seeds point to static storage. */
ZC_API zc_status zc_bench_config_preset(const char* name, zc_bench_config* cfg);

/* Called once per result row, in seed order, with a results-CSV line. */
typedef void (*zc_bench_row_fn)(const char* csv_line, void* user);

/* Runs the benchmark. Rows are appended to results_csv (nullable) after each
   seed; the averaged summary table goes to summary (see zc_model_summary). */
ZC_API zc_status zc_bench_run(const zc_bench_config* cfg, const char* results_csv, zc_bench_row_fn on_row,
                              void* user, char* summary, size_t capacity, size_t* needed);

/* ---- UCI credit data ---- */

/* PAY_AMT1..6 and BILL_AMT1..6 (small != 0: PAY_AMT1, BILL_AMT1) with
   negatives clamped to 0. */
ZC_API zc_status zc_credit_extract(const char* raw_csv, int small, zc_dataset** out, size_t* n_clamped);
/* Random 70/30 split. */
ZC_API zc_status zc_credit_split(const zc_dataset* data, uint64_t seed, zc_dataset** train, zc_dataset** test);
ZC_API zc_status zc_credit_bench_run(const zc_dataset* data, const uint64_t* seeds, size_t n_seeds,
                                     const char* variants, uint64_t mc_samples, uint32_t jobs,
                                     const char* results_csv, zc_bench_row_fn on_row, void* user, char* summary,
                                     size_t capacity, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif /* ZICOPULA_H */
