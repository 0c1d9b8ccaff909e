#include "zicopula/zicopula.h"

#include "zicopula/bench.hpp"
#include "zicopula/dataset_io.hpp"
#include "zicopula/error.hpp"
#include "zicopula/fitted_model.hpp"
#include "zicopula/synth_bench.hpp"

#include <cstring>
#include <new>
#include <sstream>
#include <string>

struct zc_dataset
{
  zicopula::Matrix values;
};

struct zc_model
{
  zicopula::FittedModel fitted;
};

struct zc_ground_truth
{
  zicopula::GroundTruth gt;
};

namespace {

using namespace zicopula;

thread_local std::string g_last_error;

zc_status fail(zc_status s, const std::string& msg)
{
  g_last_error = msg;
  return s;
}

template<class Fn>
zc_status guarded(Fn&& fn)
{
  try {
    g_last_error.clear();
    fn();
    return ZC_OK;
  } catch (const UsageError& e) {
    return fail(ZC_E_USAGE, e.what());
  } catch (const DataError& e) {
    return fail(ZC_E_DATA, e.what());
  } catch (const DomainError& e) {
    return fail(ZC_E_DATA, e.what());
  } catch (const NumericError& e) {
    return fail(ZC_E_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(ZC_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(ZC_E_INTERNAL, e.what());
  } catch (...) {
    return fail(ZC_E_INTERNAL, "unknown error");
  }
}

void require(bool cond, const char* what)
{
  if (!cond)
    throw UsageError(what);
}

void copy_text(const std::string& text, char* buf, std::size_t capacity, std::size_t* needed)
{
  if (needed)
    *needed = text.size() + 1;
  if (buf && capacity > 0) {
    const std::size_t n = std::min(text.size(), capacity - 1);
    std::memcpy(buf, text.data(), n);
    buf[n] = '\0';
  }
}

std::vector<std::string> split_tags(const char* s)
{
  std::vector<std::string> out;
  if (!s)
    return out;
  std::istringstream in(s);
  std::string t;
  while (std::getline(in, t, ',')) {
    t.erase(0, t.find_first_not_of(" \t"));
    t.erase(t.find_last_not_of(" \t") + 1);
    if (!t.empty())
      out.push_back(t);
  }
  return out;
}

FitSpec to_spec(const zc_fit_options& o)
{
  FitSpec s;
  require(o.kind >= ZC_MODEL_ZICAR && o.kind <= ZC_MODEL_KDE, "unknown model kind");
  s.kind = static_cast<ModelKind>(o.kind);
  s.seed = o.seed;
  s.zicar.mask = o.mask == ZC_MASK_BERNOULLI ? MaskKind::Bernoulli : MaskKind::Rbm;
  s.zicar.use_mle = o.use_mle != 0;
  s.zicar.use_rescale = o.use_rescale != 0;
  s.zicar.rbm.n_hidden = static_cast<Index>(o.rbm_hidden);
  s.zicar.rbm.epochs = static_cast<int>(o.rbm_epochs);
  s.zicar.rbm.learning_rate = o.rbm_learning_rate;
  s.zicar.rbm.batch_size = static_cast<Index>(o.rbm_batch_size);
  s.zibt.use_mle = o.use_mle != 0;
  s.zibt.use_rescale = o.use_rescale != 0;
  s.zibt.mode = o.likelihood_mode == ZC_LIK_EXACT ? LikelihoodMode::Exact : LikelihoodMode::Approx;
  require(o.mc_samples >= 2, "mc_samples must be at least 2");
  s.zibt.mc_samples = static_cast<std::size_t>(o.mc_samples);
  s.gmm_k = static_cast<Index>(o.gmm_k);
  require(o.gmm_reg > 0.0, "gmm_reg must be positive");
  s.gmm_reg = o.gmm_reg;
  require(o.kde_multiplier >= 0.0, "kde_multiplier must be nonnegative");
  s.kde_multiplier = o.kde_multiplier;
  return s;
}

zc_dataset* new_dataset(Matrix m)
{
  return new zc_dataset{ std::move(m) };
}

std::function<void(const std::vector<BenchResult>&)> row_sink(const char* results_csv,
                                                               zc_bench_row_fn on_row,
                                                               void* user)
{
  std::string path = results_csv ? results_csv : "";
  return [path, on_row, user](const std::vector<BenchResult>& rows) {
    if (!path.empty())
      append_results_csv(path, rows);
    if (on_row)
      for (const auto& r : rows)
        on_row(result_csv_line(r).c_str(), user);
  };
}

const std::uint64_t kDeskSeeds[] = { 0, 1, 2, 3, 4 };
const std::uint64_t kPaperSeeds[] = { 0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14 };

} // namespace

extern "C" {

const char* zc_last_error(void)
{
  return g_last_error.c_str();
}

const char* zc_version(void)
{
  return "1.0.0";
}

zc_status zc_dataset_read_csv(const char* path, int clip_negatives, zc_dataset** out, size_t* n_clipped)
{
  return guarded([&] {
    require(path && out, "zc_dataset_read_csv: null argument");
    Dataset ds = read_csv(path, clip_negatives != 0);
    if (n_clipped)
      *n_clipped = ds.clipped;
    *out = new_dataset(std::move(ds.values));
  });
}

zc_status zc_dataset_create(const double* row_major, size_t rows, size_t cols, zc_dataset** out)
{
  return guarded([&] {
    require(out && (row_major || rows * cols == 0), "zc_dataset_create: null argument");
    Matrix m = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      row_major, static_cast<Index>(rows), static_cast<Index>(cols));
    *out = new_dataset(std::move(m));
  });
}

zc_status zc_dataset_write_csv(const zc_dataset* ds, const char* path)
{
  return guarded([&] {
    require(ds && path, "zc_dataset_write_csv: null argument");
    write_matrix_csv(std::string(path), ds->values);
  });
}

size_t zc_dataset_rows(const zc_dataset* ds)
{
  return ds ? static_cast<size_t>(ds->values.rows()) : 0;
}

size_t zc_dataset_cols(const zc_dataset* ds)
{
  return ds ? static_cast<size_t>(ds->values.cols()) : 0;
}

zc_status zc_dataset_copy_values(const zc_dataset* ds, double* out, size_t capacity)
{
  return guarded([&] {
    require(ds && out, "zc_dataset_copy_values: null argument");
    const auto n = static_cast<size_t>(ds->values.size());
    require(capacity >= n, "zc_dataset_copy_values: buffer too small");
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out, ds->values.rows(), ds->values.cols()) = ds->values;
  });
}

void zc_dataset_free(zc_dataset* ds)
{
  delete ds;
}

void zc_fit_options_default(zc_fit_options* o)
{
  if (!o)
    return;
  o->kind = ZC_MODEL_ZIBT;
  o->mask = ZC_MASK_RBM;
  o->use_mle = 1;
  o->use_rescale = 1;
  o->likelihood_mode = ZC_LIK_APPROX;
  o->mc_samples = kDefaultMcSamples;
  o->seed = 0;
  o->gmm_k = 0;
  o->gmm_reg = 1e-6;
  o->kde_multiplier = 0.0;
  const RbmTrainOptions rbm;
  o->rbm_hidden = 0;
  o->rbm_epochs = static_cast<uint32_t>(rbm.epochs);
  o->rbm_learning_rate = rbm.learning_rate;
  o->rbm_batch_size = static_cast<uint32_t>(rbm.batch_size);
}

zc_status zc_model_fit(const zc_dataset* data, const zc_fit_options* opts, zc_model** out)
{
  return guarded([&] {
    require(data && opts && out, "zc_model_fit: null argument");
    *out = new zc_model{ fit_model(data->values, to_spec(*opts)) };
  });
}

zc_status zc_model_load(const char* path, zc_model** out)
{
  return guarded([&] {
    require(path && out, "zc_model_load: null argument");
    *out = new zc_model{ deserialize_model(read_text_file(path)) };
  });
}

zc_status zc_model_save(const zc_model* model, const char* path)
{
  return guarded([&] {
    require(model && path, "zc_model_save: null argument");
    write_text_file(path, serialize_model(model->fitted));
  });
}

size_t zc_model_dim(const zc_model* model)
{
  return model ? static_cast<size_t>(model->fitted.dim()) : 0;
}

zc_model_kind zc_model_get_kind(const zc_model* model)
{
  return static_cast<zc_model_kind>(model ? model->fitted.kind() : ModelKind::Zicar);
}

zc_status zc_model_summary(const zc_model* model, char* buf, size_t capacity, size_t* needed)
{
  return guarded([&] {
    require(model, "zc_model_summary: null model");
    copy_text(model_summary(model->fitted), buf, capacity, needed);
  });
}

zc_status zc_model_score(const zc_model* model, const zc_dataset* data, double* nll, size_t capacity)
{
  return guarded([&] {
    require(model && data && nll, "zc_model_score: null argument");
    require(capacity >= static_cast<size_t>(data->values.rows()), "zc_model_score: output buffer too small");
    const auto s = score_nll(model->fitted, data->values);
    std::copy(s.begin(), s.end(), nll);
  });
}

void zc_model_free(zc_model* model)
{
  delete model;
}

zc_status zc_ground_truth_make(zc_data_kind kind, size_t dim, uint64_t seed, zc_ground_truth** out)
{
  return guarded([&] {
    require(out, "zc_ground_truth_make: null argument");
    require(kind == ZC_DATA_ZICAR || kind == ZC_DATA_ZIBT, "unknown data kind");
    *out = new zc_ground_truth{ make_ground_truth(kind == ZC_DATA_ZICAR ? DataKind::Zicar : DataKind::Zibt,
                                                  static_cast<Index>(dim), seed) };
  });
}

zc_status zc_ground_truth_sample(const zc_ground_truth* gt, size_t n, uint64_t seed, zc_dataset** out)
{
  return guarded([&] {
    require(gt && out, "zc_ground_truth_sample: null argument");
    require(n >= 1, "sample size must be at least 1");
    *out = new_dataset(sample_dataset(gt->gt, n, seed));
  });
}

zc_status zc_ground_truth_sigma(const zc_ground_truth* gt, double* out, size_t capacity)
{
  return guarded([&] {
    require(gt && out, "zc_ground_truth_sigma: null argument");
    const Matrix& s = gt->gt.sigma.matrix();
    require(capacity >= static_cast<size_t>(s.size()), "zc_ground_truth_sigma: buffer too small");
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out, s.rows(), s.cols()) = s;
  });
}

void zc_ground_truth_free(zc_ground_truth* gt)
{
  delete gt;
}

zc_status zc_corrupt(const zc_dataset* rows, const zc_dataset* train, uint64_t seed, zc_dataset** out)
{
  return guarded([&] {
    require(rows && train && out, "zc_corrupt: null argument");
    *out = new_dataset(corrupt(rows->values, train->values, seed));
  });
}

zc_status zc_auc(const double* normal, size_t n_normal, const double* abnormal, size_t n_abnormal, double* out)
{
  return guarded([&] {
    require(out && (normal || n_normal == 0) && (abnormal || n_abnormal == 0), "zc_auc: null argument");
    *out = auc(std::vector<double>(normal, normal + n_normal), std::vector<double>(abnormal, abnormal + n_abnormal));
  });
}

zc_status zc_bench_config_preset(const char* name, zc_bench_config* cfg)
{
  return guarded([&] {
    require(name && cfg, "zc_bench_config_preset: null argument");
    const BenchConfig p = bench_preset(name);
    cfg->kind = ZC_DATA_ZIBT;
    cfg->dim = static_cast<size_t>(p.dim);
    cfg->n_train = p.n_train;
    cfg->n_test = p.n_test;
    const bool paper = std::string(name) == "paper";
    cfg->seeds = paper ? kPaperSeeds : kDeskSeeds;
    cfg->n_seeds = paper ? std::size(kPaperSeeds) : std::size(kDeskSeeds);
    cfg->variants = nullptr;
    cfg->mc_samples = p.mc_samples;
    cfg->jobs = 1;
  });
}

zc_status zc_bench_run(const zc_bench_config* cfg, const char* results_csv, zc_bench_row_fn on_row, void* user,
                       char* summary, size_t capacity, size_t* needed)
{
  return guarded([&] {
    require(cfg, "zc_bench_run: null config");
    require(cfg->seeds || cfg->n_seeds == 0, "zc_bench_run: null seed list");
    require(cfg->kind == ZC_DATA_ZICAR || cfg->kind == ZC_DATA_ZIBT, "unknown data kind");
    BenchConfig c;
    c.kind = cfg->kind == ZC_DATA_ZICAR ? DataKind::Zicar : DataKind::Zibt;
    c.dim = static_cast<Index>(cfg->dim);
    c.n_train = cfg->n_train;
    c.n_test = cfg->n_test;
    c.seeds.assign(cfg->seeds, cfg->seeds + cfg->n_seeds);
    c.variants = split_tags(cfg->variants);
    c.mc_samples = static_cast<std::size_t>(cfg->mc_samples);
    c.jobs = cfg->jobs;
    const auto results = run_bench(c, row_sink(results_csv, on_row, user));
    copy_text(format_summary(summarize(results)), summary, capacity, needed);
  });
}

zc_status zc_credit_extract(const char* raw_csv, int small, zc_dataset** out, size_t* n_clamped)
{
  return guarded([&] {
    require(raw_csv && out, "zc_credit_extract: null argument");
    *out = new_dataset(extract_credit(raw_csv, small != 0, n_clamped));
  });
}

zc_status zc_credit_split(const zc_dataset* data, uint64_t seed, zc_dataset** train, zc_dataset** test)
{
  return guarded([&] {
    require(data && train && test, "zc_credit_split: null argument");
    auto [tr, te] = split_credit(data->values, seed);
    *train = new_dataset(std::move(tr));
    *test = new_dataset(std::move(te));
  });
}

zc_status zc_credit_bench_run(const zc_dataset* data, const uint64_t* seeds, size_t n_seeds, const char* variants,
                              uint64_t mc_samples, uint32_t jobs, const char* results_csv, zc_bench_row_fn on_row,
                              void* user, char* summary, size_t capacity, size_t* needed)
{
  return guarded([&] {
    require(data && (seeds || n_seeds == 0), "zc_credit_bench_run: null argument");
    CreditBenchConfig c;
    c.seeds.assign(seeds, seeds + n_seeds);
    c.variants = split_tags(variants);
    c.mc_samples = static_cast<std::size_t>(mc_samples);
    c.jobs = jobs;
    const auto results = run_credit_bench(data->values, c, row_sink(results_csv, on_row, user));
    copy_text(format_summary(summarize(results)), summary, capacity, needed);
  });
}

} // extern "C"
