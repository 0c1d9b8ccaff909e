#include "zicopula/bench.hpp"

#include "zicopula/dataset_io.hpp"
#include "zicopula/error.hpp"
#include "zicopula/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace zicopula {

namespace {

enum Stream : std::uint64_t
{
  kStreamTrain = 11,
  kStreamNormal = 12,
  kStreamAbnormalBase = 13,
  kStreamCorrupt = 14,
  kStreamFit = 15,
  kStreamSplit = 16,
};

BenchVariant zicar_variant(const std::string& tag, MaskKind mask, bool mle, bool rescale)
{
  BenchVariant v{ tag, {} };
  v.spec.kind = ModelKind::Zicar;
  v.spec.zicar.mask = mask;
  v.spec.zicar.use_mle = mle;
  v.spec.zicar.use_rescale = rescale;
  return v;
}

BenchVariant zibt_variant(const std::string& tag, LikelihoodMode mode, bool mle, bool rescale, std::size_t mc)
{
  BenchVariant v{ tag, {} };
  v.spec.kind = ModelKind::Zibt;
  v.spec.zibt.mode = mode;
  v.spec.zibt.use_mle = mle;
  v.spec.zibt.use_rescale = rescale;
  v.spec.zibt.mc_samples = mc;
  return v;
}

BenchVariant baseline_variant(const std::string& tag, ModelKind kind)
{
  BenchVariant v{ tag, {} };
  v.spec.kind = kind;
  return v;
}

const CorrelationMatrix* fitted_sigma(const FittedModel& m)
{
  if (const auto* z = std::get_if<ZicarModel>(&m.model))
    return &z->sigma;
  if (const auto* z = std::get_if<ZibtModel>(&m.model))
    return &z->copula.sigma;
  return nullptr;
}

std::vector<BenchResult> evaluate_variants(const std::vector<BenchVariant>& variants,
                                           const BenchSplit& split,
                                           const CorrelationMatrix* truth,
                                           const std::string& kind,
                                           std::uint64_t seed)
{
  std::vector<BenchResult> out;
  for (const auto& v : variants) {
    FitSpec spec = v.spec;
    spec.seed = derive_seed(seed, kStreamFit);
    const FittedModel m = fit_model(split.train, spec);
    BenchResult r;
    r.model_tag = v.tag;
    r.kind = kind;
    r.dim = split.train.cols();
    r.seed = seed;
    r.auc = evaluate_auc(m, split.normal, split.abnormal);
    const CorrelationMatrix* s = fitted_sigma(m);
    r.sigma_l2_error = (truth && s) ? sigma_l2_error(*s, *truth) : std::numeric_limits<double>::quiet_NaN();
    out.push_back(std::move(r));
  }
  return out;
}

// Runs task(i) for i in [0, n) on up to `jobs` threads and hands the results
// to emit(i, result) in index order on the calling thread.
template<class Result, class Task, class Emit>
std::vector<Result> run_ordered(std::size_t n, unsigned jobs, Task&& task, Emit&& emit)
{
  std::vector<Result> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<char> done(n, 0);
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      results[i] = task(i);
      emit(i, results[i]);
    }
    return results;
  }
  std::mutex mu;
  std::condition_variable cv;
  std::atomic<std::size_t> next{ 0 };
  std::atomic<bool> abort{ false };
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || abort.load())
        return;
      Result r;
      std::exception_ptr err;
      try {
        r = task(i);
      } catch (...) {
        err = std::current_exception();
      }
      {
        std::lock_guard<std::mutex> lock(mu);
        results[i] = std::move(r);
        errors[i] = err;
        done[i] = 1;
      }
      cv.notify_all();
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < std::min<std::size_t>(jobs, n); ++t)
    pool.emplace_back(worker);
  std::exception_ptr first_error;
  for (std::size_t i = 0; i < n && !first_error; ++i) {
    std::unique_lock<std::mutex> lock(mu);
    cv.wait(lock, [&] { return done[i] != 0; });
    if (errors[i]) {
      first_error = errors[i];
      abort = true;
      break;
    }
    lock.unlock();
    emit(i, results[i]);
  }
  for (auto& t : pool)
    t.join();
  if (first_error)
    std::rethrow_exception(first_error);
  return results;
}

std::vector<BenchResult> flatten(const std::vector<std::vector<BenchResult>>& per_seed)
{
  std::vector<BenchResult> all;
  for (const auto& v : per_seed)
    all.insert(all.end(), v.begin(), v.end());
  return all;
}

} // namespace

std::vector<BenchVariant> synthetic_variants(std::size_t mc)
{
  return {
    baseline_variant("gmm", ModelKind::Gmm),
    baseline_variant("kde", ModelKind::Kde),
    zicar_variant("zicar-full", MaskKind::Rbm, true, true),
    zicar_variant("zicar-wo-rbm", MaskKind::Bernoulli, true, true),
    zicar_variant("zicar-wo-mle", MaskKind::Rbm, false, true),
    zicar_variant("zicar-wo-rescale", MaskKind::Rbm, true, false),
    zibt_variant("zibt-full", LikelihoodMode::Exact, true, true, mc),
    zibt_variant("zibt-approx", LikelihoodMode::Approx, true, true, mc),
    zibt_variant("zibt-wo-mle", LikelihoodMode::Exact, false, true, mc),
    zibt_variant("zibt-wo-rescale", LikelihoodMode::Exact, true, false, mc),
  };
}

std::vector<BenchVariant> credit_variants(std::size_t mc)
{
  return {
    baseline_variant("gmm", ModelKind::Gmm),
    baseline_variant("kde", ModelKind::Kde),
    zicar_variant("zicar-full", MaskKind::Rbm, true, true),
    zibt_variant("zibt-full", LikelihoodMode::Exact, true, true, mc),
    zibt_variant("zibt-approx", LikelihoodMode::Approx, true, true, mc),
  };
}

std::vector<BenchVariant> select_variants(const std::vector<BenchVariant>& all, const std::vector<std::string>& tags)
{
  if (tags.empty())
    return all;
  std::vector<BenchVariant> out;
  for (const auto& t : tags) {
    auto it = std::find_if(all.begin(), all.end(), [&](const BenchVariant& v) { return v.tag == t; });
    if (it == all.end()) {
      std::string known;
      for (const auto& v : all)
        known += (known.empty() ? "" : ", ") + v.tag;
      throw UsageError("unknown variant '" + t + "' (known: " + known + ")");
    }
    out.push_back(*it);
  }
  return out;
}

BenchConfig desk_preset()
{
  return BenchConfig{};
}

BenchConfig paper_preset()
{
  BenchConfig c;
  c.n_train = 10000;
  c.n_test = 5000;
  c.seeds.resize(15);
  std::iota(c.seeds.begin(), c.seeds.end(), std::uint64_t{ 0 });
  return c;
}

BenchConfig bench_preset(const std::string& name)
{
  if (name == "desk")
    return desk_preset();
  if (name == "paper")
    return paper_preset();
  throw UsageError("unknown preset '" + name + "' (expected desk or paper)");
}

BenchSplit synthetic_split(const GroundTruth& gt, std::size_t n_train, std::size_t n_test, std::uint64_t seed)
{
  BenchSplit s;
  s.train = sample_dataset(gt, n_train, derive_seed(seed, kStreamTrain));
  s.normal = sample_dataset(gt, n_test, derive_seed(seed, kStreamNormal));
  const Matrix base = sample_dataset(gt, n_test, derive_seed(seed, kStreamAbnormalBase));
  s.abnormal = corrupt(base, s.train, derive_seed(seed, kStreamCorrupt));
  return s;
}

double evaluate_auc(const FittedModel& m, const Matrix& normal, const Matrix& abnormal)
{
  const std::vector<double> sn = score_nll(m, normal);
  std::vector<double> sa(static_cast<std::size_t>(abnormal.rows()));
  // Abnormal rows get row indices after the normal ones so Monte-Carlo
  // streams never coincide.
  for (Index r = 0; r < abnormal.rows(); ++r)
    sa[static_cast<std::size_t>(r)] =
      -model_loglik(m, abnormal.row(r).transpose(), static_cast<std::uint64_t>(normal.rows() + r));
  return auc(sn, sa);
}

std::vector<BenchResult> run_bench_seed(const BenchConfig& cfg, std::uint64_t seed)
{
  const auto variants = select_variants(synthetic_variants(cfg.mc_samples), cfg.variants);
  const GroundTruth gt = make_ground_truth(cfg.kind, cfg.dim, seed);
  const BenchSplit split = synthetic_split(gt, cfg.n_train, cfg.n_test, seed);
  return evaluate_variants(variants, split, &gt.sigma, data_kind_name(cfg.kind), seed);
}

std::vector<BenchResult> run_bench(const BenchConfig& cfg,
                                   const std::function<void(const std::vector<BenchResult>&)>& on_seed)
{
  if (cfg.seeds.empty())
    throw UsageError("bench: at least one seed is required");
  if (cfg.n_train < 1 || cfg.n_test < 1)
    throw UsageError("bench: n_train and n_test must be at least 1");
  select_variants(synthetic_variants(cfg.mc_samples), cfg.variants);
  auto per_seed = run_ordered<std::vector<BenchResult>>(
    cfg.seeds.size(), cfg.jobs, [&](std::size_t i) { return run_bench_seed(cfg, cfg.seeds[i]); },
    [&](std::size_t, const std::vector<BenchResult>& r) {
      if (on_seed)
        on_seed(r);
    });
  return flatten(per_seed);
}

std::vector<VariantSummary> summarize(const std::vector<BenchResult>& results)
{
  std::vector<VariantSummary> out;
  std::map<std::string, std::size_t> pos;
  std::vector<std::size_t> sigma_runs;
  for (const auto& r : results) {
    auto [it, fresh] = pos.emplace(r.model_tag, out.size());
    if (fresh) {
      out.push_back({ r.model_tag, 0, 0.0, 0.0 });
      sigma_runs.push_back(0);
    }
    auto& s = out[it->second];
    ++s.runs;
    s.mean_auc += r.auc;
    if (!std::isnan(r.sigma_l2_error)) {
      s.mean_sigma_l2_error += r.sigma_l2_error;
      ++sigma_runs[it->second];
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].mean_auc /= static_cast<double>(out[i].runs);
    out[i].mean_sigma_l2_error = sigma_runs[i] ? out[i].mean_sigma_l2_error / static_cast<double>(sigma_runs[i])
                                               : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::string result_csv_line(const BenchResult& r)
{
  std::ostringstream os;
  os << r.model_tag << ',' << r.kind << ',' << r.dim << ',' << r.seed << ',' << format_double(r.auc) << ','
     << format_double(r.sigma_l2_error);
  return os.str();
}

void append_results_csv(const std::string& path, const std::vector<BenchResult>& rows)
{
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out)
    throw DataError("cannot open results file '" + path + "'");
  if (fresh)
    out << kResultsHeader << '\n';
  for (const auto& r : rows)
    out << result_csv_line(r) << '\n';
  if (!out)
    throw DataError("write failed for '" + path + "'");
}

std::string format_summary(const std::vector<VariantSummary>& s)
{
  std::ostringstream os;
  os << "model_tag            runs  mean_auc  mean_sigma_l2_error\n";
  for (const auto& v : s) {
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %4zu  %8.4f  %s\n", v.model_tag.c_str(), v.runs, v.mean_auc,
                  std::isnan(v.mean_sigma_l2_error) ? "-" : std::to_string(v.mean_sigma_l2_error).c_str());
    os << line;
  }
  return os.str();
}

Matrix extract_credit(const std::string& raw_csv_path, bool small, std::size_t* clamped)
{
  std::ifstream in(raw_csv_path);
  if (!in)
    throw DataError("cannot open '" + raw_csv_path + "'");
  std::vector<std::string> wanted;
  if (small) {
    wanted = { "PAY_AMT1", "BILL_AMT1" };
  } else {
    for (int i = 1; i <= 6; ++i)
      wanted.push_back("PAY_AMT" + std::to_string(i));
    for (int i = 1; i <= 6; ++i)
      wanted.push_back("BILL_AMT" + std::to_string(i));
  }
  auto expected_list = [&] {
    std::string s;
    for (const auto& w : wanted)
      s += (s.empty() ? "" : ", ") + w;
    return s;
  };

  // The public file may carry an extra leading row (X1, X2, ...) above the
  // named header; look for the named header within the first two lines.
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  std::vector<std::size_t> cols;
  while (line_no < 2 && std::getline(in, line)) {
    ++line_no;
    header = split_csv_line(line);
    cols.clear();
    for (const auto& w : wanted) {
      auto it = std::find(header.begin(), header.end(), w);
      if (it == header.end())
        break;
      cols.push_back(static_cast<std::size_t>(it - header.begin()));
    }
    if (cols.size() == wanted.size())
      break;
  }
  if (cols.size() != wanted.size())
    throw DataError(raw_csv_path + ": missing credit columns; expected " + expected_list());

  std::vector<double> flat;
  std::size_t rows = 0;
  std::size_t n_clamped = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r,") == std::string::npos)
      continue;
    const auto f = split_csv_line(line);
    for (std::size_t c : cols) {
      if (c >= f.size())
        throw DataError(raw_csv_path + ": line " + std::to_string(line_no) + ": too few fields");
      double v = 0.0;
      try {
        std::size_t used = 0;
        v = std::stod(f[c], &used);
        if (used != f[c].size() || !std::isfinite(v))
          throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw DataError(raw_csv_path + ": line " + std::to_string(line_no) + ": field '" + header[c] +
                        "' is not a number: '" + f[c] + "'");
      }
      if (v < 0.0) {
        v = 0.0;
        ++n_clamped;
      }
      flat.push_back(v);
    }
    ++rows;
  }
  if (clamped)
    *clamped = n_clamped;
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
    flat.data(), static_cast<Index>(rows), static_cast<Index>(wanted.size()));
}

std::pair<Matrix, Matrix> split_credit(const Matrix& data, std::uint64_t seed)
{
  const Index n = data.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{ 0 });
  Rng rng(derive_seed(seed, kStreamSplit));
  std::shuffle(order.begin(), order.end(), rng.engine());
  const auto n_train = static_cast<std::size_t>(std::llround(0.7 * static_cast<double>(n)));
  const std::vector<Index> tr(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  const std::vector<Index> te(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return { data(tr, Eigen::all), data(te, Eigen::all) };
}

std::vector<BenchResult> run_credit_bench(const Matrix& data,
                                          const CreditBenchConfig& cfg,
                                          const std::function<void(const std::vector<BenchResult>&)>& on_seed)
{
  if (cfg.seeds.empty())
    throw UsageError("bench: at least one seed is required");
  const auto variants = select_variants(credit_variants(cfg.mc_samples), cfg.variants);
  auto per_seed = run_ordered<std::vector<BenchResult>>(
    cfg.seeds.size(), cfg.jobs,
    [&](std::size_t i) {
      const std::uint64_t seed = cfg.seeds[i];
      auto [train, test] = split_credit(data, seed);
      BenchSplit split;
      split.abnormal = corrupt(test, train, derive_seed(seed, kStreamCorrupt));
      split.train = std::move(train);
      split.normal = std::move(test);
      return evaluate_variants(variants, split, nullptr, "credit", seed);
    },
    [&](std::size_t, const std::vector<BenchResult>& r) {
      if (on_seed)
        on_seed(r);
    });
  return flatten(per_seed);
}

} // namespace zicopula
