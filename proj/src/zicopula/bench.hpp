#pragma once

#include "zicopula/fitted_model.hpp"
#include "zicopula/synth_bench.hpp"

#include <functional>
#include <string>
#include <vector>

namespace zicopula {

//! One model configuration evaluated in a benchmark run.
struct BenchVariant
{
  std::string tag;
  FitSpec spec;
};

//! Full variant list for synthetic data (baselines, ZICAR and ZIBT ablations).
std::vector<BenchVariant> synthetic_variants(std::size_t mc_samples);
//! Variants compared on the credit data.
std::vector<BenchVariant> credit_variants(std::size_t mc_samples);
//! Keeps only the listed tags (all when tags is empty). Unknown tags throw.
std::vector<BenchVariant> select_variants(const std::vector<BenchVariant>& all, const std::vector<std::string>& tags);

struct BenchConfig
{
  DataKind kind = DataKind::Zibt;
  Index dim = 5;
  std::size_t n_train = 2000;
  std::size_t n_test = 1000; //!< normal rows; the same number of corrupted rows
  std::vector<std::uint64_t> seeds{ 0, 1, 2, 3, 4 };
  std::vector<std::string> variants; //!< empty = all
  std::size_t mc_samples = kDefaultMcSamples;
  unsigned jobs = 1;
};

BenchConfig desk_preset();
BenchConfig paper_preset();
BenchConfig bench_preset(const std::string& name);

//! Train/normal/abnormal sets for one seed.
struct BenchSplit
{
  Matrix train;
  Matrix normal;
  Matrix abnormal;
};

BenchSplit synthetic_split(const GroundTruth& gt, std::size_t n_train, std::size_t n_test, std::uint64_t seed);

//! AUC of NLL scores between normal and abnormal rows for a fitted model.
double evaluate_auc(const FittedModel& m, const Matrix& normal, const Matrix& abnormal);

std::vector<BenchResult> run_bench_seed(const BenchConfig& cfg, std::uint64_t seed);

//! Runs every seed (up to cfg.jobs concurrently). on_seed is invoked in seed
//! order, from the calling thread, with that seed's rows.
std::vector<BenchResult> run_bench(const BenchConfig& cfg,
                                   const std::function<void(const std::vector<BenchResult>&)>& on_seed = {});

struct VariantSummary
{
  std::string model_tag;
  std::size_t runs = 0;
  double mean_auc = 0.0;
  double mean_sigma_l2_error = 0.0; //!< NaN when not applicable
};

//! Per-tag means, in first-appearance order.
std::vector<VariantSummary> summarize(const std::vector<BenchResult>& results);

inline constexpr const char* kResultsHeader = "model_tag,kind,D,seed,auc,sigma_l2_error";
std::string result_csv_line(const BenchResult& r);
//! Appends rows, writing the header first when the file is new or empty.
void append_results_csv(const std::string& path, const std::vector<BenchResult>& rows);
std::string format_summary(const std::vector<VariantSummary>& s);

// UCI credit card data

//! Extracts PAY_AMT1..6 then BILL_AMT1..6 (or PAY_AMT1, BILL_AMT1 when small)
//! from a raw credit CSV and clamps negatives to 0. clamped receives the
//! number of replaced entries.
Matrix extract_credit(const std::string& raw_csv_path, bool small, std::size_t* clamped = nullptr);

//! Random 70/30 split (21000/9000 on 30000 rows).
std::pair<Matrix, Matrix> split_credit(const Matrix& data, std::uint64_t seed);

struct CreditBenchConfig
{
  std::vector<std::uint64_t> seeds{ 0, 1, 2, 3, 4 };
  std::vector<std::string> variants;
  std::size_t mc_samples = kDefaultMcSamples;
  unsigned jobs = 1;
};

//! Rows have kind "credit" and a NaN sigma_l2_error (no ground truth).
std::vector<BenchResult> run_credit_bench(const Matrix& data,
                                          const CreditBenchConfig& cfg,
                                          const std::function<void(const std::vector<BenchResult>&)>& on_seed = {});

} // namespace zicopula
