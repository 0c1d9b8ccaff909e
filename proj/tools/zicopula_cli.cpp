// zicopula command-line front end. Talks to the library through the C API only.
#include "zicopula/zicopula.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;

// JSON config files: {"<command>": {"<option>": value, ...}, ...}
class ConfigJson : public CLI::Config
{
public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override
  {
    json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_single_name().empty() || !opt->get_configurable())
        continue;
      if (opt->count() == 0 && !default_also)
        continue;
      const auto results = opt->count() ? opt->results() : std::vector<std::string>{ opt->get_default_str() };
      if (results.size() == 1)
        j[opt->get_single_name()] = results.front();
      else
        j[opt->get_single_name()] = results;
    }
    for (const CLI::App* sub : app->get_subcommands({}))
      j[sub->get_name()] = json::parse(to_config(sub, default_also, false, ""));
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override
  {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    return items(j, "", {});
  }

private:
  static std::string scalar(const json& v)
  {
    if (v.is_string())
      return v.get<std::string>();
    if (v.is_boolean())
      return v.get<bool>() ? "true" : "false";
    if (v.is_number())
      return v.dump();
    throw CLI::ConversionError("config values must be strings, numbers, booleans or arrays of those");
  }

  std::vector<CLI::ConfigItem> items(const json& j, const std::string& name, std::vector<std::string> prefix) const
  {
    std::vector<CLI::ConfigItem> out;
    if (j.is_object()) {
      if (!name.empty())
        prefix.push_back(name);
      for (auto it = j.begin(); it != j.end(); ++it) {
        auto sub = items(*it, it.key(), prefix);
        out.insert(out.end(), sub.begin(), sub.end());
      }
      return out;
    }
    if (name.empty())
      throw CLI::ConversionError("config file must contain a JSON object");
    CLI::ConfigItem item;
    item.name = name;
    item.parents = prefix;
    if (j.is_array())
      for (const auto& v : j)
        item.inputs.push_back(scalar(v));
    else
      item.inputs = { scalar(j) };
    out.push_back(std::move(item));
    return out;
  }
};

const char* status_name(zc_status s)
{
  switch (s) {
    case ZC_OK:
      return "ZC_OK";
    case ZC_E_USAGE:
      return "ZC_E_USAGE";
    case ZC_E_DATA:
      return "ZC_E_DATA";
    case ZC_E_NUMERIC:
      return "ZC_E_NUMERIC";
    default:
      return "ZC_E_INTERNAL";
  }
}

struct Failure
{
  zc_status status;
  std::string message;
};

void check(zc_status s)
{
  if (s != ZC_OK)
    throw Failure{ s, zc_last_error() };
}

void usage_error(const std::string& msg)
{
  throw Failure{ ZC_E_USAGE, msg };
}

struct DatasetDeleter
{
  void operator()(zc_dataset* d) const { zc_dataset_free(d); }
};
struct ModelDeleter
{
  void operator()(zc_model* m) const { zc_model_free(m); }
};
struct TruthDeleter
{
  void operator()(zc_ground_truth* g) const { zc_ground_truth_free(g); }
};
using DatasetPtr = std::unique_ptr<zc_dataset, DatasetDeleter>;
using ModelPtr = std::unique_ptr<zc_model, ModelDeleter>;
using TruthPtr = std::unique_ptr<zc_ground_truth, TruthDeleter>;

DatasetPtr read_dataset(const std::string& path, bool clip)
{
  zc_dataset* d = nullptr;
  size_t clipped = 0;
  check(zc_dataset_read_csv(path.c_str(), clip ? 1 : 0, &d, &clipped));
  if (clipped > 0)
    std::cerr << "note: " << clipped << " negative values in " << path << " replaced by 0\n";
  return DatasetPtr(d);
}

std::string fetch_text(const std::function<zc_status(char*, size_t, size_t*)>& call)
{
  size_t needed = 0;
  std::string buf(1 << 16, '\0');
  check(call(buf.data(), buf.size(), &needed));
  if (needed > buf.size()) {
    buf.assign(needed, '\0');
    check(call(buf.data(), buf.size(), &needed));
  }
  buf.resize(needed > 0 ? needed - 1 : 0);
  return buf;
}

std::uint64_t default_seed()
{
  if (const char* env = std::getenv("ZICOPULA_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size())
        return v;
    } catch (const std::exception&) {
    }
    usage_error(std::string("ZICOPULA_SEED is not an unsigned integer: '") + env + "'");
  }
  return 0;
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& raw)
{
  std::vector<std::uint64_t> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty())
        continue;
      const auto dash = tok.find('-');
      try {
        if (dash != std::string::npos && dash > 0) {
          const auto lo = std::stoull(tok.substr(0, dash));
          const auto hi = std::stoull(tok.substr(dash + 1));
          if (hi < lo)
            usage_error("bad seed range '" + tok + "'");
          for (auto s = lo; s <= hi; ++s)
            out.push_back(s);
        } else {
          out.push_back(std::stoull(tok));
        }
      } catch (const std::logic_error&) {
        usage_error("bad seed '" + tok + "'");
      }
    }
  }
  return out;
}

void print_row(const char* line, void*)
{
  std::cout << line << '\n';
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Copula density models for zero-inflated nonnegative data" };
  app.config_formatter(std::make_shared<ConfigJson>());
  app.set_config("--config", "", "JSON config file ({\"<command>\": {\"<option>\": value}}); flags override it");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(zc_version()));

  std::uint64_t seed = 0;
  bool clip = false;

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a model to a training CSV and write a model file");
  std::string fit_train, fit_out, fit_kind = "zibt", fit_mask = "rbm", fit_lik = "approx";
  bool fit_mle = true, fit_rescale = true;
  std::uint64_t fit_mc = 4096;
  std::uint32_t gmm_k = 0, rbm_hidden = 0, rbm_epochs = 200;
  double kde_mult = 0.0;
  fit->add_option("--train", fit_train, "Training CSV (header row required)")->required();
  fit->add_option("--out", fit_out, "Model file to write")->required();
  fit->add_option("--kind", fit_kind, "zicar, zibt, gmm or kde")
    ->check(CLI::IsMember({ "zicar", "zibt", "gmm", "kde" }))
    ->capture_default_str();
  fit->add_option("--mask", fit_mask, "ZICAR mask model: rbm or bernoulli")
    ->check(CLI::IsMember({ "rbm", "bernoulli" }))
    ->capture_default_str();
  fit->add_option("--likelihood", fit_lik, "ZIBT likelihood: exact or approx")
    ->check(CLI::IsMember({ "exact", "approx" }))
    ->capture_default_str();
  fit->add_flag("--mle,!--no-mle", fit_mle, "Pairwise maximum-likelihood correlation (default on)");
  fit->add_flag("--rescale,!--no-rescale", fit_rescale, "Rescale variables so mean log density is 0 (default on)");
  fit->add_option("--mc-samples", fit_mc, "Monte-Carlo samples for exact ZIBT orthant terms")
    ->check(CLI::Range(std::uint64_t{ 2 }, std::uint64_t{ 1 } << 30))
    ->capture_default_str();
  fit->add_option("--gmm-k", gmm_k, "GMM components (0 = tune)")->capture_default_str();
  fit->add_option("--kde-multiplier", kde_mult, "KDE bandwidth multiplier (0 = tune)")->capture_default_str();
  fit->add_option("--rbm-hidden", rbm_hidden, "RBM hidden units (0 = 2D)")->capture_default_str();
  fit->add_option("--rbm-epochs", rbm_epochs, "RBM training epochs")->capture_default_str();

  // score
  auto* score = app.add_subcommand("score", "Write one negative log-likelihood per row");
  std::string score_model, score_data, score_out;
  score->add_option("--model", score_model, "Model file")->required();
  score->add_option("--data", score_data, "Data CSV")->required();
  score->add_option("--out", score_out, "Scores CSV (header nll)")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Sample a synthetic dataset from a random ground truth");
  std::string synth_kind = "zibt", synth_out, synth_sigma_out;
  std::size_t synth_dim = 5, synth_n = 1000;
  synth->add_option("--kind", synth_kind, "zicar or zibt")->check(CLI::IsMember({ "zicar", "zibt" }))->capture_default_str();
  synth->add_option("--D", synth_dim, "Dimension")->check(CLI::Range(2, 20))->capture_default_str();
  synth->add_option("--n", synth_n, "Rows")->check(CLI::PositiveNumber)->capture_default_str();
  synth->add_option("--out", synth_out, "Output CSV")->required();
  synth->add_option("--sigma-out", synth_sigma_out, "Optional CSV for the true correlation matrix");

  // bench
  auto* bench = app.add_subcommand("bench", "Anomaly-detection benchmark on synthetic or credit data");
  std::string bench_kind = "zibt", bench_preset = "desk", bench_results, bench_credit;
  std::vector<std::string> bench_seeds_raw, bench_variants;
  std::size_t bench_dim = 5, bench_n_train = 0, bench_n_test = 0;
  std::uint64_t bench_mc = 4096;
  unsigned bench_jobs = 1;
  bool bench_small = false;
  bench->add_option("--kind", bench_kind, "zicar or zibt")->check(CLI::IsMember({ "zicar", "zibt" }))->capture_default_str();
  bench->add_option("--D", bench_dim, "Dimension")->check(CLI::Range(2, 20))->capture_default_str();
  bench->add_option("--preset", bench_preset, "desk (2000/1000+1000, 5 seeds) or paper (10000/5000+5000, 15 seeds)")
    ->check(CLI::IsMember({ "desk", "paper" }))
    ->capture_default_str();
  bench->add_option("--n-train", bench_n_train, "Override training rows");
  bench->add_option("--n-test", bench_n_test, "Override normal test rows (same number corrupted)");
  bench->add_option("--seeds", bench_seeds_raw, "Seeds, e.g. 0,1,2 or 0-4 (default: preset)")->delimiter(',');
  bench->add_option("--variants", bench_variants, "Variant tags (default: all)")->delimiter(',');
  bench->add_option("--mc-samples", bench_mc, "Monte-Carlo samples for exact ZIBT")->capture_default_str();
  bench->add_option("--jobs", bench_jobs, "Seeds run concurrently")->check(CLI::Range(1u, 256u))->capture_default_str();
  bench->add_option("--results", bench_results, "Results CSV to append to");
  bench->add_option("--credit", bench_credit, "Raw credit CSV: run the credit protocol instead of synthetic data");
  bench->add_flag("--small", bench_small, "Credit: use PAY_AMT1 and BILL_AMT1 only");

  // ingest-credit
  auto* ingest = app.add_subcommand("ingest-credit", "Extract and split the UCI credit card data");
  std::string ingest_in, ingest_train, ingest_test, ingest_all;
  bool ingest_small = false;
  ingest->add_option("--input", ingest_in, "Raw credit CSV")->required();
  ingest->add_option("--out-train", ingest_train, "Training CSV (70%)")->required();
  ingest->add_option("--out-test", ingest_test, "Test CSV (30%)")->required();
  ingest->add_option("--out-all", ingest_all, "Optional CSV with every cleaned row");
  ingest->add_flag("--small", ingest_small, "Only PAY_AMT1 and BILL_AMT1");

  for (auto* sub : { fit, score, synth, bench, ingest })
    sub->add_option("--seed", seed, "Random seed (default: $ZICOPULA_SEED or 0)");
  for (auto* sub : { fit, score })
    sub->add_flag("--clip-negatives", clip, "Replace negative inputs by 0 instead of failing");

  try {
    seed = default_seed();
    try {
      app.parse(argc, argv);
    } catch (const CLI::Success& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      throw Failure{ ZC_E_USAGE, e.what() };
    }

    if (fit->parsed()) {
      DatasetPtr data = read_dataset(fit_train, clip);
      zc_fit_options o;
      zc_fit_options_default(&o);
      o.kind = fit_kind == "zicar"  ? ZC_MODEL_ZICAR
               : fit_kind == "zibt" ? ZC_MODEL_ZIBT
               : fit_kind == "gmm"  ? ZC_MODEL_GMM
                                    : ZC_MODEL_KDE;
      o.mask = fit_mask == "rbm" ? ZC_MASK_RBM : ZC_MASK_BERNOULLI;
      o.likelihood_mode = fit_lik == "exact" ? ZC_LIK_EXACT : ZC_LIK_APPROX;
      o.use_mle = fit_mle ? 1 : 0;
      o.use_rescale = fit_rescale ? 1 : 0;
      o.mc_samples = fit_mc;
      o.seed = seed;
      o.gmm_k = gmm_k;
      o.kde_multiplier = kde_mult;
      o.rbm_hidden = rbm_hidden;
      o.rbm_epochs = rbm_epochs;
      zc_model* raw = nullptr;
      check(zc_model_fit(data.get(), &o, &raw));
      ModelPtr model(raw);
      check(zc_model_save(model.get(), fit_out.c_str()));
      std::cout << fetch_text([&](char* b, size_t c, size_t* n) { return zc_model_summary(model.get(), b, c, n); });
      std::cout << "model written to " << fit_out << "\n";
    } else if (score->parsed()) {
      zc_model* raw = nullptr;
      check(zc_model_load(score_model.c_str(), &raw));
      ModelPtr model(raw);
      DatasetPtr data = read_dataset(score_data, clip);
      std::vector<double> nll(zc_dataset_rows(data.get()));
      check(zc_model_score(model.get(), data.get(), nll.data(), nll.size()));
      std::vector<double> col(nll);
      zc_dataset* out = nullptr;
      check(zc_dataset_create(col.data(), col.size(), 1, &out));
      DatasetPtr out_ds(out);
      // Reuse the dataset writer for full-precision formatting, then swap the header.
      const std::string tmp = score_out + ".tmp";
      check(zc_dataset_write_csv(out_ds.get(), tmp.c_str()));
      std::ifstream in(tmp);
      std::ofstream os(score_out, std::ios::binary | std::ios::trunc);
      if (!in || !os)
        throw Failure{ ZC_E_DATA, "cannot write '" + score_out + "'" };
      std::string line;
      std::getline(in, line);
      os << "nll\n";
      while (std::getline(in, line))
        os << line << '\n';
      in.close();
      std::remove(tmp.c_str());
      if (!os)
        throw Failure{ ZC_E_DATA, "write failed for '" + score_out + "'" };
    } else if (synth->parsed()) {
      zc_ground_truth* g = nullptr;
      check(zc_ground_truth_make(synth_kind == "zicar" ? ZC_DATA_ZICAR : ZC_DATA_ZIBT, synth_dim, seed, &g));
      TruthPtr gt(g);
      zc_dataset* d = nullptr;
      check(zc_ground_truth_sample(gt.get(), synth_n, seed, &d));
      DatasetPtr data(d);
      check(zc_dataset_write_csv(data.get(), synth_out.c_str()));
      if (!synth_sigma_out.empty()) {
        std::vector<double> sigma(synth_dim * synth_dim);
        check(zc_ground_truth_sigma(gt.get(), sigma.data(), sigma.size()));
        zc_dataset* s = nullptr;
        check(zc_dataset_create(sigma.data(), synth_dim, synth_dim, &s));
        DatasetPtr sd(s);
        check(zc_dataset_write_csv(sd.get(), synth_sigma_out.c_str()));
      }
    } else if (bench->parsed()) {
      std::string variants;
      for (const auto& v : bench_variants)
        variants += (variants.empty() ? "" : ",") + v;
      std::vector<std::uint64_t> seeds = parse_seeds(bench_seeds_raw);
      const char* results = bench_results.empty() ? nullptr : bench_results.c_str();
      std::cout << "model_tag,kind,D,seed,auc,sigma_l2_error\n";
      std::string summary;
      if (!bench_credit.empty()) {
        zc_dataset* d = nullptr;
        size_t clamped = 0;
        check(zc_credit_extract(bench_credit.c_str(), bench_small ? 1 : 0, &d, &clamped));
        DatasetPtr data(d);
        if (seeds.empty())
          seeds = { 0, 1, 2, 3, 4 };
        size_t needed = 0;
        std::string buf(1 << 16, '\0');
        check(zc_credit_bench_run(data.get(), seeds.data(), seeds.size(), variants.c_str(), bench_mc, bench_jobs,
                                  results, print_row, nullptr, buf.data(), buf.size(), &needed));
        buf.resize(std::min(buf.size(), needed) - 1);
        summary = buf;
      } else {
        zc_bench_config cfg;
        check(zc_bench_config_preset(bench_preset.c_str(), &cfg));
        cfg.kind = bench_kind == "zicar" ? ZC_DATA_ZICAR : ZC_DATA_ZIBT;
        cfg.dim = bench_dim;
        if (bench_n_train)
          cfg.n_train = bench_n_train;
        if (bench_n_test)
          cfg.n_test = bench_n_test;
        if (!seeds.empty()) {
          cfg.seeds = seeds.data();
          cfg.n_seeds = seeds.size();
        }
        cfg.variants = variants.c_str();
        cfg.mc_samples = bench_mc;
        cfg.jobs = bench_jobs;
        size_t needed = 0;
        std::string buf(1 << 16, '\0');
        check(zc_bench_run(&cfg, results, print_row, nullptr, buf.data(), buf.size(), &needed));
        buf.resize(std::min(buf.size(), needed) - 1);
        summary = buf;
      }
      std::cout << "\n" << summary;
    } else if (ingest->parsed()) {
      zc_dataset* d = nullptr;
      size_t clamped = 0;
      check(zc_credit_extract(ingest_in.c_str(), ingest_small ? 1 : 0, &d, &clamped));
      DatasetPtr data(d);
      zc_dataset* tr = nullptr;
      zc_dataset* te = nullptr;
      check(zc_credit_split(data.get(), seed, &tr, &te));
      DatasetPtr train(tr), test(te);
      check(zc_dataset_write_csv(train.get(), ingest_train.c_str()));
      check(zc_dataset_write_csv(test.get(), ingest_test.c_str()));
      if (!ingest_all.empty())
        check(zc_dataset_write_csv(data.get(), ingest_all.c_str()));
      std::cout << "rows " << zc_dataset_rows(data.get()) << ", columns " << zc_dataset_cols(data.get())
                << ", negatives clamped " << clamped << ", train " << zc_dataset_rows(train.get()) << ", test "
                << zc_dataset_rows(test.get()) << "\n";
    }
  } catch (const Failure& f) {
    std::string msg = f.message;
    for (char& c : msg)
      if (c == '\n')
        c = ' ';
    std::cerr << status_name(f.status) << ": " << msg << std::endl;
    return static_cast<int>(f.status);
  }
  return 0;
}
