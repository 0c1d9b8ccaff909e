#include "zicopula/baselines.hpp"

#include "zicopula/error.hpp"
#include "zicopula/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace zicopula {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356;
constexpr int kMaxReinit = 3;

double log_sum_exp(const Vector& v)
{
  const double m = v.maxCoeff();
  if (!std::isfinite(m))
    return m;
  return m + std::log((v.array() - m).exp().sum());
}

Matrix sample_covariance(const Matrix& data)
{
  const Matrix centered = data.rowwise() - data.colwise().mean();
  return centered.transpose() * centered / static_cast<double>(std::max<Index>(data.rows() - 1, 1));
}

Matrix kmeanspp_centers(const Matrix& data, Index k, Rng& rng)
{
  const Index n = data.rows();
  Matrix centers(k, data.cols());
  centers.row(0) = data.row(static_cast<Index>(rng.index(static_cast<std::size_t>(n))));
  Vector dist2 = (data.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (Index c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        u -= dist2(pick);
        if (u < 0.0)
          break;
      }
    } else {
      pick = static_cast<Index>(rng.index(static_cast<std::size_t>(n)));
    }
    centers.row(c) = data.row(pick);
    dist2 = dist2.cwiseMin((data.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }
  return centers;
}

std::pair<std::vector<Index>, std::vector<Index>> split_indices(Index n, std::uint64_t seed)
{
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{ 0 });
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng.engine());
  const auto n_train = static_cast<std::size_t>(std::llround(0.8 * static_cast<double>(n)));
  return { std::vector<Index>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train)),
           std::vector<Index>(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end()) };
}

template<class Model, class Score>
double mean_score(const Model& m, const Matrix& data, Score&& score)
{
  double acc = 0.0;
  for (Index r = 0; r < data.rows(); ++r)
    acc += score(m, data.row(r).transpose());
  return acc / static_cast<double>(data.rows());
}

} // namespace

GmmModel::GmmModel(Vector weights, Matrix means, std::vector<Matrix> covariances)
  : weights_(std::move(weights))
  , means_(std::move(means))
  , covs_(std::move(covariances))
{
  const Index k = weights_.size();
  if (k < 1 || means_.rows() != k || static_cast<Index>(covs_.size()) != k)
    throw DataError("GMM: parameter dimensions disagree");
  if ((weights_.array() < 0.0).any() || std::abs(weights_.sum() - 1.0) > 1e-9)
    throw DataError("GMM: weights must be a probability vector");
  const Index d = means_.cols();
  log_norm_.resize(k);
  for (Index c = 0; c < k; ++c) {
    const Matrix& cov = covs_[static_cast<std::size_t>(c)];
    if (cov.rows() != d || cov.cols() != d)
      throw DataError("GMM: covariance has wrong shape");
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success)
      throw NumericError("GMM: covariance is not positive definite");
    Matrix l = llt.matrixL();
    log_norm_(c) = std::log(weights_(c)) - 0.5 * static_cast<double>(d) * kLog2Pi -
                   l.diagonal().array().log().sum();
    chol_.push_back(std::move(l));
  }
}

Vector GmmModel::component_logpdf(const Vector& x) const
{
  if (x.size() != dim())
    throw DataError("GMM: row has wrong dimension");
  Vector out(k());
  for (Index c = 0; c < k(); ++c) {
    const Vector z = chol_[static_cast<std::size_t>(c)].triangularView<Eigen::Lower>().solve(
      (x - means_.row(c).transpose()).eval());
    out(c) = log_norm_(c) - 0.5 * z.squaredNorm();
  }
  return out;
}

GmmModel fit_gmm(const Matrix& data, const GmmFitOptions& opts, std::vector<double>* history)
{
  const Index n = data.rows();
  const Index d = data.cols();
  const Index k = opts.k;
  if (k < 1)
    throw UsageError("fit_gmm: k must be at least 1");
  if (n < k * (d + 1))
    throw DataError("fit_gmm: too few rows for the requested component count");
  if (!(opts.reg > 0.0))
    throw UsageError("fit_gmm: regularization must be positive");

  Rng rng(opts.seed);
  // reg is relative to the mean variance once that exceeds 1, so raw
  // monetary amounts get the same conditioning as unit-scale data.
  const Matrix raw_cov = sample_covariance(data);
  const double scale = std::max(1.0, raw_cov.trace() / static_cast<double>(d));
  const Matrix reg = opts.reg * scale * Matrix::Identity(d, d);
  const Matrix global_cov = raw_cov + reg;

  Matrix means = kmeanspp_centers(data, k, rng);
  std::vector<Matrix> covs(static_cast<std::size_t>(k), global_cov);
  Vector weights = Vector::Constant(k, 1.0 / static_cast<double>(k));

  int reinit = 0;
  double prev = -std::numeric_limits<double>::infinity();
  Matrix resp(n, k);
  Vector row_ll(n);
  for (int it = 0; it < opts.max_iter; ++it) {
    // E step
    const GmmModel cur(weights, means, covs);
    for (Index r = 0; r < n; ++r) {
      const Vector lp = cur.component_logpdf(data.row(r).transpose());
      const double lse = log_sum_exp(lp);
      row_ll(r) = lse;
      resp.row(r) = (lp.array() - lse).exp().transpose();
    }
    const double mean_ll = row_ll.mean();
    if (history)
      history->push_back(mean_ll);
    if (std::abs(mean_ll - prev) < opts.tol)
      break;
    prev = mean_ll;

    // M step
    const Vector nk = resp.colwise().sum().transpose();
    bool reinitialized = false;
    for (Index c = 0; c < k; ++c) {
      if (nk(c) < 1e-8 * static_cast<double>(n) || nk(c) < 1e-10) {
        if (++reinit > kMaxReinit)
          throw NumericError("fit_gmm: empty component persists after 3 reinitializations");
        Index worst = 0;
        row_ll.minCoeff(&worst);
        means.row(c) = data.row(worst);
        covs[static_cast<std::size_t>(c)] = global_cov;
        weights(c) = 1.0 / static_cast<double>(k);
        reinitialized = true;
        continue;
      }
      const Vector mu = (resp.col(c).transpose() * data).transpose() / nk(c);
      const Matrix centered = data.rowwise() - mu.transpose();
      Matrix cov = (centered.array().colwise() * resp.col(c).array()).matrix().transpose() * centered / nk(c);
      cov = 0.5 * (cov + cov.transpose()) + reg;
      means.row(c) = mu.transpose();
      covs[static_cast<std::size_t>(c)] = cov;
      weights(c) = nk(c) / static_cast<double>(n);
    }
    weights /= weights.sum();
    if (reinitialized)
      prev = -std::numeric_limits<double>::infinity();
  }
  return GmmModel(weights, means, covs);
}

double gmm_loglik(const GmmModel& model, const Vector& x)
{
  return log_sum_exp(model.component_logpdf(x));
}

KdeModel::KdeModel(Matrix centers, Vector bandwidths)
  : centers_(std::move(centers))
  , bandwidths_(std::move(bandwidths))
{
  if (centers_.rows() < 1 || bandwidths_.size() != centers_.cols())
    throw DataError("KDE: parameter dimensions disagree");
  if (!(bandwidths_.array() > 0.0).all() || !bandwidths_.allFinite())
    throw DataError("KDE: bandwidths must be positive");
}

KdeModel fit_kde_multi(const Matrix& data, double multiplier)
{
  const Index n = data.rows();
  const Index d = data.cols();
  if (n < 1 || d < 1)
    throw DataError("fit_kde_multi: empty data");
  if (!(multiplier > 0.0))
    throw UsageError("fit_kde_multi: bandwidth multiplier must be positive");
  const double dd = static_cast<double>(d);
  const double factor = std::pow(4.0 / (dd + 2.0), 1.0 / (dd + 4.0)) *
                        std::pow(static_cast<double>(n), -1.0 / (dd + 4.0));
  Vector h(d);
  for (Index j = 0; j < d; ++j) {
    double sd = 0.0;
    if (n > 1)
      sd = std::sqrt((data.col(j).array() - data.col(j).mean()).square().sum() / static_cast<double>(n - 1));
    if (!(sd > 0.0))
      sd = std::max(1e-3 * data.col(j).cwiseAbs().maxCoeff(), 1e-6);
    h(j) = multiplier * factor * sd;
  }
  return KdeModel(data, h);
}

double kde_loglik(const KdeModel& model, const Vector& x)
{
  if (x.size() != model.dim())
    throw DataError("KDE: row has wrong dimension");
  const Matrix& c = model.centers();
  const Vector inv_h = model.bandwidths().cwiseInverse();
  const double log_norm = -0.5 * static_cast<double>(model.dim()) * kLog2Pi -
                          model.bandwidths().array().log().sum() -
                          std::log(static_cast<double>(c.rows()));
  Vector terms(c.rows());
  for (Index r = 0; r < c.rows(); ++r)
    terms(r) = -0.5 * ((x.transpose() - c.row(r)).cwiseProduct(inv_h.transpose())).squaredNorm();
  return log_norm + log_sum_exp(terms);
}

TunedGmm fit_gmm_tuned(const Matrix& data, std::uint64_t seed, double reg)
{
  const auto [tr, va] = split_indices(data.rows(), derive_seed(seed, 0x67));
  const Matrix train = data(tr, Eigen::all);
  const Matrix valid = data(va, Eigen::all);
  TunedGmm best;
  double best_score = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (Index k : kGmmGrid) {
    if (train.rows() < k * (data.cols() + 1))
      break;
    GmmFitOptions o;
    o.k = k;
    o.reg = reg;
    o.seed = derive_seed(seed, static_cast<std::uint64_t>(k));
    try {
      const GmmModel m = fit_gmm(train, o);
      const double s = mean_score(m, valid, gmm_loglik);
      if (std::isfinite(s) && s > best_score) {
        best_score = s;
        best.k = k;
        found = true;
      }
    } catch (const NumericError&) {
      // candidate skipped
    }
  }
  if (!found)
    best.k = 1;
  GmmFitOptions o;
  o.k = best.k;
  o.reg = reg;
  o.seed = derive_seed(seed, static_cast<std::uint64_t>(best.k));
  best.model = fit_gmm(data, o);
  return best;
}

TunedKde fit_kde_tuned(const Matrix& data, std::uint64_t seed)
{
  const auto [tr, va] = split_indices(data.rows(), derive_seed(seed, 0x6b));
  const Matrix train = data(tr, Eigen::all);
  const Matrix valid = data(va, Eigen::all);
  TunedKde best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (double mult : kKdeGrid) {
    const KdeModel m = fit_kde_multi(train, mult);
    const double s = mean_score(m, valid, kde_loglik);
    if (s > best_score) {
      best_score = s;
      best.multiplier = mult;
    }
  }
  best.model = fit_kde_multi(data, best.multiplier);
  return best;
}

} // namespace zicopula
