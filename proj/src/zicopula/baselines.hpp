#pragma once

#include "zicopula/stat_core.hpp"

#include <cstdint>
#include <vector>

namespace zicopula {

//! Gaussian mixture with full covariances. Cholesky factors are cached at
//! construction.
class GmmModel
{
public:
  GmmModel() = default;
  GmmModel(Vector weights, Matrix means, std::vector<Matrix> covariances);

  Index k() const { return weights_.size(); }
  Index dim() const { return means_.cols(); }
  const Vector& weights() const { return weights_; }
  const Matrix& means() const { return means_; }
  const std::vector<Matrix>& covariances() const { return covs_; }

  //! log w_c + log N(x | mu_c, cov_c) for every component.
  Vector component_logpdf(const Vector& x) const;

private:
  Vector weights_;
  Matrix means_;
  std::vector<Matrix> covs_;
  std::vector<Matrix> chol_;
  Vector log_norm_;
};

struct GmmFitOptions
{
  Index k = 1;
  double reg = 1e-6; //!< added as reg * max(1, mean variance) * I each M step
  double tol = 1e-6;
  int max_iter = 500;
  std::uint64_t seed = 0;
};

//! EM from a k-means++ initialization. history, when given, receives the
//! mean log-likelihood after every iteration.
GmmModel fit_gmm(const Matrix& data, const GmmFitOptions& opts, std::vector<double>* history = nullptr);

double gmm_loglik(const GmmModel& model, const Vector& x);

class KdeModel
{
public:
  KdeModel() = default;
  KdeModel(Matrix centers, Vector bandwidths);

  Index dim() const { return centers_.cols(); }
  const Matrix& centers() const { return centers_; }
  const Vector& bandwidths() const { return bandwidths_; }

private:
  Matrix centers_;
  Vector bandwidths_;
};

//! Per-dimension Silverman bandwidths (4/(D+2))^(1/(D+4)) N^(-1/(D+4)) sd_d,
//! times multiplier.
KdeModel fit_kde_multi(const Matrix& data, double multiplier = 1.0);

double kde_loglik(const KdeModel& model, const Vector& x);

inline const std::vector<Index> kGmmGrid{ 1, 2, 4, 8, 16 };
inline const std::vector<double> kKdeGrid{ 0.5, 1.0, 2.0 };

struct TunedGmm
{
  GmmModel model;
  Index k = 1;
};

struct TunedKde
{
  KdeModel model;
  double multiplier = 1.0;
};

//! Grid search on an 80/20 split of data by held-out mean log-likelihood,
//! then refit on all of data.
TunedGmm fit_gmm_tuned(const Matrix& data, std::uint64_t seed, double reg = 1e-6);
TunedKde fit_kde_tuned(const Matrix& data, std::uint64_t seed);

} // namespace zicopula
