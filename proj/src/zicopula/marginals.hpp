#pragma once

#include "zicopula/stat_core.hpp"

#include <limits>
#include <span>
#include <vector>

namespace zicopula {

//! CDF values are clamped to [kCdfClamp, 1 - kCdfClamp] before the probit
//! so that omega stays finite for out-of-range test points.
inline constexpr double kCdfClamp = 1e-9;

//! Zero rate plus a Gaussian KDE (reflected at 0) of the positive part.
//! Immutable after fitting.
class MarginalModel
{
public:
  MarginalModel() = default;

  //! Rebuild from stored parameters (model files). Validates invariants.
  MarginalModel(double q, std::vector<double> centers, double bandwidth, double rescale_b);

  double q() const { return q_; }
  //! probit of q; -infinity when the variable never takes the value 0.
  double a() const { return a_; }
  double bandwidth() const { return bandwidth_; }
  double rescale_b() const { return rescale_b_; }
  const std::vector<double>& centers() const { return centers_; }

  //! Copy with a different rescale divisor recorded (parameters unchanged).
  MarginalModel with_rescale(double b) const;

private:
  double q_ = 0.0;
  double a_ = -std::numeric_limits<double>::infinity();
  std::vector<double> centers_;
  double bandwidth_ = 1.0;
  double rescale_b_ = 1.0;
};

struct MarginalFitOptions
{
  //! Multiplies Silverman's rule of thumb.
  double bandwidth_multiplier = 1.0;
  //! When positive, used verbatim instead of the rule of thumb.
  double bandwidth = 0.0;
};

//! Silverman's rule: 0.9 min(sd, IQR/1.34) n^(-1/5).
double silverman_bandwidth(std::span<const double> values);

MarginalModel fit_marginal(std::span<const double> column, const MarginalFitOptions& opts = {});

//! Reflected Gaussian KDE density of the positive part. Throws DomainError for x <= 0.
double positive_pdf(const MarginalModel& m, double x);
//! log of positive_pdf, finite even far outside the data range.
double log_positive_pdf(const MarginalModel& m, double x);
//! CDF of the positive part alone (0 at x = 0).
double positive_cdf(const MarginalModel& m, double x);
//! Inverse of positive_cdf for p in (0, 1).
double positive_quantile(const MarginalModel& m, double p);

//! q + (1 - q) positive_cdf(x); equals q at x = 0.
double marginal_cdf(const MarginalModel& m, double x);

//! x = 0 maps to a, x > 0 to probit(clamped marginal_cdf(x)), always > a.
double omega_transform(const MarginalModel& m, double x);

//! probit(clamped positive_cdf(x)); the parent-marginal transform used when
//! the zero mass is modeled separately.
double positive_omega(const MarginalModel& m, double x);

//! exp(-mean log g(x)) over the positives.
double rescale_factor(const MarginalModel& m, std::span<const double> positives);

//! Fits marginals column-wise, optionally running the rescale pass: fit,
//! compute b, divide the column by b, refit with a re-derived bandwidth.
//! The returned marginals record b; callers divide raw data by it before
//! evaluating.
std::vector<MarginalModel> fit_marginals(const Matrix& data,
                                         bool use_rescale,
                                         const MarginalFitOptions& opts = {});

//! Divides each column by the corresponding marginal's rescale divisor.
Matrix apply_rescale(const Matrix& data, const std::vector<MarginalModel>& marginals);

} // namespace zicopula
