#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace zicopula {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;
using BoolVector = Eigen::Array<bool, Eigen::Dynamic, 1>;
using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

//! Probabilities are clamped to [kProbFloor, 1 - kProbFloor] before logs.
inline constexpr double kProbFloor = 1e-15;

double clamp_prob(double p);
double log_clamped(double p);

//! Symmetric, unit-diagonal matrix with off-diagonals in (-1, 1).
class CorrelationMatrix
{
public:
  CorrelationMatrix() = default;

  static CorrelationMatrix identity(Index dim);

  //! Validates symmetry, unit diagonal and |off-diagonal| < 1.
  //! Throws DataError otherwise. Positive definiteness is not checked here;
  //! use repair_correlation for assembled estimates.
  static CorrelationMatrix from_matrix(const Matrix& m);

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  Matrix sub(const IndexSet& idx) const { return m_(idx, idx); }

private:
  explicit CorrelationMatrix(Matrix m)
    : m_(std::move(m))
  {}
  Matrix m_;
};

//! Law of the unobserved block given the observed one, N(mean, cov).
struct ConditionalGaussian
{
  Vector mean;
  Matrix cov;
};

struct McEstimate
{
  double probability = 0.0;
  double std_error = 0.0;
};

double std_normal_pdf(double x);
double std_normal_logpdf(double x);
double std_normal_cdf(double x);
double std_normal_logcdf(double x);

//! Inverse of the standard normal CDF (Wichura AS241). Throws DomainError
//! unless 0 < p < 1.
double std_normal_quantile(double p);

//! P(X <= a, Y <= b) for a standard bivariate normal with correlation rho.
//! a and b may be infinite. Throws DomainError for |rho| >= 1.
double bivariate_normal_cdf(double a, double b, double rho);

//! Same as above for a normal with arbitrary mean and 2x2 covariance.
double bivariate_normal_cdf(double a, double b, const Vector& mean, const Matrix& cov);

//! log of the zero-mean multivariate normal density. Throws NumericError
//! when cov is not positive definite.
double mvn_logpdf(const Vector& x, const Matrix& cov);

//! Conditional law of the coordinates outside cond_idx given that the
//! coordinates in cond_idx take cond_values. The result is ordered by
//! increasing index of the complement.
ConditionalGaussian conditional_gaussian(const CorrelationMatrix& cov,
                                         const IndexSet& cond_idx,
                                         const Vector& cond_values);

//! Eigenvalue clipping at 1e-6 followed by diagonal renormalization.
//! Already positive definite input is returned unchanged.
CorrelationMatrix repair_correlation(const Matrix& raw);

inline constexpr double kRepairFloor = 1e-6;

//! Monte-Carlo estimate of P(Z <= upper) for Z ~ N(cond.mean, cond.cov),
//! antithetic pairs, deterministic given seed.
McEstimate mvn_orthant_mc(const ConditionalGaussian& cond,
                          const Vector& upper,
                          std::size_t n_samples,
                          std::uint64_t seed);

double min_eigenvalue(const Matrix& m);
double condition_number(const Matrix& m);

//! Complement of idx in {0, ..., dim-1}, increasing.
IndexSet complement(const IndexSet& idx, Index dim);

} // namespace zicopula
