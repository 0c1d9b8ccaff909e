#pragma once

#include "zicopula/stat_core.hpp"

#include <cstdint>
#include <vector>

namespace zicopula {

//! Split of {0..D-1} into zero (rectified) and positive coordinates.
class ZeroPattern
{
public:
  ZeroPattern() = default;
  explicit ZeroPattern(const std::vector<bool>& is_zero);

  //! Pattern of a data row: coordinate i is zero iff x(i) == 0.
  static ZeroPattern from_row(const Vector& x);
  //! Bit i of mask set means coordinate i is zero.
  static ZeroPattern from_bits(std::uint64_t mask, Index dim);

  Index dim() const { return static_cast<Index>(is_zero_.size()); }
  bool is_zero(Index i) const { return is_zero_[static_cast<std::size_t>(i)]; }
  const IndexSet& zeros() const { return zeros_; }
  const IndexSet& positives() const { return positives_; }
  std::uint64_t bits() const;

private:
  std::vector<bool> is_zero_;
  IndexSet zeros_;
  IndexSet positives_;
};

//! Latent correlation plus per-coordinate thresholds (-inf allowed).
struct RgdParams
{
  CorrelationMatrix sigma;
  Vector a;

  RgdParams() = default;
  RgdParams(CorrelationMatrix s, Vector thresholds);
};

//! omega values with the rectification flags carried alongside, so that
//! "omega equals its threshold" is never decided by float comparison.
struct OmegaData
{
  Matrix omega;
  BoolMatrix rectified;
};

//! Rows max(a, nu) with nu ~ N(0, sigma).
OmegaData sample_rgd(const RgdParams& params, std::size_t n, std::uint64_t seed);

struct RgdObs
{
  double w = 0.0;
  bool rectified = false;
};

//! log-likelihood of one bivariate RGD observation (four branches).
double pair_loglik(RgdObs i, RgdObs j, double rho, double a_i, double a_j);

//! Total pairwise log-likelihood as a function of rho, with the data reduced
//! to the sufficient pieces of each branch.
class PairLikelihood
{
public:
  PairLikelihood(const Vector& w_i,
                 const BoolVector& zero_i,
                 const Vector& w_j,
                 const BoolVector& zero_j,
                 double a_i,
                 double a_j);

  double operator()(double rho) const;
  std::size_t n() const { return n_; }
  std::size_t n_both_rectified() const { return n00_; }

private:
  double a_i_;
  double a_j_;
  std::size_t n_ = 0;
  std::size_t n00_ = 0;
  std::vector<double> w_j_given_i0_; // x_i = 0, x_j > 0
  std::vector<double> w_i_given_j0_; // x_i > 0, x_j = 0
  std::size_t n11_ = 0;
  double s_ii_ = 0.0;
  double s_jj_ = 0.0;
  double s_ij_ = 0.0;
  double const_terms_ = 0.0;
};

inline constexpr double kRhoBound = 0.9999;

//! Maximizes the pairwise RGD likelihood over rho in [-0.9999, 0.9999]:
//! 41-point grid pre-scan, then Brent within the best bracket (tol 1e-6,
//! max 200 iterations).
double estimate_rho(const Vector& w_i,
                    const BoolVector& zero_i,
                    const Vector& w_j,
                    const BoolVector& zero_j,
                    double a_i,
                    double a_j);

//! Pairwise MLE for every i<j (use_mle) or the empirical correlation over all
//! rows, followed by repair_correlation.
CorrelationMatrix assemble_sigma(const OmegaData& data, const Vector& a, bool use_mle);

//! Orthant probability P(Z <= upper), Z ~ N(mean, cov). The covariance is
//! split into independent blocks; blocks of size 1 and 2 are exact, larger
//! ones use mvn_orthant_mc.
McEstimate mvn_orthant_probability(const ConditionalGaussian& dist,
                                   const Vector& upper,
                                   std::size_t mc_samples,
                                   std::uint64_t seed);

inline constexpr std::size_t kDefaultMcSamples = 4096;

//! log of the rectified Gaussian copula density at (omega, pattern), with the
//! rectified block integrated out exactly (closed forms or Monte Carlo).
double copula_logdensity_exact(const RgdParams& params,
                               const Vector& omega,
                               const ZeroPattern& pattern,
                               std::size_t mc_samples = kDefaultMcSamples,
                               std::uint64_t seed = 0);

//! Polynomial-time approximation: ignores the correlation between the
//! rectified block and the rest, log phi_S(omega_S | sigma_S) - sum log phi_1.
double copula_logdensity_approx(const RgdParams& params, const Vector& omega, const ZeroPattern& pattern);

struct PatternProbability
{
  double log_prob = 0.0;
  double std_error = 0.0;
};

//! log P(omega_zero = a_zero, omega_pos > a_pos).
PatternProbability zero_pattern_logprob(const RgdParams& params,
                                        const ZeroPattern& pattern,
                                        std::size_t mc_samples = kDefaultMcSamples,
                                        std::uint64_t seed = 0);

} // namespace zicopula
