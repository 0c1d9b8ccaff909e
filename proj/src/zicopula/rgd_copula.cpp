#include "zicopula/rgd_copula.hpp"

#include "zicopula/error.hpp"
#include "zicopula/rng.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numbers>
#include <sstream>

namespace zicopula {

namespace {

constexpr double kLog2Pi = 1.83787706640934548356;

void check_rho(double rho)
{
  if (!(std::abs(rho) < 1.0))
    throw DomainError("pair likelihood: |rho| must be < 1");
}

double pearson(const Vector& x, const Vector& y)
{
  const double mx = x.mean();
  const double my = y.mean();
  const Vector dx = x.array() - mx;
  const Vector dy = y.array() - my;
  const double sxx = dx.squaredNorm();
  const double syy = dy.squaredNorm();
  if (!(sxx > 0.0) || !(syy > 0.0))
    return 0.0;
  return dx.dot(dy) / std::sqrt(sxx * syy);
}

// Connected components of the graph with an edge wherever cov(i, j) != 0.
std::vector<IndexSet> independent_blocks(const Matrix& cov)
{
  const Index d = cov.rows();
  std::vector<int> label(static_cast<std::size_t>(d), -1);
  std::vector<IndexSet> blocks;
  for (Index start = 0; start < d; ++start) {
    if (label[static_cast<std::size_t>(start)] >= 0)
      continue;
    IndexSet block{ start };
    label[static_cast<std::size_t>(start)] = static_cast<int>(blocks.size());
    for (std::size_t head = 0; head < block.size(); ++head) {
      const Index i = block[head];
      for (Index j = 0; j < d; ++j) {
        if (label[static_cast<std::size_t>(j)] < 0 && cov(i, j) != 0.0) {
          label[static_cast<std::size_t>(j)] = static_cast<int>(blocks.size());
          block.push_back(j);
        }
      }
    }
    std::sort(block.begin(), block.end());
    blocks.push_back(std::move(block));
  }
  return blocks;
}

McEstimate univariate_orthant(double mean, double var, double upper)
{
  if (!(var > 0.0))
    return { mean <= upper ? 1.0 : 0.0, 0.0 };
  return { std_normal_cdf((upper - mean) / std::sqrt(var)), 0.0 };
}

void validate_pattern(const RgdParams& params, const Vector& omega, const ZeroPattern& pattern)
{
  const Index d = params.sigma.dim();
  if (omega.size() != d || pattern.dim() != d)
    throw DataError("copula density: dimension mismatch");
  for (Index i = 0; i < d; ++i) {
    const bool ok = pattern.is_zero(i) ? omega(i) == params.a(i) : omega(i) > params.a(i);
    if (!ok) {
      std::ostringstream os;
      os << "copula density: omega(" << i << ") inconsistent with the zero pattern";
      throw DataError(os.str());
    }
  }
}

} // namespace

ZeroPattern::ZeroPattern(const std::vector<bool>& is_zero)
  : is_zero_(is_zero)
{
  for (std::size_t i = 0; i < is_zero_.size(); ++i)
    (is_zero_[i] ? zeros_ : positives_).push_back(static_cast<Index>(i));
}

ZeroPattern ZeroPattern::from_row(const Vector& x)
{
  std::vector<bool> z(static_cast<std::size_t>(x.size()));
  for (Index i = 0; i < x.size(); ++i)
    z[static_cast<std::size_t>(i)] = x(i) == 0.0;
  return ZeroPattern(z);
}

ZeroPattern ZeroPattern::from_bits(std::uint64_t mask, Index dim)
{
  std::vector<bool> z(static_cast<std::size_t>(dim));
  for (Index i = 0; i < dim; ++i)
    z[static_cast<std::size_t>(i)] = ((mask >> i) & 1U) != 0;
  return ZeroPattern(z);
}

std::uint64_t ZeroPattern::bits() const
{
  std::uint64_t m = 0;
  for (Index i : zeros_)
    m |= (std::uint64_t{ 1 } << i);
  return m;
}

RgdParams::RgdParams(CorrelationMatrix s, Vector thresholds)
  : sigma(std::move(s))
  , a(std::move(thresholds))
{
  if (sigma.dim() != a.size())
    throw DataError("RGD parameters: threshold vector does not match correlation dimension");
}

OmegaData sample_rgd(const RgdParams& params, std::size_t n, std::uint64_t seed)
{
  const Index d = params.sigma.dim();
  Eigen::SelfAdjointEigenSolver<Matrix> es(params.sigma.matrix());
  const Matrix root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();

  OmegaData out;
  out.omega.resize(static_cast<Index>(n), d);
  out.rectified.resize(static_cast<Index>(n), d);
  Rng rng(seed);
  Vector z(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (Index i = 0; i < d; ++i)
      z(i) = rng.normal();
    const Vector nu = root * z;
    for (Index i = 0; i < d; ++i) {
      const bool rect = nu(i) <= params.a(i);
      out.rectified(static_cast<Index>(r), i) = rect;
      out.omega(static_cast<Index>(r), i) = rect ? params.a(i) : nu(i);
    }
  }
  return out;
}

double pair_loglik(RgdObs i, RgdObs j, double rho, double a_i, double a_j)
{
  check_rho(rho);
  const double s = std::sqrt(1.0 - rho * rho);
  if (i.rectified && j.rectified)
    return log_clamped(bivariate_normal_cdf(a_i, a_j, rho));
  if (i.rectified)
    return std_normal_logpdf(j.w) + log_clamped(std_normal_cdf((a_i - rho * j.w) / s));
  if (j.rectified)
    return std_normal_logpdf(i.w) + log_clamped(std_normal_cdf((a_j - rho * i.w) / s));
  const double q = (i.w * i.w - 2.0 * rho * i.w * j.w + j.w * j.w) / (1.0 - rho * rho);
  return -kLog2Pi - 0.5 * std::log(1.0 - rho * rho) - 0.5 * q;
}

PairLikelihood::PairLikelihood(const Vector& w_i,
                               const BoolVector& zero_i,
                               const Vector& w_j,
                               const BoolVector& zero_j,
                               double a_i,
                               double a_j)
  : a_i_(a_i)
  , a_j_(a_j)
{
  const Index n = w_i.size();
  if (w_j.size() != n || zero_i.size() != n || zero_j.size() != n)
    throw DataError("pair likelihood: paired samples differ in length");
  n_ = static_cast<std::size_t>(n);
  for (Index k = 0; k < n; ++k) {
    const bool zi = zero_i(k);
    const bool zj = zero_j(k);
    if (zi && zj) {
      ++n00_;
    } else if (zi) {
      w_j_given_i0_.push_back(w_j(k));
      const_terms_ += std_normal_logpdf(w_j(k));
    } else if (zj) {
      w_i_given_j0_.push_back(w_i(k));
      const_terms_ += std_normal_logpdf(w_i(k));
    } else {
      ++n11_;
      s_ii_ += w_i(k) * w_i(k);
      s_jj_ += w_j(k) * w_j(k);
      s_ij_ += w_i(k) * w_j(k);
    }
  }
}

double PairLikelihood::operator()(double rho) const
{
  check_rho(rho);
  const double one_m = 1.0 - rho * rho;
  const double s = std::sqrt(one_m);
  double ll = const_terms_;
  if (n00_ > 0)
    ll += static_cast<double>(n00_) * log_clamped(bivariate_normal_cdf(a_i_, a_j_, rho));
  for (double w : w_j_given_i0_)
    ll += log_clamped(std_normal_cdf((a_i_ - rho * w) / s));
  for (double w : w_i_given_j0_)
    ll += log_clamped(std_normal_cdf((a_j_ - rho * w) / s));
  if (n11_ > 0) {
    const double m = static_cast<double>(n11_);
    ll += -m * kLog2Pi - 0.5 * m * std::log(one_m) - 0.5 * (s_ii_ - 2.0 * rho * s_ij_ + s_jj_) / one_m;
  }
  return ll;
}

double estimate_rho(const Vector& w_i,
                    const BoolVector& zero_i,
                    const Vector& w_j,
                    const BoolVector& zero_j,
                    double a_i,
                    double a_j)
{
  if (w_i.size() < 10)
    throw DataError("estimate_rho: need at least 10 paired samples");
  const PairLikelihood lik(w_i, zero_i, w_j, zero_j, a_i, a_j);
  if (lik.n_both_rectified() == lik.n())
    throw DataError("estimate_rho: no information (every pair is rectified in both coordinates)");

  constexpr int kGrid = 41;
  std::array<double, kGrid> grid{};
  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int g = 0; g < kGrid; ++g) {
    grid[g] = -kRhoBound + 2.0 * kRhoBound * g / (kGrid - 1);
    const double ll = lik(grid[g]);
    if (ll > best_ll) {
      best_ll = ll;
      best = g;
    }
  }
  const double lo = grid[std::max(best - 1, 0)];
  const double hi = grid[std::min(best + 1, kGrid - 1)];
  std::uintmax_t max_iter = 200;
  const auto [rho, neg_ll] =
    boost::math::tools::brent_find_minima([&](double r) { return -lik(r); }, lo, hi, 24, max_iter);
  return -neg_ll >= best_ll ? rho : grid[best];
}

CorrelationMatrix assemble_sigma(const OmegaData& data, const Vector& a, bool use_mle)
{
  const Index d = data.omega.cols();
  if (a.size() != d || data.rectified.cols() != d || data.rectified.rows() != data.omega.rows())
    throw DataError("assemble_sigma: dimension mismatch");
  Matrix raw = Matrix::Identity(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      double r;
      if (use_mle) {
        r = estimate_rho(data.omega.col(i), data.rectified.col(i), data.omega.col(j),
                         data.rectified.col(j), a(i), a(j));
      } else {
        r = pearson(data.omega.col(i), data.omega.col(j));
      }
      raw(i, j) = raw(j, i) = std::clamp(r, -kRhoBound, kRhoBound);
    }
  }
  return repair_correlation(raw);
}

McEstimate mvn_orthant_probability(const ConditionalGaussian& dist,
                                   const Vector& upper,
                                   std::size_t mc_samples,
                                   std::uint64_t seed)
{
  const Index d = dist.mean.size();
  if (dist.cov.rows() != d || upper.size() != d)
    throw DataError("orthant probability: dimension mismatch");
  double p = 1.0;
  double rel_var = 0.0;
  const auto blocks = independent_blocks(dist.cov);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const IndexSet& idx = blocks[b];
    McEstimate est;
    if (idx.size() == 1) {
      const Index i = idx[0];
      est = univariate_orthant(dist.mean(i), dist.cov(i, i), upper(i));
    } else if (idx.size() == 2 && dist.cov(idx[0], idx[0]) > 0.0 && dist.cov(idx[1], idx[1]) > 0.0) {
      est.probability = bivariate_normal_cdf(upper(idx[0]), upper(idx[1]), dist.mean(idx),
                                             dist.cov(idx, idx));
    } else {
      ConditionalGaussian sub{ dist.mean(idx), dist.cov(idx, idx) };
      est = mvn_orthant_mc(sub, upper(idx), mc_samples, derive_seed(seed, b));
    }
    p *= est.probability;
    if (est.probability > 0.0)
      rel_var += (est.std_error / est.probability) * (est.std_error / est.probability);
  }
  return { p, p * std::sqrt(rel_var) };
}

double copula_logdensity_exact(const RgdParams& params,
                               const Vector& omega,
                               const ZeroPattern& pattern,
                               std::size_t mc_samples,
                               std::uint64_t seed)
{
  validate_pattern(params, omega, pattern);
  const IndexSet& zeros = pattern.zeros();
  const IndexSet& pos = pattern.positives();

  double denom = 0.0;
  for (Index i : zeros)
    denom += std_normal_logcdf(params.a(i));
  for (Index j : pos)
    denom += std_normal_logpdf(omega(j));

  if (zeros.empty())
    return mvn_logpdf(omega, params.sigma.matrix()) - denom;

  const Vector a_zero = params.a(zeros);
  if (pos.empty()) {
    ConditionalGaussian full{ Vector::Zero(params.sigma.dim()), params.sigma.matrix() };
    const McEstimate p = mvn_orthant_probability(full, a_zero, mc_samples, seed);
    return log_clamped(p.probability) - denom;
  }

  const Vector w_pos = omega(pos);
  const double log_phi_s = mvn_logpdf(w_pos, params.sigma.sub(pos));
  const ConditionalGaussian cond = conditional_gaussian(params.sigma, pos, w_pos);
  const McEstimate p = mvn_orthant_probability(cond, a_zero, mc_samples, seed);
  return log_phi_s + log_clamped(p.probability) - denom;
}

double copula_logdensity_approx(const RgdParams& params, const Vector& omega, const ZeroPattern& pattern)
{
  validate_pattern(params, omega, pattern);
  const IndexSet& pos = pattern.positives();
  if (pos.empty())
    return 0.0;
  const Vector w_pos = omega(pos);
  double ll = mvn_logpdf(w_pos, params.sigma.sub(pos));
  for (Index k = 0; k < w_pos.size(); ++k)
    ll -= std_normal_logpdf(w_pos(k));
  return ll;
}

PatternProbability zero_pattern_logprob(const RgdParams& params,
                                        const ZeroPattern& pattern,
                                        std::size_t mc_samples,
                                        std::uint64_t seed)
{
  const Index d = params.sigma.dim();
  if (pattern.dim() != d)
    throw DataError("zero_pattern_logprob: dimension mismatch");
  // nu_pos > a_pos  <=>  -nu_pos < -a_pos; flip signs to get a lower orthant.
  Vector sign = Vector::Ones(d);
  Vector upper(d);
  for (Index i = 0; i < d; ++i) {
    if (pattern.is_zero(i)) {
      upper(i) = params.a(i);
    } else {
      sign(i) = -1.0;
      upper(i) = -params.a(i);
    }
  }
  ConditionalGaussian dist{ Vector::Zero(d),
                            sign.asDiagonal() * params.sigma.matrix() * sign.asDiagonal() };
  const McEstimate p = mvn_orthant_probability(dist, upper, mc_samples, seed);
  return { log_clamped(p.probability), p.std_error };
}

} // namespace zicopula
