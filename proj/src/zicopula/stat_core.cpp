#include "zicopula/stat_core.hpp"

#include "zicopula/error.hpp"
#include "zicopula/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace zicopula {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Gauss-Legendre half-rules (positive abscissae) with 6, 12 and 20 points.
constexpr std::array<double, 3> kGl6W = { 0.1713244923791705, 0.3607615730481384,
                                          0.4679139345726904 };
constexpr std::array<double, 3> kGl6X = { 0.9324695142031522, 0.6612093864662647,
                                          0.2386191860831970 };
constexpr std::array<double, 6> kGl12W = { 0.04717533638651177, 0.1069393259953183,
                                           0.1600783285433464,  0.2031674267230659,
                                           0.2334925365383547,  0.2491470458134029 };
constexpr std::array<double, 6> kGl12X = { 0.9815606342467191, 0.9041172563704750,
                                           0.7699026741943050, 0.5873179542866171,
                                           0.3678314989981802, 0.1252334085114692 };
constexpr std::array<double, 10> kGl20W = {
  0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
  0.1019301198172404,  0.1181945319615184,  0.1316886384491766,  0.1420961093183821,
  0.1491729864726037,  0.1527533871307259
};
constexpr std::array<double, 10> kGl20X = {
  0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188,
  0.7463319064601508, 0.6360536807265150, 0.5108670019508271, 0.3737060887154196,
  0.2277858511416451, 0.07652652113349733
};

template<std::size_t N>
void fill_rule(const std::array<double, N>& w,
               const std::array<double, N>& x,
               std::vector<double>& ws,
               std::vector<double>& xs)
{
  for (std::size_t i = 0; i < N; ++i) {
    ws.push_back(w[i]);
    xs.push_back(1.0 - x[i]);
  }
  for (std::size_t i = 0; i < N; ++i) {
    ws.push_back(w[i]);
    xs.push_back(1.0 + x[i]);
  }
}

// P(X > dh, Y > dk); Genz's form of the Drezner-Wesolowsky method.
double bvn_upper(double dh, double dk, double r)
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (dh == inf || dk == inf)
    return 0.0;
  if (dh == -inf)
    return dk == -inf ? 1.0 : std_normal_cdf(-dk);
  if (dk == -inf)
    return std_normal_cdf(-dh);
  if (r == 0.0)
    return std_normal_cdf(-dh) * std_normal_cdf(-dk);

  std::vector<double> w;
  std::vector<double> x;
  const double ar = std::abs(r);
  if (ar < 0.3)
    fill_rule(kGl6W, kGl6X, w, x);
  else if (ar < 0.75)
    fill_rule(kGl12W, kGl12X, w, x);
  else
    fill_rule(kGl20W, kGl20X, w, x);

  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = 0.5 * std::asin(r);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double sn = std::sin(asr * x[i]);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    bvn = bvn * asr / kTwoPi + std_normal_cdf(-h) * std_normal_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (ar < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      double asr = -0.5 * (bs / as + hk);
      if (asr > -100.0)
        bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(kTwoPi) * std_normal_cdf(-b / a);
        bvn -= std::exp(-0.5 * hk) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a *= 0.5;
      double acc = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) {
        const double xs = (a * x[i]) * (a * x[i]);
        asr = -0.5 * (bs / xs + hk);
        if (asr <= -100.0)
          continue;
        const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
        const double rs = std::sqrt(1.0 - xs);
        const double ep = std::exp(-0.5 * hk * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
        acc += std::exp(asr) * (sp - ep) * w[i];
      }
      bvn = (a * acc - bvn) / kTwoPi;
    }
    if (r > 0.0) {
      bvn += std_normal_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double l = h < 0.0 ? std_normal_cdf(k) - std_normal_cdf(h)
                               : std_normal_cdf(-h) - std_normal_cdf(-k);
      bvn = l - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

} // namespace

double clamp_prob(double p)
{
  return std::clamp(p, kProbFloor, 1.0 - kProbFloor);
}

double log_clamped(double p)
{
  return std::log(clamp_prob(p));
}

CorrelationMatrix CorrelationMatrix::identity(Index dim)
{
  return CorrelationMatrix(Matrix::Identity(dim, dim));
}

CorrelationMatrix CorrelationMatrix::from_matrix(const Matrix& m)
{
  if (m.rows() != m.cols() || m.rows() == 0)
    throw DataError("correlation matrix must be square and nonempty");
  for (Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) != 1.0)
      throw DataError("correlation matrix diagonal entry " + std::to_string(i) + " is not 1");
    for (Index j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > 1e-12)
        throw DataError("correlation matrix is not symmetric");
      if (!(std::abs(m(i, j)) < 1.0))
        throw DataError("correlation matrix off-diagonal entry outside (-1, 1)");
    }
  }
  Matrix s = 0.5 * (m + m.transpose());
  s.diagonal().setOnes();
  return CorrelationMatrix(std::move(s));
}

double std_normal_pdf(double x)
{
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_logpdf(double x)
{
  return -0.5 * x * x - kLogSqrt2Pi;
}

double std_normal_cdf(double x)
{
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

double std_normal_logcdf(double x)
{
  if (x > -30.0)
    return std::log(std_normal_cdf(x));
  // Mills-ratio asymptotic expansion in the far lower tail.
  const double x2 = x * x;
  return std_normal_logpdf(x) - std::log(-x) + std::log1p(-1.0 / x2 + 3.0 / (x2 * x2));
}

double std_normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("std_normal_quantile: p must lie in (0, 1)");

  const double q = p - 0.5;
  double val;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    val = q *
          (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                67265.770927008700853) * r + 45921.953931549871457) * r +
              13731.693765509461125) * r + 1971.5909503065514427) * r +
            133.14166789178437745) * r + 3.387132872796366608) /
          (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                39307.89580009271061) * r + 21213.794301586595867) * r +
              5394.1960214247511077) * r + 687.1870074920579083) * r +
            42.313330701600911252) * r + 1.0);
    return val;
  }

  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double bivariate_normal_cdf(double a, double b, double rho)
{
  if (!(std::abs(rho) < 1.0))
    throw DomainError("bivariate_normal_cdf: |rho| must be < 1");
  return bvn_upper(-a, -b, rho);
}

double bivariate_normal_cdf(double a, double b, const Vector& mean, const Matrix& cov)
{
  const double s1 = std::sqrt(cov(0, 0));
  const double s2 = std::sqrt(cov(1, 1));
  if (!(s1 > 0.0) || !(s2 > 0.0))
    throw NumericError("bivariate_normal_cdf: degenerate marginal variance");
  double rho = cov(0, 1) / (s1 * s2);
  rho = std::clamp(rho, -1.0 + 1e-12, 1.0 - 1e-12);
  return bivariate_normal_cdf((a - mean(0)) / s1, (b - mean(1)) / s2, rho);
}

double min_eigenvalue(const Matrix& m)
{
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double condition_number(const Matrix& m)
{
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 0.0)
    return std::numeric_limits<double>::infinity();
  return hi / lo;
}

double mvn_logpdf(const Vector& x, const Matrix& cov)
{
  const Index d = x.size();
  if (cov.rows() != d || cov.cols() != d)
    throw DataError("mvn_logpdf: dimension mismatch");
  if (d == 0)
    return 0.0;
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "mvn_logpdf: covariance is not positive definite (condition number "
       << condition_number(cov) << ")";
    throw NumericError(os.str());
  }
  const Vector z = llt.matrixL().solve(x);
  const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * z.squaredNorm() - 0.5 * log_det - static_cast<double>(d) * kLogSqrt2Pi;
}

IndexSet complement(const IndexSet& idx, Index dim)
{
  std::vector<bool> in(static_cast<std::size_t>(dim), false);
  for (Index i : idx)
    in[static_cast<std::size_t>(i)] = true;
  IndexSet out;
  for (Index i = 0; i < dim; ++i)
    if (!in[static_cast<std::size_t>(i)])
      out.push_back(i);
  return out;
}

ConditionalGaussian conditional_gaussian(const CorrelationMatrix& cov,
                                         const IndexSet& cond_idx,
                                         const Vector& cond_values)
{
  const Index d = cov.dim();
  if (cond_idx.empty() || static_cast<Index>(cond_idx.size()) >= d)
    throw DomainError("conditional_gaussian: conditioning set must be a nonempty proper subset");
  if (static_cast<Index>(cond_idx.size()) != cond_values.size())
    throw DataError("conditional_gaussian: conditioning values do not match index set");

  const IndexSet rest = complement(cond_idx, d);
  const Matrix& s = cov.matrix();
  const Matrix s_cc = s(cond_idx, cond_idx);
  const Matrix s_rc = s(rest, cond_idx);
  Eigen::LLT<Matrix> llt(s_cc);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "conditional_gaussian: conditioning block {";
    for (std::size_t i = 0; i < cond_idx.size(); ++i)
      os << (i ? "," : "") << cond_idx[i];
    os << "} is singular";
    throw NumericError(os.str());
  }
  ConditionalGaussian out;
  out.mean = s_rc * llt.solve(cond_values);
  out.cov = s(rest, rest) - s_rc * llt.solve(s_rc.transpose());
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

CorrelationMatrix repair_correlation(const Matrix& raw)
{
  const Index d = raw.rows();
  Matrix m = 0.5 * (raw + raw.transpose());
  m.diagonal().setOnes();
  if (min_eigenvalue(m) >= kRepairFloor)
    return CorrelationMatrix::from_matrix(m);

  // Clipping then renormalizing can dip slightly below the floor again;
  // a few rounds settle it.
  for (int round = 0; round < 100; ++round) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Vector ev = es.eigenvalues();
    if (ev.minCoeff() >= kRepairFloor * (1.0 - 1e-9))
      break;
    ev = ev.cwiseMax(kRepairFloor * 1.0001);
    m = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    const Vector inv_sd = m.diagonal().cwiseSqrt().cwiseInverse();
    m = inv_sd.asDiagonal() * m * inv_sd.asDiagonal();
    m = 0.5 * (m + m.transpose());
    m.diagonal().setOnes();
  }
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (i != j)
        m(i, j) = std::clamp(m(i, j), -1.0 + 1e-12, 1.0 - 1e-12);
  return CorrelationMatrix::from_matrix(m);
}

McEstimate mvn_orthant_mc(const ConditionalGaussian& cond,
                          const Vector& upper,
                          std::size_t n_samples,
                          std::uint64_t seed)
{
  const Index d = cond.mean.size();
  if (cond.cov.rows() != d || cond.cov.cols() != d || upper.size() != d)
    throw DataError("mvn_orthant_mc: dimension mismatch");
  if (n_samples == 0)
    throw UsageError("mvn_orthant_mc: n_samples must be >= 1");
  if (d == 0)
    return { 1.0, 0.0 };

  Eigen::SelfAdjointEigenSolver<Matrix> es(cond.cov);
  const Vector ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10 * std::max(1.0, ev.maxCoeff()))
    throw NumericError("mvn_orthant_mc: covariance is not positive semi-definite");
  const Matrix root = es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal();

  const std::size_t n_pairs = (n_samples + 1) / 2;
  Rng rng(seed);
  Vector z(d);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t s = 0; s < n_pairs; ++s) {
    for (Index i = 0; i < d; ++i)
      z(i) = rng.normal();
    const Vector y = root * z;
    const bool plus = ((cond.mean + y).array() <= upper.array()).all();
    const bool minus = ((cond.mean - y).array() <= upper.array()).all();
    const double v = 0.5 * (static_cast<double>(plus) + static_cast<double>(minus));
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(n_pairs);
  McEstimate out;
  out.probability = sum / n;
  if (n_pairs > 1) {
    const double var = std::max(0.0, (sum_sq - n * out.probability * out.probability) / (n - 1.0));
    out.std_error = std::sqrt(var / n);
  }
  return out;
}

} // namespace zicopula
