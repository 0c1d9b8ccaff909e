#include "doctest.h"
#include "oracles.hpp"

#include "zicopula/error.hpp"
#include "zicopula/rng.hpp"
#include "zicopula/stat_core.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace zicopula;

namespace {

CorrelationMatrix random_corr(Index d, std::uint64_t seed)
{
  Rng rng(seed);
  Matrix a(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      a(i, j) = rng.normal();
  Matrix s = a * a.transpose() + 0.5 * Matrix::Identity(d, d);
  const Vector inv = s.diagonal().cwiseSqrt().cwiseInverse();
  s = inv.asDiagonal() * s * inv.asDiagonal();
  s.diagonal().setOnes();
  return CorrelationMatrix::from_matrix(s);
}

} // namespace

TEST_CASE("standard normal pdf")
{
  CHECK(std_normal_pdf(0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
  CHECK(std_normal_pdf(1.0) == doctest::Approx(0.2419707245).epsilon(1e-10));
  CHECK(std_normal_pdf(-1.0) == std_normal_pdf(1.0));
  CHECK(std_normal_logpdf(3.0) == doctest::Approx(std::log(oracle::phi(3.0))));
}

TEST_CASE("standard normal cdf")
{
  CHECK(std_normal_cdf(0.0) == 0.5);
  CHECK(std_normal_cdf(std::numeric_limits<double>::infinity()) == 1.0);
  CHECK(std_normal_cdf(-std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(std::abs(std_normal_cdf(1.959964) - 0.975) < 1e-7);
  for (double x = -9.0; x <= 9.0; x += 0.37) {
    CHECK(std::abs(std_normal_cdf(x) - oracle::cdf(x)) < 1e-14);
    CHECK(std::abs(std_normal_cdf(-x) - (1.0 - std_normal_cdf(x))) < 1e-15);
  }
  // log cdf keeps precision far in the lower tail
  // Phi(-40) underflows; compare with the asymptotic Mills-ratio series.
  const double x40 = -40.0;
  const double mills = std::log(1 - 1 / (x40 * x40) + 3 / std::pow(x40, 4) - 15 / std::pow(x40, 6));
  CHECK(std_normal_logcdf(x40) == doctest::Approx(-0.5 * x40 * x40 - 0.5 * std::log(2 * std::numbers::pi) - std::log(-x40) + mills).epsilon(1e-10));
}

TEST_CASE("standard normal quantile")
{
  CHECK(std_normal_quantile(0.5) == 0.0);
  CHECK(std_normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(std_normal_quantile(0.025) == doctest::Approx(-1.959964).epsilon(1e-6));
  CHECK_THROWS_AS(std_normal_quantile(0.0), DomainError);
  CHECK_THROWS_AS(std_normal_quantile(1.0), DomainError);
  CHECK_THROWS_AS(std_normal_quantile(-0.1), DomainError);

  SUBCASE("round trip on a grid from 1e-6 to 1 - 1e-6")
  {
    double worst = 0.0;
    for (int k = 0; k <= 2000; ++k) {
      const double p = 1e-6 + (1.0 - 2e-6) * k / 2000.0;
      worst = std::max(worst, std::abs(std_normal_cdf(std_normal_quantile(p)) - p));
      CHECK(std::abs(std_normal_quantile(p) - oracle::quantile(p)) < 1e-9 * std::max(1.0, std::abs(oracle::quantile(p))));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("bivariate normal cdf")
{
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(bivariate_normal_cdf(0, 0, 0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::abs(bivariate_normal_cdf(inf, 0.7, 0.3) - std_normal_cdf(0.7)) < 1e-15);
  CHECK(std::abs(bivariate_normal_cdf(0, 0, 0.5) - (0.25 + std::asin(0.5) / (2 * std::numbers::pi))) < 1e-8);
  CHECK(bivariate_normal_cdf(-inf, 0.3, 0.2) == 0.0);
  CHECK_THROWS_AS(bivariate_normal_cdf(0, 0, 1.0), DomainError);
  CHECK_THROWS_AS(bivariate_normal_cdf(0, 0, -1.0), DomainError);

  SUBCASE("agrees with the Plackett integral")
  {
    const double pts[] = { -3.1, -1.2, -0.3, 0.0, 0.8, 2.2 };
    const double rhos[] = { -0.95, -0.6, -0.1, 0.0, 0.3, 0.75, 0.99 };
    for (double a : pts)
      for (double b : pts)
        for (double r : rhos)
          CHECK(std::abs(bivariate_normal_cdf(a, b, r) - oracle::bvn(a, b, r)) < 1e-8);
  }
  SUBCASE("independence, exchange symmetry and monotonicity")
  {
    for (double a = -3; a <= 3; a += 0.5)
      for (double b = -3; b <= 3; b += 0.5) {
        CHECK(std::abs(bivariate_normal_cdf(a, b, 0.0) - std_normal_cdf(a) * std_normal_cdf(b)) < 1e-10);
        CHECK(bivariate_normal_cdf(a, b, 0.4) == doctest::Approx(bivariate_normal_cdf(b, a, 0.4)).epsilon(1e-14));
        CHECK(bivariate_normal_cdf(a + 0.5, b, 0.4) >= bivariate_normal_cdf(a, b, 0.4));
        CHECK(bivariate_normal_cdf(a, b, 0.5) >= bivariate_normal_cdf(a, b, 0.4) - 1e-15);
      }
  }
}

TEST_CASE("multivariate normal log density")
{
  const double l2pi = std::log(2 * std::numbers::pi);
  CHECK(mvn_logpdf(Vector::Zero(2), Matrix::Identity(2, 2)) == doctest::Approx(-l2pi));
  CHECK(mvn_logpdf(Vector::Ones(2), Matrix::Identity(2, 2)) == doctest::Approx(-l2pi - 1.0));

  Matrix c(2, 2);
  c << 1, 0.5, 0.5, 1;
  SUBCASE("matches the quadrature-normalized kernel")
  {
    auto kernel = [&](double x, double y) {
      Vector v(2);
      v << x, y;
      return std::exp(-0.5 * v.dot(c.inverse() * v));
    };
    const double z = oracle::integrate2(kernel, -12, 12, -12, 12);
    CHECK(mvn_logpdf(Vector::Ones(2), c) == doctest::Approx(std::log(kernel(1, 1) / z)).epsilon(1e-9));
  }
  SUBCASE("trapezoid mass over [-8, 8]^2 is 1")
  {
    for (double r : { -0.8, 0.0, 0.5, 0.9 }) {
      Matrix s(2, 2);
      s << 1, r, r, 1;
      const int n = 400;
      const double h = 16.0 / n;
      double acc = 0.0;
      for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j) {
          Vector v(2);
          v << -8 + i * h, -8 + j * h;
          const double w = (i == 0 || i == n ? 0.5 : 1.0) * (j == 0 || j == n ? 0.5 : 1.0);
          acc += w * std::exp(mvn_logpdf(v, s));
        }
      CHECK(std::abs(acc * h * h - 1.0) < 1e-4);
    }
  }
  Matrix bad(2, 2);
  bad << 1, 1, 1, 1;
  CHECK_THROWS_AS(mvn_logpdf(Vector::Zero(2), bad), NumericError);
}

TEST_CASE("conditional gaussian")
{
  SUBCASE("identity")
  {
    const auto g = conditional_gaussian(CorrelationMatrix::identity(4), { 1, 3 }, Vector::Constant(2, 0.7));
    CHECK(g.mean.isZero(0));
    CHECK(g.cov.isApprox(Matrix::Identity(2, 2)));
  }
  SUBCASE("bivariate: mean rho w, variance 1 - rho^2")
  {
    Matrix s(2, 2);
    s << 1, 0.6, 0.6, 1;
    const auto g = conditional_gaussian(CorrelationMatrix::from_matrix(s), { 1 }, Vector::Constant(1, 1.5));
    CHECK(g.mean(0) == doctest::Approx(0.9));
    CHECK(g.cov(0, 0) == doctest::Approx(1 - 0.36));
  }
  SUBCASE("3x3 agrees with explicit inversion")
  {
    const CorrelationMatrix s = random_corr(3, 11);
    const Matrix p = oracle::inverse3(s.matrix());
    // precision-matrix form: cov(0|1,2) = 1/P00, mean = -P01 w1/P00 - P02 w2/P00
    Vector w(2);
    w << 0.4, -1.1;
    const auto g = conditional_gaussian(s, { 1, 2 }, w);
    CHECK(g.cov(0, 0) == doctest::Approx(1.0 / p(0, 0)).epsilon(1e-12));
    CHECK(g.mean(0) == doctest::Approx(-(p(0, 1) * w(0) + p(0, 2) * w(1)) / p(0, 0)).epsilon(1e-12));
  }
  SUBCASE("law of total covariance on random 4x4")
  {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const CorrelationMatrix s = random_corr(4, 100 + seed);
      const IndexSet cond{ 0, 2 };
      const IndexSet rest{ 1, 3 };
      // Var(X_rest) = E[Var(X_rest | X_cond)] + Var(E[X_rest | X_cond])
      const auto g0 = conditional_gaussian(s, cond, Vector::Zero(2));
      Matrix slope(2, 2);
      for (int k = 0; k < 2; ++k) {
        Vector e = Vector::Zero(2);
        e(k) = 1.0;
        slope.col(k) = conditional_gaussian(s, cond, e).mean;
      }
      const Matrix recon = g0.cov + slope * s.sub(cond) * slope.transpose();
      CHECK((recon - s.sub(rest)).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
  SUBCASE("errors")
  {
    CHECK_THROWS(conditional_gaussian(CorrelationMatrix::identity(2), {}, Vector()));
    CHECK_THROWS(conditional_gaussian(CorrelationMatrix::identity(2), { 0, 1 }, Vector::Zero(2)));
  }
}

TEST_CASE("correlation repair")
{
  CHECK(repair_correlation(Matrix::Identity(4, 4)).matrix().isApprox(Matrix::Identity(4, 4)));
  Matrix pd(2, 2);
  pd << 1, 0.9, 0.9, 1;
  CHECK((repair_correlation(pd).matrix() - pd).cwiseAbs().maxCoeff() <= 1e-12);

  Matrix bad(3, 3);
  bad << 1, 0.9, 0.9, 0.9, 1, -0.9, 0.9, -0.9, 1;
  CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(bad).eigenvalues().minCoeff() < 0.0);
  const CorrelationMatrix fixed = repair_correlation(bad);
  CHECK(min_eigenvalue(fixed.matrix()) >= 1e-6 * (1 - 1e-9));

  SUBCASE("random symmetric unit-diagonal inputs")
  {
    Rng rng(5);
    for (int t = 0; t < 200; ++t) {
      const Index d = 2 + static_cast<Index>(rng.index(6));
      Matrix m = Matrix::Identity(d, d);
      for (Index i = 0; i < d; ++i)
        for (Index j = i + 1; j < d; ++j)
          m(i, j) = m(j, i) = rng.uniform(-0.99, 0.99);
      const Matrix r = repair_correlation(m).matrix();
      CHECK(r.isApprox(r.transpose(), 0));
      CHECK(r.diagonal().isOnes(0));
      CHECK(r.cwiseAbs().maxCoeff() <= 1.0);
      CHECK(min_eigenvalue(r) >= 0.0);
    }
  }
}

TEST_CASE("orthant Monte Carlo")
{
  SUBCASE("univariate")
  {
    ConditionalGaussian g{ Vector::Constant(1, 0.3), Matrix::Constant(1, 1, 2.0) };
    const auto est = mvn_orthant_mc(g, Vector::Constant(1, 1.0), 20000, 1);
    CHECK(std::abs(est.probability - oracle::cdf(0.7 / std::sqrt(2.0))) < 3 * est.std_error + 1e-12);
  }
  SUBCASE("independent pair")
  {
    ConditionalGaussian g{ Vector::Zero(2), Matrix::Identity(2, 2) };
    Vector u(2);
    u << 0.5, -0.4;
    const auto est = mvn_orthant_mc(g, u, 20000, 2);
    CHECK(std::abs(est.probability - oracle::cdf(0.5) * oracle::cdf(-0.4)) < 3 * est.std_error);
  }
  SUBCASE("correlated pair")
  {
    Matrix c(2, 2);
    c << 1, 0.7, 0.7, 1;
    ConditionalGaussian g{ Vector::Zero(2), c };
    Vector u(2);
    u << 0.2, -0.6;
    const auto est = mvn_orthant_mc(g, u, 20000, 3);
    CHECK(std::abs(est.probability - oracle::bvn(0.2, -0.6, 0.7)) < 3 * est.std_error);
  }
  SUBCASE("trivariate orthant at zero")
  {
    Matrix c(3, 3);
    c << 1, 0.3, -0.2, 0.3, 1, 0.5, -0.2, 0.5, 1;
    ConditionalGaussian g{ Vector::Zero(3), c };
    const auto est = mvn_orthant_mc(g, Vector::Zero(3), 40000, 4);
    CHECK(std::abs(est.probability - oracle::tri_orthant0(0.3, -0.2, 0.5)) < 3 * est.std_error);
  }
  SUBCASE("deterministic per seed")
  {
    ConditionalGaussian g{ Vector::Zero(2), Matrix::Identity(2, 2) };
    CHECK(mvn_orthant_mc(g, Vector::Zero(2), 999, 42).probability ==
          mvn_orthant_mc(g, Vector::Zero(2), 999, 42).probability);
  }
}
