#include "doctest.h"
#include "oracles.hpp"

#include "zicopula/error.hpp"
#include "zicopula/rgd_copula.hpp"
#include "zicopula/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace zicopula;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CorrelationMatrix corr2(double r)
{
  Matrix m(2, 2);
  m << 1, r, r, 1;
  return CorrelationMatrix::from_matrix(m);
}

CorrelationMatrix corr3(double r12, double r13, double r23)
{
  Matrix m(3, 3);
  m << 1, r12, r13, r12, 1, r23, r13, r23, 1;
  return CorrelationMatrix::from_matrix(m);
}

double rho_hat(const OmegaData& d, const Vector& a, Index i = 0, Index j = 1)
{
  return estimate_rho(d.omega.col(i), d.rectified.col(i), d.omega.col(j), d.rectified.col(j), a(i), a(j));
}

double pearson(const Vector& x, const Vector& y)
{
  const Vector dx = x.array() - x.mean();
  const Vector dy = y.array() - y.mean();
  return dx.dot(dy) / std::sqrt(dx.squaredNorm() * dy.squaredNorm());
}

} // namespace

TEST_CASE("rectified sampling")
{
  SUBCASE("no rectification is plain normal")
  {
    const RgdParams p(corr2(0.3), Vector::Constant(2, -kInf));
    const auto d = sample_rgd(p, 10000, 1);
    CHECK(!d.rectified.any());
    for (Index j = 0; j < 2; ++j) {
      std::vector<double> v(d.omega.col(j).begin(), d.omega.col(j).end());
      std::sort(v.begin(), v.end());
      double ks = 0.0;
      for (std::size_t k = 0; k < v.size(); ++k)
        ks = std::max({ ks, std::abs(oracle::cdf(v[k]) - double(k) / v.size()), std::abs(oracle::cdf(v[k]) - double(k + 1) / v.size()) });
      CHECK(ks <= 0.02);
    }
  }
  SUBCASE("D = 1, a = 0 rectifies half")
  {
    const RgdParams p(CorrelationMatrix::identity(1), Vector::Zero(1));
    const auto d = sample_rgd(p, 10000, 2);
    const double frac = d.rectified.count() / 10000.0;
    CHECK(std::abs(frac - 0.5) <= 3 * std::sqrt(0.25 / 10000));
    for (Index r = 0; r < 10000; ++r)
      CHECK((d.rectified(r, 0) ? d.omega(r, 0) == 0.0 : d.omega(r, 0) > 0.0));
  }
  SUBCASE("joint rectified mass matches the bivariate cdf")
  {
    const double n = 10000;
    const RgdParams p(corr2(0.8), Vector::Zero(2));
    const auto d = sample_rgd(p, 10000, 3);
    const double both = (d.rectified.col(0) && d.rectified.col(1)).count() / n;
    const double ref = oracle::bvn(0, 0, 0.8);
    CHECK(std::abs(both - ref) <= 3 * std::sqrt(ref * (1 - ref) / n));
  }
  CHECK(sample_rgd(RgdParams(corr2(0.5), Vector::Zero(2)), 50, 9).omega ==
        sample_rgd(RgdParams(corr2(0.5), Vector::Zero(2)), 50, 9).omega);
}

TEST_CASE("pair likelihood branches")
{
  const double ai = -0.2, aj = 0.4;
  CHECK(pair_loglik({ ai, true }, { aj, true }, 0.0, ai, aj) ==
        doctest::Approx(std::log(oracle::cdf(ai) * oracle::cdf(aj))).epsilon(1e-12));
  CHECK(pair_loglik({ ai, true }, { 1.3, false }, 0.0, ai, aj) ==
        doctest::Approx(std::log(oracle::phi(1.3)) + std::log(oracle::cdf(ai))).epsilon(1e-12));
  CHECK_THROWS_AS(pair_loglik({ 0, false }, { 0, false }, 1.0, ai, aj), DomainError);

  SUBCASE("four branches integrate to one")
  {
    const double settings[3][3] = { { 0.5, -0.2, 0.4 }, { -0.7, 0.3, 0.3 }, { 0.9, -1.0, 0.8 } };
    for (const auto& s : settings) {
      const double r = s[0], a = s[1], b = s[2];
      const double p00 = std::exp(pair_loglik({ a, true }, { b, true }, r, a, b));
      const double p01 = oracle::integrate([&](double w) { return std::exp(pair_loglik({ a, true }, { w, false }, r, a, b)); }, b, 12);
      const double p10 = oracle::integrate([&](double w) { return std::exp(pair_loglik({ w, false }, { b, true }, r, a, b)); }, a, 12);
      const double p11 = oracle::integrate2(
        [&](double x, double y) { return std::exp(pair_loglik({ x, false }, { y, false }, r, a, b)); }, a, 12, b, 12);
      CHECK(std::abs(p00 + p01 + p10 + p11 - 1.0) < 1e-4);
    }
  }
  SUBCASE("continuous in rho")
  {
    for (double r = -0.95; r < 0.95; r += 0.001) {
      const double l1 = pair_loglik({ 0.3, false }, { -0.1, true }, r, -0.5, -0.1);
      const double l2 = pair_loglik({ 0.3, false }, { -0.1, true }, r + 0.001, -0.5, -0.1);
      CHECK(std::abs(l1 - l2) < 0.05);
    }
  }
}

TEST_CASE("pairwise correlation estimate")
{
  SUBCASE("recovery across settings")
  {
    const double rhos[] = { -0.6, 0.0, 0.6 };
    const double as[][2] = { { -0.5, 0.5 }, { 0.5, 0.5 }, { 0.0, 0.0 }, { 0.524, 0.524 } }; // last: q = 0.7
    std::uint64_t seed = 10;
    for (double r : rhos)
      for (const auto& a : as) {
        Vector av(2);
        av << a[0], a[1];
        const auto d = sample_rgd(RgdParams(corr2(r), av), 10000, seed++);
        CHECK(std::abs(rho_hat(d, av) - r) <= 0.05);
      }
  }
  SUBCASE("no rectification: Gaussian MLE equals the correlation of standardized data")
  {
    const auto d0 = sample_rgd(RgdParams(corr2(0.45), Vector::Constant(2, -kInf)), 5000, 3);
    OmegaData d = d0;
    for (Index j = 0; j < 2; ++j) {
      const Vector c = d.omega.col(j).array() - d.omega.col(j).mean();
      d.omega.col(j) = c / std::sqrt(c.squaredNorm() / c.size());
    }
    CHECK(std::abs(rho_hat(d, Vector::Constant(2, -kInf)) - pearson(d.omega.col(0), d.omega.col(1))) < 1e-3);
  }
  SUBCASE("swap equivariance")
  {
    Vector a(2);
    a << -0.3, 0.2;
    const auto d = sample_rgd(RgdParams(corr2(0.35), a), 3000, 4);
    Vector a_sw(2);
    a_sw << a(1), a(0);
    CHECK(rho_hat(d, a, 0, 1) == doctest::Approx(estimate_rho(d.omega.col(1), d.rectified.col(1), d.omega.col(0),
                                                                d.rectified.col(0), a(1), a(0)))
                                   .epsilon(1e-6));
  }
  SUBCASE("errors")
  {
    const auto d = sample_rgd(RgdParams(corr2(0.2), Vector::Zero(2)), 9, 5);
    CHECK_THROWS_AS(rho_hat(d, Vector::Zero(2)), DataError);
    OmegaData all;
    all.omega = Matrix::Zero(20, 2);
    all.rectified = BoolMatrix::Constant(20, 2, true);
    CHECK_THROWS_WITH_AS(rho_hat(all, Vector::Zero(2)), doctest::Contains("no information"), DataError);
  }
}

TEST_CASE("correlation assembly")
{
  const CorrelationMatrix truth = corr3(0.5, -0.3, 0.2);
  Vector a(3);
  a << -0.4, 0.1, 0.3;
  const auto d = sample_rgd(RgdParams(truth, a), 10000, 8);
  const double err_mle = (assemble_sigma(d, a, true).matrix() - truth.matrix()).norm();
  const double err_emp = (assemble_sigma(d, a, false).matrix() - truth.matrix()).norm();
  CHECK(err_mle <= 0.1);
  CHECK(err_emp > err_mle);

  const Vector none = Vector::Constant(3, -kInf);
  const auto g = sample_rgd(RgdParams(truth, none), 10000, 9);
  OmegaData gs = g;
  for (Index j = 0; j < 3; ++j) {
    const Vector c = gs.omega.col(j).array() - gs.omega.col(j).mean();
    gs.omega.col(j) = c / std::sqrt(c.squaredNorm() / c.size());
  }
  CHECK((assemble_sigma(gs, none, true).matrix() - assemble_sigma(gs, none, false).matrix()).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("marginalizability of the rectified normal")
{
  const CorrelationMatrix s = corr3(0.6, -0.4, 0.1);
  Vector a(3);
  a << -0.2, 0.5, 0.0;
  const auto big = sample_rgd(RgdParams(s, a), 10000, 30);
  Vector a2(2);
  a2 << a(0), a(2);
  const auto small = sample_rgd(RgdParams(corr2(-0.4), a2), 10000, 31);
  // Two-sample comparison of the pattern frequencies and of the joint
  // positive part through a 2-D Kolmogorov-Smirnov type statistic on a grid.
  const double n = 10000;
  for (int p = 0; p < 4; ++p) {
    const bool z0 = p & 1, z1 = p & 2;
    const double f1 = ((big.rectified.col(0) == z0) && (big.rectified.col(2) == z1)).count() / n;
    const double f2 = ((small.rectified.col(0) == z0) && (small.rectified.col(1) == z1)).count() / n;
    const double se = std::sqrt(2 * std::max(f1, 1e-3) * (1 - f1) / n);
    CHECK(std::abs(f1 - f2) < 4 * se);
  }
  double stat = 0.0;
  for (double x = -0.2; x < 3; x += 0.2)
    for (double y = 0.0; y < 3; y += 0.2) {
      const double c1 = ((big.omega.col(0).array() <= x) && (big.omega.col(2).array() <= y)).count() / n;
      const double c2 = ((small.omega.col(0).array() <= x) && (small.omega.col(1).array() <= y)).count() / n;
      stat = std::max(stat, std::abs(c1 - c2));
    }
  CHECK(stat < 1.95 * std::sqrt(2.0 / n) * 1.5);
}

TEST_CASE("copula density")
{
  Vector a(3);
  a << -0.3, 0.2, -1.0;
  const RgdParams indep(CorrelationMatrix::identity(3), a);
  for (std::uint64_t bits = 0; bits < 8; ++bits) {
    const ZeroPattern pat = ZeroPattern::from_bits(bits, 3);
    Vector w(3);
    for (Index i = 0; i < 3; ++i)
      w(i) = pat.is_zero(i) ? a(i) : a(i) + 0.7 + 0.1 * i;
    CHECK(std::abs(copula_logdensity_exact(indep, w, pat)) < 1e-12);
    CHECK(std::abs(copula_logdensity_approx(indep, w, pat)) < 1e-12);
  }

  SUBCASE("no zeros is the Gaussian copula")
  {
    const CorrelationMatrix s = corr3(0.4, 0.2, -0.3);
    Vector w(3);
    w << 0.1, 1.2, -0.5;
    const RgdParams p(s, a);
    const double gauss = mvn_logpdf(w, s.matrix()) - std::log(oracle::phi(0.1)) - std::log(oracle::phi(1.2)) -
                         std::log(oracle::phi(-0.5));
    const ZeroPattern none(std::vector<bool>(3, false));
    CHECK(copula_logdensity_exact(p, w, none) == doctest::Approx(gauss).epsilon(1e-12));
    CHECK(copula_logdensity_exact(RgdParams(s, Vector::Constant(3, -kInf)), w, none) == doctest::Approx(gauss).epsilon(1e-12));
  }
  SUBCASE("D = 2, one zero: closed form")
  {
    const double r = 0.55, a1 = -0.25, w2 = 0.8;
    Vector av(2), w(2);
    av << a1, -0.6;
    w << a1, w2;
    const double expect = std::log(oracle::cdf((a1 - r * w2) / std::sqrt(1 - r * r))) - std::log(oracle::cdf(a1));
    CHECK(copula_logdensity_exact(RgdParams(corr2(r), av), w, ZeroPattern({ true, false })) ==
          doctest::Approx(expect).epsilon(1e-10));
  }
  SUBCASE("approximation is exact under block independence")
  {
    // zeros {0}, positives {1, 2}; Sigma_{0,S} = 0
    const CorrelationMatrix s = corr3(0.0, 0.0, 0.6);
    Vector w(3);
    w << a(0), 0.9, -0.4;
    const ZeroPattern pat({ true, false, false });
    const RgdParams p(s, a);
    CHECK(copula_logdensity_exact(p, w, pat) == doctest::Approx(copula_logdensity_approx(p, w, pat)).epsilon(1e-12));
  }
  SUBCASE("approximation is close for mild correlation")
  {
    // near the center, and on average over points of the pattern drawn from the model
    const CorrelationMatrix s = corr3(0.3, 0.3, 0.3);
    const RgdParams p(s, a);
    const ZeroPattern pat({ true, false, false });
    const auto d = sample_rgd(p, 4000, 12);
    double gap = 0.0;
    int n = 0;
    for (Index r = 0; r < 4000 && n < 200; ++r) {
      if (!(d.rectified(r, 0) && !d.rectified(r, 1) && !d.rectified(r, 2)))
        continue;
      const Vector w = d.omega.row(r).transpose();
      gap += std::abs(copula_logdensity_exact(p, w, pat, 100000, 1) - copula_logdensity_approx(p, w, pat));
      ++n;
    }
    REQUIRE(n > 50);
    CHECK(gap / n < 0.4);
    Vector w(3);
    w << a(0), 0.3, 0.1;
    CHECK(std::abs(copula_logdensity_exact(p, w, pat, 100000, 1) - copula_logdensity_approx(p, w, pat)) < 0.2);
  }
  SUBCASE("pattern mismatch is rejected")
  {
    Vector w(3);
    w << 0.5, 0.5, 0.5;
    CHECK_THROWS_AS(copula_logdensity_exact(indep, w, ZeroPattern({ true, false, false })), DataError);
    CHECK_THROWS_AS(copula_logdensity_approx(indep, w, ZeroPattern({ false, true, false })), DataError);
  }
  const ZeroPattern all_zero(std::vector<bool>(3, true));
  CHECK(copula_logdensity_approx(RgdParams(corr3(0.2, 0.1, 0.3), a), a, all_zero) == 0.0);
}

TEST_CASE("zero pattern probabilities")
{
  Vector a(3);
  a << -0.3, 0.2, -1.0;
  const Vector q = a.unaryExpr([](double x) { return oracle::cdf(x); });
  for (std::uint64_t bits = 0; bits < 8; ++bits) {
    const ZeroPattern pat = ZeroPattern::from_bits(bits, 3);
    double expect = 0.0;
    for (Index i = 0; i < 3; ++i)
      expect += std::log(pat.is_zero(i) ? q(i) : 1 - q(i));
    CHECK(zero_pattern_logprob(RgdParams(CorrelationMatrix::identity(3), a), pat).log_prob ==
          doctest::Approx(expect).epsilon(1e-12));
  }
  CHECK(zero_pattern_logprob(RgdParams(CorrelationMatrix::identity(1), Vector::Constant(1, -0.4)), ZeroPattern({ true }))
          .log_prob == doctest::Approx(std::log(oracle::cdf(-0.4))).epsilon(1e-12));

  SUBCASE("all patterns sum to one")
  {
    const RgdParams p(corr3(0.5, -0.2, 0.3), a);
    double total = 0.0, var = 0.0;
    for (std::uint64_t bits = 0; bits < 8; ++bits) {
      const auto pp = zero_pattern_logprob(p, ZeroPattern::from_bits(bits, 3), 20000, bits);
      total += std::exp(pp.log_prob);
      var += pp.std_error * pp.std_error;
    }
    CHECK(std::abs(total - 1.0) <= 3 * std::sqrt(var) + 1e-12);
  }
  SUBCASE("D = 4, exhaustive")
  {
    Matrix m(4, 4);
    m << 1, 0.3, 0.1, -0.2, 0.3, 1, 0.4, 0.0, 0.1, 0.4, 1, 0.25, -0.2, 0.0, 0.25, 1;
    Vector a4(4);
    a4 << 0.1, -0.5, 0.3, -0.2;
    const RgdParams p(CorrelationMatrix::from_matrix(m), a4);
    double total = 0.0, var = 0.0;
    for (std::uint64_t bits = 0; bits < 16; ++bits) {
      const auto pp = zero_pattern_logprob(p, ZeroPattern::from_bits(bits, 4), 20000, 100 + bits);
      total += std::exp(pp.log_prob);
      var += pp.std_error * pp.std_error;
    }
    CHECK(std::abs(total - 1.0) <= 3 * std::sqrt(var) + 1e-12);
  }
  SUBCASE("positive correlation raises the both-zero mass")
  {
    Vector a2(2);
    a2 << -0.2, 0.1;
    const double both = std::exp(zero_pattern_logprob(RgdParams(corr2(0.4), a2), ZeroPattern({ true, true })).log_prob);
    CHECK(both > oracle::cdf(-0.2) * oracle::cdf(0.1));
    CHECK(both == doctest::Approx(oracle::bvn(-0.2, 0.1, 0.4)).epsilon(1e-9));
  }
}
