#include "doctest.h"
#include "oracles.hpp"

#include "zicopula/error.hpp"
#include "zicopula/synth_bench.hpp"
#include "zicopula/zibt_model.hpp"

#include <chrono>
#include <cmath>

using namespace zicopula;

namespace {

double top_of(const MarginalModel& m)
{
  return m.centers().back() + 12.0 * m.bandwidth();
}

ZibtFitOptions exact_opts(bool rescale = false)
{
  ZibtFitOptions o;
  o.mode = LikelihoodMode::Exact;
  o.use_rescale = rescale;
  return o;
}

} // namespace

TEST_CASE("zibt fit")
{
  SUBCASE("generator recovery at D = 2")
  {
    const auto gt = make_ground_truth(DataKind::Zibt, 2, 3);
    const Matrix x = sample_dataset(gt, 10000, 4);
    const auto m = fit_zibt(x, {});
    CHECK(std::abs(m.copula.sigma(0, 1) - gt.sigma(0, 1)) <= 0.1);
    for (Index j = 0; j < 2; ++j) {
      CHECK(std::abs(m.marginals[static_cast<std::size_t>(j)].q() - gt.q(j)) <= 0.02);
      CHECK(oracle::cdf(m.copula.a(j)) == doctest::Approx(m.marginals[static_cast<std::size_t>(j)].q()).epsilon(1e-9));
    }
  }
  SUBCASE("pairwise MLE beats the plain correlation of tied data")
  {
    const auto gt = make_ground_truth(DataKind::Zibt, 3, 5);
    const Matrix x = sample_dataset(gt, 5000, 6);
    ZibtFitOptions wo;
    wo.use_mle = false;
    const double e_mle = sigma_l2_error(fit_zibt(x, {}).copula.sigma, gt.sigma);
    const double e_wo = sigma_l2_error(fit_zibt(x, wo).copula.sigma, gt.sigma);
    CHECK(e_mle < e_wo);
  }
  SUBCASE("no zeros gives a plain Gaussian copula")
  {
    Rng rng(7);
    Matrix x(4000, 2);
    for (Index r = 0; r < x.rows(); ++r) {
      const double z1 = rng.normal(), z2 = 0.5 * z1 + std::sqrt(0.75) * rng.normal();
      x(r, 0) = std::exp(z1);
      x(r, 1) = std::exp(z2);
    }
    const auto m = fit_zibt(x, exact_opts());
    CHECK(std::isinf(m.copula.a(0)));
    const OmegaData om = omega_matrix(x, m.marginals);
    CHECK(!om.rectified.any());
    const Vector w0 = om.omega.col(0).array() - om.omega.col(0).mean();
    const Vector w1 = om.omega.col(1).array() - om.omega.col(1).mean();
    const double emp = w0.dot(w1) / std::sqrt(w0.squaredNorm() * w1.squaredNorm());
    // unit-variance MLE and sample correlation agree to the order of the
    // deviation of the omega sample variances from one
    const double var_dev = std::max(std::abs(w0.squaredNorm() / x.rows() - 1), std::abs(w1.squaredNorm() / x.rows() - 1));
    CHECK(std::abs(m.copula.sigma(0, 1) - emp) <= std::max(1e-3, var_dev));
    const Vector row = x.row(0).transpose();
    const double gauss = mvn_logpdf(Vector(om.omega.row(0).transpose()), m.copula.sigma.matrix()) -
                         std::log(oracle::phi(om.omega(0, 0))) - std::log(oracle::phi(om.omega(0, 1)));
    CHECK(zibt_loglik(m, row) == doctest::Approx(std::log(positive_pdf(m.marginals[0], row(0))) +
                                                 std::log(positive_pdf(m.marginals[1], row(1))) + gauss)
                                   .epsilon(1e-10));
  }
}

TEST_CASE("zibt likelihood")
{
  const auto gt = make_ground_truth(DataKind::Zibt, 2, 11);
  const Matrix x = sample_dataset(gt, 80, 12);
  const auto m = fit_zibt(x, exact_opts());

  SUBCASE("identity correlation is the product of mixed marginals")
  {
    auto mi = m;
    mi.copula.sigma = CorrelationMatrix::identity(2);
    Vector v(2);
    v << 0.0, x.col(1).maxCoeff() / 2;
    const auto& g0 = mi.marginals[0];
    const auto& g1 = mi.marginals[1];
    const double expect = std::log(g0.q()) + std::log(1 - g1.q()) + std::log(positive_pdf(g1, v(1)));
    CHECK(zibt_loglik(mi, v) == doctest::Approx(expect).epsilon(1e-12));
    mi.mode = LikelihoodMode::Approx;
    CHECK(zibt_loglik(mi, v) == doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("total probability over the four subspaces")
  {
    const auto& g0 = m.marginals[0];
    const auto& g1 = m.marginals[1];
    auto f = [&](double a, double b) {
      Vector v(2);
      v << a, b;
      return std::exp(zibt_loglik(m, v));
    };
    const double p00 = f(0, 0);
    CHECK(p00 == doctest::Approx(oracle::bvn(m.copula.a(0), m.copula.a(1), m.copula.sigma(0, 1))).epsilon(1e-9));
    const double p10 = oracle::integrate([&](double t) { return f(t, 0); }, 0, top_of(g0), 1e-10);
    const double p01 = oracle::integrate([&](double t) { return f(0, t); }, 0, top_of(g1), 1e-10);
    const double p11 = oracle::integrate2(f, 0, top_of(g0), 0, top_of(g1), 1e-8);
    CHECK(std::abs(p00 + p01 + p10 + p11 - 1.0) < 2e-3);
  }
  SUBCASE("exact equals approx under block independence")
  {
    Matrix s(3, 3);
    s << 1, 0, 0, 0, 1, 0.5, 0, 0.5, 1;
    const Matrix x3 = sample_dataset(make_ground_truth(DataKind::Zibt, 3, 13), 500, 14);
    auto me = fit_zibt(x3, exact_opts());
    me.copula = RgdParams(CorrelationMatrix::from_matrix(s), me.copula.a);
    auto ma = me;
    ma.mode = LikelihoodMode::Approx;
    Vector v(3);
    v << 0.0, x3.col(1).maxCoeff() / 2, x3.col(2).maxCoeff() / 3;
    CHECK(zibt_loglik(me, v) == doctest::Approx(zibt_loglik(ma, v)).epsilon(1e-12));
  }
  SUBCASE("unseen zero stays finite")
  {
    Matrix y = x;
    for (Index r = 0; r < y.rows(); ++r)
      if (y(r, 0) == 0.0)
        y(r, 0) = 0.5;
    const auto my = fit_zibt(y, exact_opts());
    CHECK(my.marginals[0].q() == 0.0);
    Vector v(2);
    v << 0.0, 0.0;
    CHECK(std::isfinite(zibt_loglik(my, v)));
  }
  SUBCASE("far-tail corruption lowers the likelihood")
  {
    const Matrix big = sample_dataset(gt, 2000, 15);
    for (auto mode : { LikelihoodMode::Exact, LikelihoodMode::Approx }) {
      ZibtFitOptions o;
      o.mode = mode;
      const auto mm = fit_zibt(big, o);
      for (Index r = 0; r < 50; ++r) {
        Vector v = big.row(r).transpose();
        for (Index j = 0; j < 2; ++j) {
          if (v(j) == 0.0)
            continue;
          Vector w = v;
          w(j) = 1e3 * big.col(j).maxCoeff();
          CHECK(zibt_loglik(mm, w, r) < zibt_loglik(mm, v, r));
        }
      }
    }
  }
  SUBCASE("row-indexed exact scoring is reproducible")
  {
    const Matrix x4 = sample_dataset(make_ground_truth(DataKind::Zibt, 4, 16), 300, 17);
    const auto m4 = fit_zibt(x4, exact_opts());
    for (Index r = 0; r < 30; ++r)
      CHECK(zibt_loglik(m4, x4.row(r).transpose(), r) == zibt_loglik(m4, x4.row(r).transpose(), r));
  }
  CHECK_THROWS_AS(zibt_loglik(m, Vector::Constant(2, -0.5)), DataError);
}

TEST_CASE("zibt zero pattern probabilities")
{
  const auto gt = make_ground_truth(DataKind::Zibt, 3, 19);
  const auto m = fit_zibt(sample_dataset(gt, 3000, 20), {});
  double total = 0.0, var = 0.0;
  for (std::uint64_t s = 0; s < 8; ++s) {
    const auto p = zero_pattern_prob(m, ZeroPattern::from_bits(s, 3), 20000, s);
    total += std::exp(p.log_prob);
    var += p.std_error * p.std_error;
  }
  CHECK(std::abs(total - 1.0) <= 3 * std::sqrt(var) + 1e-12);

  auto mi = m;
  mi.copula.sigma = CorrelationMatrix::identity(3);
  const auto p = zero_pattern_prob(mi, ZeroPattern({ true, false, true }), 1000, 0);
  const double expect = mi.marginals[0].q() * (1 - mi.marginals[1].q()) * mi.marginals[2].q();
  CHECK(std::exp(p.log_prob) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("approximate scoring scales to D = 15")
{
  const auto gt = make_ground_truth(DataKind::Zibt, 15, 23);
  const Matrix x = sample_dataset(gt, 2000, 24);
  const auto m = fit_zibt(x, {});
  const Matrix test = sample_dataset(gt, 10000, 25);
  const auto t0 = std::chrono::steady_clock::now();
  for (Index r = 0; r < test.rows(); ++r)
    CHECK(std::isfinite(zibt_loglik(m, test.row(r).transpose(), static_cast<std::uint64_t>(r))));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(secs < 10.0);
}
