#include "doctest.h"
#include "oracles.hpp"

#include "zicopula/error.hpp"
#include "zicopula/synth_bench.hpp"

#include <cmath>

using namespace zicopula;

TEST_CASE("ground truth parameters")
{
  for (auto kind : { DataKind::Zicar, DataKind::Zibt })
    for (Index d : { 2, 5, 8 }) {
      const auto gt = make_ground_truth(kind, d, 40 + d);
      CHECK(gt.dim() == d);
      CHECK((gt.sigma.matrix().diagonal().array() == 1.0).all());
      CHECK(min_eigenvalue(gt.sigma.matrix()) > 0.0);
      for (const auto& h : gt.maps) {
        CHECK(h.weights.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((h.slopes.array() > 0).all());
        CHECK((h.slopes.array() < 2).all());
        CHECK((h.offsets.array() > -5).all());
        CHECK((h.offsets.array() < 5).all());
      }
      if (kind == DataKind::Zibt) {
        CHECK((gt.q.array() > 0).all());
        CHECK((gt.q.array() < 0.5).all());
        for (Index j = 0; j < d; ++j)
          CHECK(oracle::cdf(gt.a(j)) == doctest::Approx(gt.q(j)).epsilon(1e-9));
      } else {
        CHECK(gt.rbm.n_visible() == d);
        CHECK(gt.rbm.n_hidden() == std::max<Index>(1, std::lround(std::pow(2.0, d / 2.0))));
      }
    }
}

TEST_CASE("sigmoid mixture")
{
  SigmoidMixture h{ Vector::Constant(2, 0.5), Vector::Constant(2, 1.0), Vector::Zero(2) };
  CHECK(h(0.0) == doctest::Approx(0.5));
  double prev = 0.0;
  for (double x = -30; x < 30; x += 0.1) {
    const double y = h(x);
    CHECK(y > prev);
    CHECK(y < 1.0);
    prev = y;
  }
}

TEST_CASE("sampling")
{
  SUBCASE("zibt zero rates match the thresholds")
  {
    const auto gt = make_ground_truth(DataKind::Zibt, 4, 1);
    const Index n = 10000;
    const Matrix x = sample_dataset(gt, n, 2);
    for (Index j = 0; j < 4; ++j) {
      const double f = (x.col(j).array() == 0.0).cast<double>().mean();
      const double p = oracle::cdf(gt.a(j));
      CHECK(std::abs(f - p) <= 3 * std::sqrt(p * (1 - p) / n));
    }
  }
  SUBCASE("zicar pattern frequencies follow the RBM")
  {
    const auto gt = make_ground_truth(DataKind::Zicar, 3, 3);
    const Index n = 20000;
    const Matrix x = sample_dataset(gt, n, 4);
    const auto probs = gt.rbm.state_probabilities();
    std::vector<double> freq(8, 0.0);
    for (Index r = 0; r < n; ++r) {
      std::size_t s = 0;
      for (Index i = 0; i < 3; ++i)
        if (x(r, i) > 0)
          s |= std::size_t{ 1 } << i;
      freq[s] += 1.0 / n;
    }
    for (std::size_t s = 0; s < 8; ++s)
      CHECK(std::abs(freq[s] - probs[s]) <= 4 * std::sqrt(probs[s] * (1 - probs[s]) / n) + 1e-12);
  }
  SUBCASE("all-ones mask leaves no zeros")
  {
    auto gt = make_ground_truth(DataKind::Zicar, 3, 5);
    gt.rbm = RbmMask(Matrix::Zero(3, 1), Vector::Constant(3, 60.0), Vector::Zero(1));
    CHECK((sample_dataset(gt, 500, 6).array() > 0.0).all());
  }
  SUBCASE("nonnegative and reproducible")
  {
    for (auto kind : { DataKind::Zicar, DataKind::Zibt }) {
      const auto gt = make_ground_truth(kind, 5, 7);
      const Matrix a = sample_dataset(gt, 300, 8);
      CHECK((a.array() >= 0.0).all());
      CHECK(a == sample_dataset(make_ground_truth(kind, 5, 7), 300, 8));
      CHECK(a != sample_dataset(gt, 300, 9));
    }
  }
  CHECK_THROWS(make_ground_truth(DataKind::Zibt, 1, 0));
}

TEST_CASE("corruption")
{
  const auto gt = make_ground_truth(DataKind::Zibt, 3, 11);
  const Matrix train = sample_dataset(gt, 2000, 12);
  const Matrix rows = sample_dataset(gt, 10000, 13);
  const Matrix bad = corrupt(rows, train, 14);
  CHECK(((rows.array() == 0.0) == (bad.array() == 0.0)).all());
  for (Index j = 0; j < 3; ++j) {
    std::vector<double> pos;
    for (Index r = 0; r < train.rows(); ++r)
      if (train(r, j) > 0)
        pos.push_back(train(r, j));
    std::sort(pos.begin(), pos.end());
    // type-7 percentiles
    auto pct = [&](double p) {
      const double h = (pos.size() - 1) * p;
      const auto lo = static_cast<std::size_t>(std::floor(h));
      return pos[lo] + (h - lo) * (pos[std::min(lo + 1, pos.size() - 1)] - pos[lo]);
    };
    const double m = pct(0.01), mx = pct(0.99);
    std::vector<double> o, c;
    for (Index r = 0; r < rows.rows(); ++r)
      if (rows(r, j) > 0) {
        CHECK(bad(r, j) >= m);
        CHECK(bad(r, j) <= mx);
        o.push_back(rows(r, j));
        c.push_back(bad(r, j));
      }
    const Vector ov = Eigen::Map<Vector>(o.data(), static_cast<Index>(o.size()));
    const Vector cv = Eigen::Map<Vector>(c.data(), static_cast<Index>(c.size()));
    const Vector od = ov.array() - ov.mean(), cd = cv.array() - cv.mean();
    CHECK(std::abs(od.dot(cd) / std::sqrt(od.squaredNorm() * cd.squaredNorm())) <= 0.05);
  }
  CHECK((corrupt(Matrix::Zero(1, 3), train, 1).array() == 0.0).all());
  Matrix thin = train;
  thin.col(1).setZero();
  thin(0, 1) = 1.0;
  CHECK_THROWS_AS(corrupt(rows, thin, 1), DataError);
}

TEST_CASE("auc")
{
  CHECK(auc({ 1, 2, 3 }, { 4, 5, 6 }) == 1.0);
  CHECK(auc({ 4, 5, 6 }, { 1, 2, 3 }) == 0.0);
  CHECK(auc({ 2, 2, 2 }, { 2, 2, 2 }) == 0.5);

  // exhaustive pair counting
  auto pairs = [](const std::vector<double>& n, const std::vector<double>& a) {
    double s = 0.0;
    for (double x : n)
      for (double y : a)
        s += y > x ? 1.0 : (y == x ? 0.5 : 0.0);
    return s / (n.size() * a.size());
  };
  CHECK(auc({ 1, 2, 3 }, { 2, 3, 4 }) == doctest::Approx(7.0 / 9.0).epsilon(1e-15));
  Rng rng(5);
  std::vector<double> n(5000), a(5000);
  for (auto& v : n)
    v = std::round(rng.normal() * 4) / 4;
  for (auto& v : a)
    v = std::round(rng.normal() * 4) / 4;
  const double r = auc(n, a);
  CHECK(r == doctest::Approx(pairs(n, a)).epsilon(1e-12));
  CHECK(std::abs(r - 0.5) <= 0.02);
  CHECK_THROWS(auc({}, { 1.0 }));
}

TEST_CASE("sigma error")
{
  const auto s = CorrelationMatrix::identity(3);
  CHECK(sigma_l2_error(s, s) == 0.0);
  Matrix m(2, 2);
  m << 1, 0.1, 0.1, 1;
  CHECK(sigma_l2_error(CorrelationMatrix::from_matrix(m), CorrelationMatrix::identity(2)) ==
        doctest::Approx(std::sqrt(0.02)).epsilon(1e-15));
  Rng rng(3);
  const auto x = random_correlation(4, rng), y = random_correlation(4, rng);
  double acc = 0.0;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      acc += (x(i, j) - y(i, j)) * (x(i, j) - y(i, j));
  CHECK(sigma_l2_error(x, y) == doctest::Approx(std::sqrt(acc)).epsilon(1e-14));
  CHECK_THROWS(sigma_l2_error(x, s));
}
