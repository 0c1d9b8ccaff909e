#include "zicopula/zicar_model.hpp"

#include "zicopula/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace zicopula {

namespace {

void check_fit_input(const Matrix& data)
{
  if (data.rows() < kMinFitRows)
    throw DataError("fit: need at least 50 rows");
  if (data.cols() < 1)
    throw DataError("fit: need at least one column");
  if (!data.allFinite() || (data.array() < 0.0).any())
    throw DataError("fit: data must be finite and nonnegative");
}

double pearson_subset(const std::vector<double>& x, const std::vector<double>& y)
{
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

CorrelationMatrix sigma_positive_pairs(const Matrix& scaled,
                                       const std::vector<MarginalModel>& marginals,
                                       std::vector<std::string>* warnings)
{
  const Index n = scaled.rows();
  const Index d = scaled.cols();
  Matrix w = Matrix::Zero(n, d);
  for (Index j = 0; j < d; ++j)
    for (Index r = 0; r < n; ++r)
      if (scaled(r, j) > 0.0)
        w(r, j) = positive_omega(marginals[static_cast<std::size_t>(j)], scaled(r, j));

  Matrix raw = Matrix::Identity(d, d);
  std::vector<double> xi, xj;
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      xi.clear();
      xj.clear();
      for (Index r = 0; r < n; ++r) {
        if (scaled(r, i) > 0.0 && scaled(r, j) > 0.0) {
          xi.push_back(w(r, i));
          xj.push_back(w(r, j));
        }
      }
      if (static_cast<Index>(xi.size()) < kMinPairRows) {
        if (warnings) {
          std::ostringstream os;
          os << "pair (x" << i + 1 << ", x" << j + 1 << ") has " << xi.size()
             << " jointly positive rows; correlation set to 0";
          warnings->push_back(os.str());
        }
        continue;
      }
      raw(i, j) = raw(j, i) = std::clamp(pearson_subset(xi, xj), -kRhoBound, kRhoBound);
    }
  }
  return repair_correlation(raw);
}

CorrelationMatrix sigma_all_rows(const Matrix& data)
{
  const Index n = data.rows();
  const Index d = data.cols();
  Matrix w(n, d);
  for (Index j = 0; j < d; ++j)
    w.col(j) = ecdf_pseudo_obs(data.col(j)).unaryExpr(&std_normal_quantile);
  Matrix raw = Matrix::Identity(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = i + 1; j < d; ++j) {
      const std::vector<double> xi(w.col(i).begin(), w.col(i).end());
      const std::vector<double> xj(w.col(j).begin(), w.col(j).end());
      raw(i, j) = raw(j, i) = std::clamp(pearson_subset(xi, xj), -kRhoBound, kRhoBound);
    }
  }
  return repair_correlation(raw);
}

} // namespace

Vector ecdf_pseudo_obs(const Vector& column)
{
  const Index n = column.size();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{ 0 });
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return column(a) < column(b); });
  Vector u(n);
  Index k = 0;
  while (k < n) {
    Index e = k;
    while (e + 1 < n && column(order[static_cast<std::size_t>(e + 1)]) == column(order[static_cast<std::size_t>(k)]))
      ++e;
    const double rank = static_cast<double>(e + 1);
    for (Index t = k; t <= e; ++t)
      u(order[static_cast<std::size_t>(t)]) = rank / static_cast<double>(n + 1);
    k = e + 1;
  }
  return u;
}

ZicarModel fit_zicar(const Matrix& data, const ZicarFitOptions& opts, std::vector<std::string>* warnings)
{
  check_fit_input(data);
  ZicarModel model;
  model.marginals = fit_marginals(data, opts.use_rescale, opts.marginal);
  const Matrix scaled = apply_rescale(data, model.marginals);

  const BoolMatrix masks = binarize(data);
  if (opts.mask == MaskKind::Rbm)
    model.mask = fit_rbm(masks, opts.rbm);
  else
    model.mask = fit_bernoulli(masks);

  model.sigma = opts.use_mle ? sigma_positive_pairs(scaled, model.marginals, warnings) : sigma_all_rows(data);
  return model;
}

double zicar_loglik(const ZicarModel& model, const Vector& x)
{
  const Index d = model.dim();
  if (x.size() != d)
    throw DataError("zicar_loglik: row has wrong dimension");
  if (!x.allFinite() || (x.array() < 0.0).any())
    throw DataError("zicar_loglik: values must be finite and nonnegative");

  const ZeroPattern pattern = ZeroPattern::from_row(x);
  double ll = mask_logprob(model.mask, pattern);
  const IndexSet& pos = pattern.positives();
  if (pos.empty())
    return ll;

  Vector w(static_cast<Index>(pos.size()));
  for (std::size_t k = 0; k < pos.size(); ++k) {
    const MarginalModel& m = model.marginals[static_cast<std::size_t>(pos[k])];
    const double xs = x(pos[k]) / m.rescale_b();
    ll += log_positive_pdf(m, xs);
    w(static_cast<Index>(k)) = positive_omega(m, xs);
  }
  ll += mvn_logpdf(w, model.sigma.sub(pos));
  for (Index k = 0; k < w.size(); ++k)
    ll -= std_normal_logpdf(w(k));
  return ll;
}

} // namespace zicopula
