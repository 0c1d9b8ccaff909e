#include "zicopula/marginals.hpp"

#include "zicopula/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace zicopula {

namespace {

// Kernel contributions beyond this many bandwidths are below 1e-22.
constexpr double kWindow = 10.0;

double quantile_sorted(const std::vector<double>& sorted, double p)
{
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double fallback_bandwidth(const std::vector<double>& sorted)
{
  return 1e-3 * std::max(sorted.back(), 1e-12);
}

// Sum of direct and reflected kernel values at x, unnormalized.
double kernel_sum(const MarginalModel& m, double x)
{
  const auto& c = m.centers();
  const double h = m.bandwidth();
  double sum = 0.0;
  auto lo = std::lower_bound(c.begin(), c.end(), x - kWindow * h);
  auto hi = std::upper_bound(lo, c.end(), x + kWindow * h);
  for (auto it = lo; it != hi; ++it)
    sum += std_normal_pdf((x - *it) / h);
  auto refl_end = std::lower_bound(c.begin(), c.end(), kWindow * h - x);
  for (auto it = c.begin(); it != refl_end; ++it)
    sum += std_normal_pdf((x + *it) / h);
  return sum;
}

} // namespace

MarginalModel::MarginalModel(double q, std::vector<double> centers, double bandwidth, double rescale_b)
  : q_(q)
  , centers_(std::move(centers))
  , bandwidth_(bandwidth)
  , rescale_b_(rescale_b)
{
  if (!(q_ >= 0.0 && q_ < 1.0))
    throw DataError("marginal: zero rate must lie in [0, 1)");
  if (centers_.empty())
    throw DataError("marginal: no kernel centers");
  std::sort(centers_.begin(), centers_.end());
  if (!(centers_.front() > 0.0) || !std::isfinite(centers_.back()))
    throw DataError("marginal: kernel centers must be finite and positive");
  if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
    throw DataError("marginal: bandwidth must be positive");
  if (!(rescale_b_ > 0.0) || !std::isfinite(rescale_b_))
    throw DataError("marginal: rescale factor must be positive");
  a_ = q_ > 0.0 ? std_normal_quantile(q_) : -std::numeric_limits<double>::infinity();
}

MarginalModel MarginalModel::with_rescale(double b) const
{
  MarginalModel out = *this;
  if (!(b > 0.0) || !std::isfinite(b))
    throw NumericError("marginal: rescale factor must be positive");
  out.rescale_b_ = b;
  return out;
}

double silverman_bandwidth(std::span<const double> values)
{
  std::vector<double> v(values.begin(), values.end());
  if (v.size() < 2)
    throw DataError("bandwidth needs at least 2 values");
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v)
    ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const double iqr = (quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25)) / 1.34;
  double spread = std::min(sd, iqr);
  if (!(spread > 0.0))
    spread = std::max(sd, iqr);
  if (!(spread > 0.0))
    return fallback_bandwidth(v);
  return 0.9 * spread * std::pow(n, -0.2);
}

MarginalModel fit_marginal(std::span<const double> column, const MarginalFitOptions& opts)
{
  if (column.empty())
    throw DataError("fit_marginal: empty column");
  std::vector<double> positives;
  std::size_t zeros = 0;
  for (double x : column) {
    if (!std::isfinite(x) || x < 0.0)
      throw DataError("fit_marginal: values must be finite and nonnegative");
    if (x == 0.0)
      ++zeros;
    else
      positives.push_back(x);
  }
  if (positives.empty())
    throw DataError("fit_marginal: degenerate variable (all values are zero)");
  if (positives.size() < 2)
    throw DataError("fit_marginal: fewer than 2 positive values");

  std::sort(positives.begin(), positives.end());
  double h = opts.bandwidth > 0.0 ? opts.bandwidth
                                  : opts.bandwidth_multiplier * silverman_bandwidth(positives);
  if (!(h > 0.0) || !std::isfinite(h))
    h = fallback_bandwidth(positives);
  const double q = static_cast<double>(zeros) / static_cast<double>(column.size());
  return MarginalModel(q, std::move(positives), h, 1.0);
}

double positive_pdf(const MarginalModel& m, double x)
{
  if (!(x > 0.0))
    throw DomainError("positive_pdf: x must be > 0");
  const double n = static_cast<double>(m.centers().size());
  return kernel_sum(m, x) / (n * m.bandwidth());
}

double log_positive_pdf(const MarginalModel& m, double x)
{
  if (!(x > 0.0))
    throw DomainError("log_positive_pdf: x must be > 0");
  const double n = static_cast<double>(m.centers().size());
  const double h = m.bandwidth();
  const double s = kernel_sum(m, x);
  if (s > 1e-280)
    return std::log(s) - std::log(n * h);
  // Outside every kernel window: the nearest center dominates.
  const auto& c = m.centers();
  auto it = std::lower_bound(c.begin(), c.end(), x);
  double dist = std::numeric_limits<double>::infinity();
  if (it != c.end())
    dist = std::min(dist, *it - x);
  if (it != c.begin())
    dist = std::min(dist, x - *std::prev(it));
  return std_normal_logpdf(dist / h) - std::log(n * h);
}

double positive_cdf(const MarginalModel& m, double x)
{
  if (!(x > 0.0))
    return 0.0;
  const auto& c = m.centers();
  const double h = m.bandwidth();
  const double n = static_cast<double>(c.size());

  auto lo = std::lower_bound(c.begin(), c.end(), x - kWindow * h);
  auto hi = std::upper_bound(lo, c.end(), x + kWindow * h);
  double direct = static_cast<double>(std::distance(c.begin(), lo));
  for (auto it = lo; it != hi; ++it)
    direct += std_normal_cdf((x - *it) / h);

  // reflected part contributes Phi((x + c)/h) - 1 = -Phi(-(x + c)/h)
  double reflected = 0.0;
  auto refl_end = std::lower_bound(c.begin(), c.end(), kWindow * h - x);
  for (auto it = c.begin(); it != refl_end; ++it)
    reflected -= std_normal_cdf(-(x + *it) / h);

  return std::clamp((direct + reflected) / n, 0.0, 1.0);
}

double positive_quantile(const MarginalModel& m, double p)
{
  if (!(p > 0.0 && p < 1.0))
    throw DomainError("positive_quantile: p must lie in (0, 1)");
  double lo = 0.0;
  double hi = m.centers().back() + kWindow * m.bandwidth();
  while (positive_cdf(m, hi) < p)
    hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (positive_cdf(m, mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double marginal_cdf(const MarginalModel& m, double x)
{
  if (x < 0.0)
    throw DomainError("marginal_cdf: x must be >= 0");
  return m.q() + (1.0 - m.q()) * positive_cdf(m, x);
}

double omega_transform(const MarginalModel& m, double x)
{
  if (x < 0.0 || std::isnan(x))
    throw DomainError("omega_transform: x must be >= 0");
  if (x == 0.0)
    return m.a();
  const double u = std::clamp(marginal_cdf(m, x), kCdfClamp, 1.0 - kCdfClamp);
  const double w = std_normal_quantile(u);
  return w > m.a() ? w : std::nextafter(m.a(), std::numeric_limits<double>::infinity());
}

double positive_omega(const MarginalModel& m, double x)
{
  if (!(x > 0.0))
    throw DomainError("positive_omega: x must be > 0");
  return std_normal_quantile(std::clamp(positive_cdf(m, x), kCdfClamp, 1.0 - kCdfClamp));
}

double rescale_factor(const MarginalModel& m, std::span<const double> positives)
{
  if (positives.empty())
    throw DataError("rescale_factor: no positive values");
  double acc = 0.0;
  for (double x : positives)
    acc += log_positive_pdf(m, x);
  return std::exp(-acc / static_cast<double>(positives.size()));
}

std::vector<MarginalModel> fit_marginals(const Matrix& data, bool use_rescale, const MarginalFitOptions& opts)
{
  std::vector<MarginalModel> out;
  out.reserve(static_cast<std::size_t>(data.cols()));
  for (Index j = 0; j < data.cols(); ++j) {
    const Vector col = data.col(j);
    try {
      MarginalModel m = fit_marginal(std::span<const double>(col.data(), col.size()), opts);
      if (use_rescale) {
        const double b = rescale_factor(m, m.centers());
        const Vector scaled = col / b;
        m = fit_marginal(std::span<const double>(scaled.data(), scaled.size()), opts).with_rescale(b);
      }
      out.push_back(std::move(m));
    } catch (const DataError& e) {
      throw DataError("column x" + std::to_string(j + 1) + ": " + e.what());
    }
  }
  return out;
}

Matrix apply_rescale(const Matrix& data, const std::vector<MarginalModel>& marginals)
{
  if (static_cast<std::size_t>(data.cols()) != marginals.size())
    throw DataError("apply_rescale: dimension mismatch");
  Matrix out = data;
  for (Index j = 0; j < data.cols(); ++j)
    out.col(j) /= marginals[static_cast<std::size_t>(j)].rescale_b();
  return out;
}

} // namespace zicopula
