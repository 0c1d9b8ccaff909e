#include "zicopula/zibt_model.hpp"

#include "zicopula/error.hpp"
#include "zicopula/rng.hpp"
#include "zicopula/zicar_model.hpp"

#include <cmath>

namespace zicopula {

namespace {

// Threshold used when a column never had zeros in training but a scored row does.
const double kUnseenZeroThreshold = std_normal_quantile(kProbFloor);

} // namespace

OmegaData omega_matrix(const Matrix& scaled, const std::vector<MarginalModel>& marginals)
{
  OmegaData out;
  out.omega.resize(scaled.rows(), scaled.cols());
  out.rectified = (scaled.array() == 0.0);
  for (Index j = 0; j < scaled.cols(); ++j) {
    const MarginalModel& m = marginals[static_cast<std::size_t>(j)];
    for (Index r = 0; r < scaled.rows(); ++r)
      out.omega(r, j) = omega_transform(m, scaled(r, j));
  }
  return out;
}

ZibtModel fit_zibt(const Matrix& data, const ZibtFitOptions& opts)
{
  if (data.rows() < kMinFitRows)
    throw DataError("fit: need at least 50 rows");
  if (data.cols() < 1)
    throw DataError("fit: need at least one column");
  if (!data.allFinite() || (data.array() < 0.0).any())
    throw DataError("fit: data must be finite and nonnegative");

  ZibtModel model;
  model.marginals = fit_marginals(data, opts.use_rescale, opts.marginal);
  const Matrix scaled = apply_rescale(data, model.marginals);

  Vector a(data.cols());
  for (Index j = 0; j < data.cols(); ++j)
    a(j) = model.marginals[static_cast<std::size_t>(j)].a();

  const OmegaData om = omega_matrix(scaled, model.marginals);
  model.copula = RgdParams(assemble_sigma(om, a, opts.use_mle), a);
  model.mode = opts.mode;
  model.mc_samples = opts.mc_samples;
  model.seed = opts.seed;
  return model;
}

double zibt_loglik(const ZibtModel& model, const Vector& x, std::uint64_t row_index)
{
  const Index d = model.dim();
  if (x.size() != d)
    throw DataError("zibt_loglik: row has wrong dimension");
  if (!x.allFinite() || (x.array() < 0.0).any())
    throw DataError("zibt_loglik: values must be finite and nonnegative");

  const ZeroPattern pattern = ZeroPattern::from_row(x);
  Vector a = model.copula.a;
  Vector omega(d);
  double ll = 0.0;
  for (Index i = 0; i < d; ++i) {
    const MarginalModel& m = model.marginals[static_cast<std::size_t>(i)];
    if (pattern.is_zero(i)) {
      if (m.q() > 0.0) {
        ll += std::log(m.q());
      } else {
        a(i) = kUnseenZeroThreshold;
        ll += std::log(kProbFloor);
      }
      omega(i) = a(i);
    } else {
      const double xs = x(i) / m.rescale_b();
      ll += std::log1p(-m.q()) + log_positive_pdf(m, xs);
      omega(i) = omega_transform(m, xs);
    }
  }

  const RgdParams params(model.copula.sigma, std::move(a));
  if (model.mode == LikelihoodMode::Approx)
    return ll + copula_logdensity_approx(params, omega, pattern);
  return ll + copula_logdensity_exact(params, omega, pattern, model.mc_samples,
                                      derive_seed(model.seed, row_index));
}

PatternProbability zero_pattern_prob(const ZibtModel& model,
                                     const ZeroPattern& pattern,
                                     std::size_t mc_samples,
                                     std::uint64_t seed)
{
  return zero_pattern_logprob(model.copula, pattern, mc_samples, seed);
}

} // namespace zicopula
