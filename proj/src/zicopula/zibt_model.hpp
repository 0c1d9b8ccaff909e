#pragma once

#include "zicopula/marginals.hpp"
#include "zicopula/rgd_copula.hpp"
#include "zicopula/stat_core.hpp"

#include <cstdint>

namespace zicopula {

enum class LikelihoodMode
{
  Exact,
  Approx
};

struct ZibtFitOptions
{
  bool use_mle = true;
  bool use_rescale = true;
  MarginalFitOptions marginal;
  LikelihoodMode mode = LikelihoodMode::Approx;
  std::size_t mc_samples = kDefaultMcSamples;
  std::uint64_t seed = 0;
};

//! Zero-inflated marginals tied together by a rectified Gaussian copula.
struct ZibtModel
{
  std::vector<MarginalModel> marginals;
  RgdParams copula;
  LikelihoodMode mode = LikelihoodMode::Approx;
  std::size_t mc_samples = kDefaultMcSamples;
  std::uint64_t seed = 0;

  Index dim() const { return copula.sigma.dim(); }
};

//! omega matrix (zeros mapped to a_i) of already rescaled data.
OmegaData omega_matrix(const Matrix& scaled, const std::vector<MarginalModel>& marginals);

ZibtModel fit_zibt(const Matrix& data, const ZibtFitOptions& opts);

//! Mixed log-density of one row. row_index feeds the Monte-Carlo seed of the
//! exact mode so that scoring is reproducible row by row.
double zibt_loglik(const ZibtModel& model, const Vector& x, std::uint64_t row_index = 0);

PatternProbability zero_pattern_prob(const ZibtModel& model,
                                     const ZeroPattern& pattern,
                                     std::size_t mc_samples,
                                     std::uint64_t seed);

} // namespace zicopula
