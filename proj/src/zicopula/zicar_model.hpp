#pragma once

#include "zicopula/marginals.hpp"
#include "zicopula/mask_model.hpp"
#include "zicopula/stat_core.hpp"

#include <string>
#include <vector>

namespace zicopula {

enum class MaskKind
{
  Bernoulli,
  Rbm
};

struct ZicarFitOptions
{
  MaskKind mask = MaskKind::Rbm;
  bool use_mle = true;
  bool use_rescale = true;
  MarginalFitOptions marginal;
  RbmTrainOptions rbm;
};

//! Mask distribution times a Gaussian-copula density of the positive block.
struct ZicarModel
{
  std::vector<MarginalModel> marginals;
  MaskModel mask;
  CorrelationMatrix sigma;

  Index dim() const { return sigma.dim(); }
};

inline constexpr Index kMinFitRows = 50;
inline constexpr Index kMinPairRows = 10;

//! warnings, when given, collects non-fatal notes (sparse pairs set to 0).
ZicarModel fit_zicar(const Matrix& data,
                     const ZicarFitOptions& opts,
                     std::vector<std::string>* warnings = nullptr);

//! log q_S + sum_S log g_i(x_i / b_i) + Gaussian copula on sigma_S.
double zicar_loglik(const ZicarModel& model, const Vector& x);

//! Pseudo-observations rank/(N+1) with ties given the largest rank.
Vector ecdf_pseudo_obs(const Vector& column);

} // namespace zicopula
