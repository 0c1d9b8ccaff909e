#pragma once

#include "zicopula/baselines.hpp"
#include "zicopula/zibt_model.hpp"
#include "zicopula/zicar_model.hpp"

#include <string>
#include <variant>
#include <vector>

namespace zicopula {

enum class ModelKind
{
  Zicar,
  Zibt,
  Gmm,
  Kde
};

struct FitSpec
{
  ModelKind kind = ModelKind::Zibt;
  ZicarFitOptions zicar;
  ZibtFitOptions zibt;
  Index gmm_k = 0;             //!< 0 = tune on a validation split
  double gmm_reg = 1e-6;
  double kde_multiplier = 0.0; //!< 0 = tune on a validation split
  std::uint64_t seed = 0;
};

struct FittedModel
{
  std::variant<ZicarModel, ZibtModel, GmmModel, KdeModel> model;
  std::vector<std::string> warnings; //!< not persisted

  ModelKind kind() const { return static_cast<ModelKind>(model.index()); }
  Index dim() const;
};

//! Fits the requested model; seeds inside spec.zicar.rbm and spec.zibt are
//! overwritten by streams derived from spec.seed.
FittedModel fit_model(const Matrix& data, const FitSpec& spec);

//! Log-likelihood of one row. row_index only matters for Monte-Carlo terms.
double model_loglik(const FittedModel& m, const Vector& x, std::uint64_t row_index);

//! Negative log-likelihood of every row.
std::vector<double> score_nll(const FittedModel& m, const Matrix& data);

inline constexpr int kModelSchemaVersion = 1;

std::string serialize_model(const FittedModel& m);
FittedModel deserialize_model(const std::string& text);

//! Human-readable fit summary (zero rates, condition number, rescale factors).
std::string model_summary(const FittedModel& m);

const char* model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& s);

} // namespace zicopula
