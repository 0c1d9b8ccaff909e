#pragma once

#include "zicopula/mask_model.hpp"
#include "zicopula/rng.hpp"
#include "zicopula/stat_core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace zicopula {

enum class DataKind
{
  Zicar,
  Zibt
};

//! h(x) = sum_j pi_j sigmoid(b_j (x - c_j)), strictly increasing into (0, 1).
struct SigmoidMixture
{
  Vector weights;
  Vector slopes;
  Vector offsets;

  double operator()(double x) const;
};

struct GroundTruth
{
  DataKind kind = DataKind::Zicar;
  CorrelationMatrix sigma;
  std::vector<SigmoidMixture> maps;
  RbmMask rbm;                                  //!< zicar only
  Vector q;                                     //!< zibt only
  Vector a;                                     //!< zibt only, Phi^-1(q)
  std::vector<std::vector<double>> inverse_maps; //!< zibt only, sorted positive anchors
  std::uint64_t seed = 0;

  Index dim() const { return sigma.dim(); }
};

inline constexpr std::size_t kInverseMapAnchors = 10000;

//! Wishart(D, I) draw (Bartlett) normalized to unit diagonal.
CorrelationMatrix random_correlation(Index dim, Rng& rng);

GroundTruth make_ground_truth(DataKind kind, Index dim, std::uint64_t seed);

Matrix sample_dataset(const GroundTruth& gt, std::size_t n, std::uint64_t seed);

//! Copies of rows with every positive entry replaced by Uniform(p1, p99) of
//! the training positives of its column.
Matrix corrupt(const Matrix& rows, const Matrix& train, std::uint64_t seed);

//! Mann-Whitney AUC; higher scores are meant to flag the abnormal set.
double auc(const std::vector<double>& normal, const std::vector<double>& abnormal);

double sigma_l2_error(const CorrelationMatrix& est, const CorrelationMatrix& truth);

struct BenchResult
{
  std::string model_tag;
  std::string kind; //!< data kind: zicar, zibt or credit
  Index dim = 0;
  std::uint64_t seed = 0;
  double auc = 0.0;
  double sigma_l2_error = 0.0; //!< NaN when the model has no correlation matrix
};

const char* data_kind_name(DataKind kind);
DataKind parse_data_kind(const std::string& s);

} // namespace zicopula
