#pragma once

#include "zicopula/rgd_copula.hpp"
#include "zicopula/stat_core.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace zicopula {

//! Independent per-variable zero occurrences.
struct BernoulliMask
{
  Vector q; //!< zero rate of each variable
};

//! Restricted Boltzmann machine over positivity indicators (visible unit i
//! is 1 when x_i > 0). The partition function is computed exactly by
//! enumerating visible states, which caps the dimension at kMaxRbmVisible.
class RbmMask
{
public:
  static constexpr Index kMaxRbmVisible = 20;

  RbmMask() = default;
  //! weights is n_visible x n_hidden. Recomputes log_Z.
  RbmMask(Matrix weights, Vector visible_bias, Vector hidden_bias);

  Index n_visible() const { return weights_.rows(); }
  Index n_hidden() const { return weights_.cols(); }
  const Matrix& weights() const { return weights_; }
  const Vector& visible_bias() const { return visible_bias_; }
  const Vector& hidden_bias() const { return hidden_bias_; }
  double log_z() const { return log_z_; }

  //! F(v) = -b.v - sum_j softplus(c_j + (W^T v)_j)
  double free_energy(const Vector& v) const;
  //! Unclamped log P(v).
  double log_prob(const Vector& v) const;

  //! Probabilities of all 2^D visible states; index bit i is v_i.
  std::vector<double> state_probabilities() const;

private:
  Matrix weights_;
  Vector visible_bias_;
  Vector hidden_bias_;
  double log_z_ = 0.0;
};

using MaskModel = std::variant<BernoulliMask, RbmMask>;

//! Entry true iff the datum is > 0.
BoolMatrix binarize(const Matrix& data);

BernoulliMask fit_bernoulli(const BoolMatrix& masks);

struct RbmTrainOptions
{
  Index n_hidden = 0; //!< 0 means 2 * D
  int epochs = 200;
  double learning_rate = 0.05;
  Index batch_size = 64;
  std::uint64_t seed = 0;
};

//! CD-1 training. loss_history, when given, receives the per-epoch negative
//! pseudo-log-likelihood (single random bit flip per row, scaled by D).
RbmMask fit_rbm(const BoolMatrix& masks,
                const RbmTrainOptions& opts,
                std::vector<double>* loss_history = nullptr);

//! log q_S for the pattern; impossible patterns return log(1e-15).
double mask_logprob(const MaskModel& model, const ZeroPattern& pattern);

//! Marginal zero rate of variable i implied by the mask model.
double mask_zero_rate(const MaskModel& model, Index i);

} // namespace zicopula
