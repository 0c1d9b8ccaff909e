#include "zicopula/mask_model.hpp"

#include "zicopula/error.hpp"
#include "zicopula/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace zicopula {

namespace {

double softplus(double x)
{
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x)
{
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

void check_visible_count(Index d)
{
  if (d > RbmMask::kMaxRbmVisible)
    throw UsageError("exact normalization out of scope (more than 20 visible units)");
}

// Enumerates all visible states in Gray-code order and calls fn(state, -F(v)).
template<class Fn>
void for_each_state(const RbmMask& rbm, Fn&& fn)
{
  const Index d = rbm.n_visible();
  const std::uint64_t count = std::uint64_t{ 1 } << d;
  Vector act = rbm.hidden_bias();
  double vis = 0.0;
  std::uint64_t state = 0;
  auto neg_free = [&] {
    double s = vis;
    for (Index k = 0; k < act.size(); ++k)
      s += softplus(act(k));
    return s;
  };
  fn(state, neg_free());
  for (std::uint64_t g = 1; g < count; ++g) {
    const auto bit = static_cast<Index>(std::countr_zero(g));
    const bool on = ((state >> bit) & 1U) == 0;
    state ^= (std::uint64_t{ 1 } << bit);
    const double sign = on ? 1.0 : -1.0;
    act += sign * rbm.weights().row(bit).transpose();
    vis += sign * rbm.visible_bias()(bit);
    fn(state, neg_free());
  }
}

Vector pattern_to_visible(const ZeroPattern& p)
{
  Vector v(p.dim());
  for (Index i = 0; i < p.dim(); ++i)
    v(i) = p.is_zero(i) ? 0.0 : 1.0;
  return v;
}

} // namespace

RbmMask::RbmMask(Matrix weights, Vector visible_bias, Vector hidden_bias)
  : weights_(std::move(weights))
  , visible_bias_(std::move(visible_bias))
  , hidden_bias_(std::move(hidden_bias))
{
  if (visible_bias_.size() != weights_.rows() || hidden_bias_.size() != weights_.cols())
    throw DataError("RBM: parameter dimensions disagree");
  if (weights_.rows() < 1 || weights_.cols() < 1)
    throw DataError("RBM: needs at least one visible and one hidden unit");
  if (!weights_.allFinite() || !visible_bias_.allFinite() || !hidden_bias_.allFinite())
    throw DataError("RBM: parameters must be finite");
  check_visible_count(weights_.rows());

  double m = -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for_each_state(*this, [&](std::uint64_t, double nf) {
    if (nf > m) {
      acc = acc * std::exp(m - nf) + 1.0;
      m = nf;
    } else {
      acc += std::exp(nf - m);
    }
  });
  log_z_ = m + std::log(acc);
}

double RbmMask::free_energy(const Vector& v) const
{
  if (v.size() != n_visible())
    throw DataError("RBM: visible vector has wrong length");
  const Vector act = hidden_bias_ + weights_.transpose() * v;
  double f = -visible_bias_.dot(v);
  for (Index k = 0; k < act.size(); ++k)
    f -= softplus(act(k));
  return f;
}

double RbmMask::log_prob(const Vector& v) const
{
  return -free_energy(v) - log_z_;
}

std::vector<double> RbmMask::state_probabilities() const
{
  std::vector<double> p(std::size_t{ 1 } << n_visible());
  for_each_state(*this, [&](std::uint64_t s, double nf) { p[s] = std::exp(nf - log_z_); });
  return p;
}

BoolMatrix binarize(const Matrix& data)
{
  return (data.array() > 0.0);
}

BernoulliMask fit_bernoulli(const BoolMatrix& masks)
{
  if (masks.rows() == 0 || masks.cols() == 0)
    throw DataError("fit_bernoulli: empty mask matrix");
  BernoulliMask out;
  out.q.resize(masks.cols());
  for (Index j = 0; j < masks.cols(); ++j)
    out.q(j) = static_cast<double>(masks.rows() - masks.col(j).count()) / static_cast<double>(masks.rows());
  return out;
}

RbmMask fit_rbm(const BoolMatrix& masks, const RbmTrainOptions& opts, std::vector<double>* loss_history)
{
  const Index n = masks.rows();
  const Index d = masks.cols();
  if (n == 0 || d == 0)
    throw DataError("fit_rbm: empty mask matrix");
  check_visible_count(d);
  const Index h = opts.n_hidden > 0 ? opts.n_hidden : 2 * d;
  if (opts.epochs < 0 || !(opts.learning_rate > 0.0) || opts.batch_size < 1)
    throw UsageError("fit_rbm: epochs, learning rate and batch size must be positive");

  const Matrix data = masks.cast<double>().matrix();
  Rng rng(opts.seed);
  Rng loss_rng(derive_seed(opts.seed, 1));

  Matrix w(d, h);
  for (Index i = 0; i < d; ++i)
    for (Index k = 0; k < h; ++k)
      w(i, k) = rng.normal(0.0, 0.01);
  Vector b(d);
  for (Index i = 0; i < d; ++i) {
    const double p = std::clamp(data.col(i).mean(), 1e-3, 1.0 - 1e-3);
    b(i) = std::log(p / (1.0 - p));
  }
  Vector c = Vector::Zero(h);

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{ 0 });
  const double lr = opts.learning_rate;

  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng.engine());
    for (Index start = 0; start < n; start += opts.batch_size) {
      const Index m = std::min(opts.batch_size, n - start);
      Matrix v0(m, d);
      for (Index r = 0; r < m; ++r)
        v0.row(r) = data.row(order[static_cast<std::size_t>(start + r)]);

      Matrix ph0 = (v0 * w).rowwise() + c.transpose();
      ph0 = ph0.unaryExpr(&sigmoid);
      Matrix h0(m, h);
      for (Index r = 0; r < m; ++r)
        for (Index k = 0; k < h; ++k)
          h0(r, k) = rng.bernoulli(ph0(r, k)) ? 1.0 : 0.0;

      Matrix pv1 = (h0 * w.transpose()).rowwise() + b.transpose();
      pv1 = pv1.unaryExpr(&sigmoid);
      Matrix v1(m, d);
      for (Index r = 0; r < m; ++r)
        for (Index i = 0; i < d; ++i)
          v1(r, i) = rng.bernoulli(pv1(r, i)) ? 1.0 : 0.0;

      Matrix ph1 = (v1 * w).rowwise() + c.transpose();
      ph1 = ph1.unaryExpr(&sigmoid);

      const double scale = lr / static_cast<double>(m);
      w += scale * (v0.transpose() * ph0 - v1.transpose() * ph1);
      b += scale * (v0 - v1).colwise().sum().transpose();
      c += scale * (ph0 - ph1).colwise().sum().transpose();
    }

    if (loss_history) {
      // Stochastic pseudo-likelihood: flip one random bit per row.
      double loss = 0.0;
      Vector v(d);
      for (Index r = 0; r < n; ++r) {
        v = data.row(r).transpose();
        const Vector act = c + w.transpose() * v;
        double f = -b.dot(v);
        for (Index k = 0; k < h; ++k)
          f -= softplus(act(k));
        const Index bit = static_cast<Index>(loss_rng.index(static_cast<std::size_t>(d)));
        const double sign = v(bit) > 0.5 ? -1.0 : 1.0;
        const Vector act_f = act + sign * w.row(bit).transpose();
        double f_flip = -b.dot(v) - sign * b(bit);
        for (Index k = 0; k < h; ++k)
          f_flip -= softplus(act_f(k));
        // log sigmoid(F(flip) - F(v))
        loss -= static_cast<double>(d) * -softplus(f - f_flip);
      }
      loss_history->push_back(loss / static_cast<double>(n));
    }
  }

  if (!w.allFinite() || !b.allFinite() || !c.allFinite())
    throw NumericError("fit_rbm: training diverged (non-finite parameters)");
  return RbmMask(std::move(w), std::move(b), std::move(c));
}

double mask_logprob(const MaskModel& model, const ZeroPattern& pattern)
{
  const double floor = std::log(kProbFloor);
  if (const auto* bern = std::get_if<BernoulliMask>(&model)) {
    if (bern->q.size() != pattern.dim())
      throw DataError("mask_logprob: pattern dimension mismatch");
    double lp = 0.0;
    for (Index i = 0; i < pattern.dim(); ++i) {
      const double p = pattern.is_zero(i) ? bern->q(i) : 1.0 - bern->q(i);
      if (!(p > 0.0))
        return floor;
      lp += std::log(p);
    }
    return std::max(lp, floor);
  }
  const auto& rbm = std::get<RbmMask>(model);
  if (rbm.n_visible() != pattern.dim())
    throw DataError("mask_logprob: pattern dimension mismatch");
  return std::max(rbm.log_prob(pattern_to_visible(pattern)), floor);
}

double mask_zero_rate(const MaskModel& model, Index i)
{
  if (const auto* bern = std::get_if<BernoulliMask>(&model))
    return bern->q(i);
  const auto& rbm = std::get<RbmMask>(model);
  const auto probs = rbm.state_probabilities();
  double q = 0.0;
  for (std::size_t s = 0; s < probs.size(); ++s)
    if (((s >> i) & 1U) == 0)
      q += probs[s];
  return q;
}

} // namespace zicopula
