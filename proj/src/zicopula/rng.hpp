#pragma once

#include <cstdint>
#include <random>

namespace zicopula {

//! splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
  return mix_seed(mix_seed(base) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

//! Caller-owned random stream. Never shared implicitly between callers.
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(mix_seed(seed))
  {}

  double uniform() { return unif_(engine_); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * unif_(engine_); }
  double normal() { return norm_(engine_); }
  double normal(double mean, double sd) { return mean + sd * norm_(engine_); }
  bool bernoulli(double p) { return unif_(engine_) < p; }

  double gamma(double shape)
  {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
  }

  double chi_squared(double dof) { return 2.0 * gamma(0.5 * dof); }

  //! uniform integer in [0, n)
  std::size_t index(std::size_t n)
  {
    std::uniform_int_distribution<std::size_t> d(0, n - 1);
    return d(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

private:
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unif_{ 0.0, 1.0 };
  std::normal_distribution<double> norm_{ 0.0, 1.0 };
};

} // namespace zicopula
