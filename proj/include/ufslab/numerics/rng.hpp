#pragma once

#include <cstdint>
#include <random>

#include "ufslab/numerics/tensor.hpp"

namespace ufslab::numerics {

/// Deterministic random stream: equal seeds and equal call sequences yield
/// equal outputs.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  double uniform() { return uniform_(engine_); }
  double normal() { return normal_(engine_); }
  std::uint64_t next_u64() { return engine_(); }
  /// Uniform integer in [0, n).
  std::size_t uniform_index(std::size_t n);

  /// Independent child stream derived from this stream's seed and a tag.
  SeededRng derive(std::uint64_t tag) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// i.i.d. N(mean, std^2) draws. std = 0 gives a constant tensor.
Tensor gaussian_sample(SeededRng& rng, const Shape& shape, double mean = 0.0, double std = 1.0);
/// i.i.d. Uniform(low, high) draws.
Tensor uniform_sample(SeededRng& rng, const Shape& shape, double low = 0.0, double high = 1.0);

}  // namespace ufslab::numerics
