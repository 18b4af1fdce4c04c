#include "ufslab/numerics/rng.hpp"

#include <cmath>

#include "ufslab/errors.hpp"

namespace ufslab::numerics {

std::size_t SeededRng::uniform_index(std::size_t n) {
  if (n == 0) throw ContractError("uniform_index needs n > 0");
  std::uniform_int_distribution<std::size_t> dist(0, n - 1);
  return dist(engine_);
}

SeededRng SeededRng::derive(std::uint64_t tag) const {
  // splitmix64 finalizer over (seed, tag)
  std::uint64_t z = seed_ + 0x9E3779B97F4A7C15ULL * (tag + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return SeededRng(z ^ (z >> 31));
}

Tensor gaussian_sample(SeededRng& rng, const Shape& shape, double mean, double std) {
  if (!(std >= 0.0) || !std::isfinite(std) || !std::isfinite(mean)) {
    throw ContractError("gaussian_sample: std must be finite and >= 0, got " + std::to_string(std));
  }
  Tensor out(shape, mean);
  if (std == 0.0) return out;
  for (double& v : out.values()) v = mean + std * rng.normal();
  return out;
}

Tensor uniform_sample(SeededRng& rng, const Shape& shape, double low, double high) {
  if (!(low <= high)) throw ContractError("uniform_sample: low must not exceed high");
  Tensor out(shape);
  for (double& v : out.values()) v = low + (high - low) * rng.uniform();
  return out;
}

}  // namespace ufslab::numerics
