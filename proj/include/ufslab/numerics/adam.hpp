#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ufslab/numerics/tensor.hpp"

namespace ufslab::numerics {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// lr 1e-4, beta1 0, beta2 0.9: the usual WGAN-GP optimizer settings.
  static AdamConfig gan_default() { return {1e-4, 0.0, 0.9, 1e-8}; }
};

/// Adam with bias correction. Moments are kept per parameter tensor.
class AdamState {
 public:
  AdamState() = default;
  AdamState(AdamConfig config, std::span<const Tensor* const> params);

  const AdamConfig& config() const noexcept { return config_; }
  std::uint64_t step_count() const noexcept { return steps_; }
  const std::vector<Tensor>& first_moments() const noexcept { return m_; }
  const std::vector<Tensor>& second_moments() const noexcept { return v_; }

  /// Restores moments and step count, e.g. from a checkpoint.
  void restore(std::vector<Tensor> m, std::vector<Tensor> v, std::uint64_t steps);

  friend void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads);

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t steps_ = 0;
};

/// One in-place Adam update of `params` with `grads` (same order and shapes).
void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads);

}  // namespace ufslab::numerics
