#include "ufslab/numerics/adam.hpp"

#include <cmath>

#include "ufslab/errors.hpp"

namespace ufslab::numerics {

AdamState::AdamState(AdamConfig config, std::span<const Tensor* const> params) : config_(config) {
  if (!(config_.lr > 0.0) || config_.beta1 < 0.0 || config_.beta1 >= 1.0 || config_.beta2 < 0.0 ||
      config_.beta2 >= 1.0 || !(config_.eps > 0.0)) {
    throw ContractError("invalid Adam hyperparameters");
  }
  for (const Tensor* p : params) {
    m_.emplace_back(p->shape());
    v_.emplace_back(p->shape());
  }
}

void AdamState::restore(std::vector<Tensor> m, std::vector<Tensor> v, std::uint64_t steps) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw DimensionError("Adam restore: parameter count mismatch");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].shape() != m_[i].shape() || v[i].shape() != v_[i].shape()) {
      throw DimensionError("Adam restore: moment shape mismatch at parameter " + std::to_string(i));
    }
  }
  m_ = std::move(m);
  v_ = std::move(v);
  steps_ = steps;
}

void adam_step(AdamState& state, std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != state.m_.size() || grads.size() != params.size()) {
    throw DimensionError("adam_step: expected " + std::to_string(state.m_.size()) + " parameters/gradients, got " +
                         std::to_string(params.size()) + "/" + std::to_string(grads.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->shape() != grads[i].shape() || params[i]->shape() != state.m_[i].shape()) {
      throw DimensionError("adam_step: gradient " + shape_to_string(grads[i].shape()) + " vs parameter " +
                           shape_to_string(params[i]->shape()));
    }
  }
  const AdamConfig& c = state.config_;
  ++state.steps_;
  const double t = static_cast<double>(state.steps_);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    Tensor& m = state.m_[i];
    Tensor& v = state.v_[i];
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g[j];
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g[j] * g[j];
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

}  // namespace ufslab::numerics
