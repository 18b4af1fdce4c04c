#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ufslab/gan/losses.hpp"
#include "ufslab/gan/networks.hpp"
#include "ufslab/numerics/adam.hpp"
#include "ufslab/selection/selection.hpp"
#include "ufslab/ufs/ufs.hpp"

namespace ufslab::gan {

struct TrainConfig {
  std::size_t batch_size = 64;
  /// 0 picks the loss default: 5 for wgan/wgan_gp, 1 for hinge.
  std::size_t n_critic = 0;
  std::size_t iterations = 5000;
  std::uint64_t seed = 7;
  LossConfig loss;
  std::optional<ufs::UfsConfig> ufs;
  std::optional<selection::SelectionConfig> selection;
  double feature_momentum = 0.0;
  /// Reject generator steps with UFS enabled before statistics exist.
  bool strict_stats = false;
  numerics::AdamConfig generator_adam = numerics::AdamConfig::gan_default();
  numerics::AdamConfig discriminator_adam = numerics::AdamConfig::gan_default();

  std::size_t critic_steps() const noexcept;
  void validate() const;
};

/// Everything the alternating loop mutates.
struct TrainState {
  TrainConfig config;
  GeneratorNet generator;
  DiscriminatorNet discriminator;
  numerics::AdamState generator_opt;
  numerics::AdamState discriminator_opt;
  ufs::FeatureStats stats;
  SeededRng rng;
  /// Completed generator steps.
  std::size_t iteration = 0;
  std::size_t critic_steps_taken = 0;
};

/// Builds networks and optimizers; all parameter draws come from config.seed.
TrainState make_train_state(const TrainConfig& config, const Architecture& arch);

struct CriticStepResult {
  double loss = 0.0;  // includes the penalty for wgan_gp
  double penalty = 0.0;
  Tensor real_scores;
  Tensor fake_scores;
};

struct CriticGradient {
  CriticStepResult step;
  std::vector<Tensor> grads;  // aligned with DiscriminatorNet::parameters()
  Tensor y_real;
  Tensor y_fake;
};

/// Critic loss (plus the penalty at the given interpolates for wgan_gp) and
/// its parameter gradient, without updating anything.
CriticGradient critic_gradient(DiscriminatorNet& d, const LossConfig& loss, const Tensor& real_batch,
                               const Tensor& fake_batch, const Tensor* interpolates = nullptr);

/// One critic update. Real and fake batches share one forward pass; the
/// feature statistics are refreshed from the same features with the head
/// weight as it was before the update. The suppression matrix is never used
/// here.
CriticStepResult train_discriminator_step(TrainState& state, const Tensor& real_batch);

struct GeneratorStepResult {
  double loss = 0.0;
  Tensor scores;  // ybar per sample (suppressed when UFS is active)
  std::optional<ufs::SuppressionMatrix> suppression;
  std::vector<std::size_t> selected;
};

struct GeneratorGradient {
  GeneratorStepResult step;
  std::vector<Tensor> grads;  // aligned with GeneratorNet::parameters()
};

/// Loss and generator parameter gradient for latent batch z without updating
/// anything. Selection in random mode draws from state.rng.
GeneratorGradient generator_gradient(TrainState& state, const Tensor& z);

/// One generator update on L_G = -mean_{i in selected} ybar_i with
/// ybar = D_L(Y_fake (x) S). S is a constant of the step; S = 1 while the
/// statistics are empty unless strict_stats is set.
GeneratorStepResult train_generator_step(TrainState& state);

struct IterationResult {
  double critic_loss = 0.0;  // from the last critic step
  double generator_loss = 0.0;
};

using RealSampler = std::function<Tensor(std::size_t batch_size)>;

/// critic_steps() critic updates followed by one generator update.
IterationResult train_iteration(TrainState& state, const RealSampler& sample_real);

}  // namespace ufslab::gan
