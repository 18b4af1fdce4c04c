#include "ufslab/gan/trainer.hpp"

#include <cmath>
#include <sstream>

#include "ufslab/errors.hpp"

namespace ufslab::gan {

std::size_t TrainConfig::critic_steps() const noexcept {
  if (n_critic > 0) return n_critic;
  return loss.kind == LossKind::hinge ? 1 : 5;
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw ContractError("TrainConfig: batch size must be >= 2");
  if (iterations < 1) throw ContractError("TrainConfig: iterations must be >= 1");
  if (!(loss.gp_lambda >= 0.0)) throw ContractError("TrainConfig: gp_lambda must be >= 0");
  if (!(feature_momentum >= 0.0 && feature_momentum <= 1.0)) {
    throw ContractError("TrainConfig: feature momentum must lie in [0, 1]");
  }
  if (ufs) ufs->validate();
  if (selection) selection->validate(batch_size);
}

TrainState make_train_state(const TrainConfig& config, const Architecture& arch) {
  config.validate();
  SeededRng init_rng(config.seed);
  TrainState state{.config = config,
                   .generator = GeneratorNet(arch.latent_dim, arch.sample_shape, arch.generator, init_rng),
                   .discriminator = DiscriminatorNet(arch.sample_shape, arch.discriminator_body, init_rng),
                   .generator_opt = {},
                   .discriminator_opt = {},
                   .stats = {},
                   .rng = init_rng.derive(1),
                   .iteration = 0,
                   .critic_steps_taken = 0};
  const auto g_params = std::as_const(state.generator).parameters();
  const auto d_params = std::as_const(state.discriminator).parameters();
  state.generator_opt = numerics::AdamState(config.generator_adam, g_params);
  state.discriminator_opt = numerics::AdamState(config.discriminator_adam, d_params);
  state.stats.momentum = config.feature_momentum;
  return state;
}

namespace {

void check_loss(double value, const char* what, const TrainState& state) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << what << " is not finite at generator iteration " << state.iteration << " (critic step "
        << state.critic_steps_taken << ")";
    throw NumericError(msg.str());
  }
}

void accumulate(std::vector<Tensor>& into, const std::vector<Tensor>& other) {
  for (std::size_t p = 0; p < into.size(); ++p) {
    for (std::size_t j = 0; j < into[p].size(); ++j) into[p][j] += other[p][j];
  }
}

Tensor latent_batch(TrainState& state) {
  return numerics::gaussian_sample(state.rng, {state.config.batch_size, state.generator.latent_dim()});
}

}  // namespace

CriticGradient critic_gradient(DiscriminatorNet& d, const LossConfig& loss_cfg, const Tensor& real_batch,
                               const Tensor& fake_batch, const Tensor* interpolates) {
  const std::size_t n = real_batch.dim(0);
  if (fake_batch.shape() != real_batch.shape()) {
    throw DimensionError("critic_gradient: real " + numerics::shape_to_string(real_batch.shape()) + " vs fake " +
                         numerics::shape_to_string(fake_batch.shape()));
  }
  const SplitOutput split = discriminator_forward_split(d, numerics::concat_rows(real_batch, fake_batch));

  CriticGradient out;
  out.y_real = split.features.slice_rows(0, n);
  out.y_fake = split.features.slice_rows(n, 2 * n);
  CriticStepResult& result = out.step;
  result.real_scores = split.scores.slice_rows(0, n);
  result.fake_scores = split.scores.slice_rows(n, 2 * n);
  const ScoreLoss loss = critic_loss(loss_cfg.kind, result.real_scores.values(), result.fake_scores.values());

  // Scores are <w, y> + b, so dL/dy = dL/dscore * w and dL/dw = sum dL/dscore * y.
  const std::size_t channels = d.feature_dim();
  Tensor grad_features(split.features.shape());
  Tensor grad_w({channels});
  double grad_b = 0.0;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    const double ds = i < n ? loss.d_real[i] : loss.d_fake[i - n];
    grad_b += ds;
    for (std::size_t c = 0; c < channels; ++c) {
      grad_features.at(i, c) = ds * d.head_weight()[c];
      grad_w[c] += ds * split.features.at(i, c);
    }
  }
  out.grads = d.body().backward(grad_features).params;
  out.grads.push_back(std::move(grad_w));
  out.grads.push_back(Tensor({1}, {grad_b}));

  result.loss = loss.value;
  if (loss_cfg.kind == LossKind::wgan_gp) {
    if (interpolates == nullptr) throw ContractError("critic_gradient: wgan_gp needs interpolates");
    PenaltyResult penalty = gradient_penalty_at(d, *interpolates, loss_cfg.gp_lambda);
    accumulate(out.grads, penalty.param_grads);
    result.penalty = penalty.value;
    result.loss += penalty.value;
  }
  return out;
}

CriticStepResult train_discriminator_step(TrainState& state, const Tensor& real_batch) {
  const std::size_t n = state.config.batch_size;
  DiscriminatorNet& d = state.discriminator;
  d.check_input(real_batch);
  if (real_batch.dim(0) != n) throw DimensionError("train_discriminator_step: real batch size differs from config");

  const Tensor fake_batch = state.generator.infer(latent_batch(state));
  std::optional<Tensor> interpolates;
  if (state.config.loss.kind == LossKind::wgan_gp) interpolates = interpolate(real_batch, fake_batch, state.rng);
  CriticGradient g =
      critic_gradient(d, state.config.loss, real_batch, fake_batch, interpolates ? &*interpolates : nullptr);
  check_loss(g.step.loss, "critic loss", state);

  if (state.config.ufs) ufs::update_stats(state.stats, d.head_weight(), g.y_real, g.y_fake);

  auto params = d.parameters();
  numerics::adam_step(state.discriminator_opt, params, g.grads);
  ++state.critic_steps_taken;
  return std::move(g.step);
}

GeneratorGradient generator_gradient(TrainState& state, const Tensor& z) {
  const TrainConfig& cfg = state.config;
  const std::size_t n = z.dim(0);
  DiscriminatorNet& d = state.discriminator;

  const Tensor samples = state.generator.generate(z);
  const SplitOutput split = discriminator_forward_split(d, samples);

  GeneratorStepResult result;
  if (cfg.ufs && state.stats.initialized) {
    const ufs::UfsConfig active = ufs::config_at(*cfg.ufs, state.iteration, cfg.iterations);
    result.suppression = ufs::suppression_for(state.stats, d.head_weight(), split.features, active);
    result.scores = ufs::apply_suppression(split.features, *result.suppression, d.head_weight(), d.head_bias());
  } else {
    if (cfg.ufs && cfg.strict_stats) {
      throw StateError("train_generator_step: UFS enabled but feature statistics are not initialized");
    }
    result.scores = split.scores;
  }

  if (cfg.selection && cfg.selection->mode != selection::SelectionMode::none) {
    const std::size_t k = selection::anneal_k(*cfg.selection, state.iteration, cfg.iterations);
    result.selected = selection::select_indices(result.scores.values(), k, cfg.selection->mode, state.rng);
  } else {
    result.selected = selection::select_indices(result.scores.values(), n, selection::SelectionMode::none, state.rng);
  }

  const double inv_k = 1.0 / static_cast<double>(result.selected.size());
  double total = 0.0;
  for (std::size_t i : result.selected) total += result.scores[i];
  result.loss = -total * inv_k;
  check_loss(result.loss, "generator loss", state);

  const Tensor per_channel = result.suppression ? ufs::suppressed_score_gradient(d.head_weight(), *result.suppression)
                                                : Tensor();
  Tensor grad_features(split.features.shape());
  for (std::size_t i : result.selected) {
    for (std::size_t c = 0; c < d.feature_dim(); ++c) {
      const double dy = result.suppression ? per_channel.at(i, c) : d.head_weight()[c];
      grad_features.at(i, c) = -inv_k * dy;
    }
  }
  const Tensor grad_samples = d.body().backward(grad_features).input;
  return {std::move(result), state.generator.backward(grad_samples).params};
}

GeneratorStepResult train_generator_step(TrainState& state) {
  GeneratorGradient g = generator_gradient(state, latent_batch(state));
  auto params = state.generator.parameters();
  numerics::adam_step(state.generator_opt, params, g.grads);
  ++state.iteration;
  return std::move(g.step);
}

IterationResult train_iteration(TrainState& state, const RealSampler& sample_real) {
  IterationResult out;
  for (std::size_t s = 0; s < state.config.critic_steps(); ++s) {
    out.critic_loss = train_discriminator_step(state, sample_real(state.config.batch_size)).loss;
  }
  out.generator_loss = train_generator_step(state).loss;
  return out;
}

}  // namespace ufslab::gan
