#pragma once

#include <span>
#include <string>
#include <vector>

#include "ufslab/gan/networks.hpp"

namespace ufslab::gan {

enum class LossKind { wgan, wgan_gp, hinge };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

struct LossConfig {
  LossKind kind = LossKind::wgan_gp;
  double gp_lambda = 10.0;
};

/// mean(fake) - mean(real).
double wgan_d_loss(std::span<const double> real_scores, std::span<const double> fake_scores);
/// mean(max(0, 1 - real)) + mean(max(0, 1 + fake)).
double hinge_d_loss(std::span<const double> real_scores, std::span<const double> fake_scores);

struct ScoreLoss {
  double value = 0.0;
  std::vector<double> d_real;  // dL/d real_scores[i]
  std::vector<double> d_fake;  // dL/d fake_scores[i]
};

/// Critic loss (without penalty) and its gradient w.r.t. the scores.
/// wgan and wgan_gp share the Wasserstein form.
ScoreLoss critic_loss(LossKind kind, std::span<const double> real_scores, std::span<const double> fake_scores);

/// Gradient of the critic score w.r.t. its input, one row per sample.
Tensor score_input_gradient(DiscriminatorNet& d, const Tensor& x);

struct PenaltyResult {
  double value = 0.0;
  std::vector<Tensor> param_grads;  // aligned with DiscriminatorNet::parameters()
  Tensor interpolates;
};

/// lambda * mean_i (||grad_x D(x_hat_i)|| - 1)^2 at x_hat = u real + (1-u) fake,
/// u ~ Uniform(0, 1) per example, drawn from rng.
double gradient_penalty(DiscriminatorNet& d, const Tensor& real_batch, const Tensor& fake_batch, SeededRng& rng,
                        double gp_lambda = 10.0);

/// Penalty at given interpolates together with its critic parameter
/// gradient (a reverse pass through the directional derivative).
PenaltyResult gradient_penalty_at(DiscriminatorNet& d, const Tensor& interpolates, double gp_lambda);

/// x_hat = u real + (1-u) fake with one u per example drawn from rng.
Tensor interpolate(const Tensor& real_batch, const Tensor& fake_batch, SeededRng& rng);

}  // namespace ufslab::gan
