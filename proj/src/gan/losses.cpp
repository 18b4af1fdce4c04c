#include "ufslab/gan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "ufslab/errors.hpp"

namespace ufslab::gan {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::wgan: return "wgan";
    case LossKind::wgan_gp: return "wgan_gp";
    case LossKind::hinge: return "hinge";
  }
  return "wgan_gp";
}

LossKind loss_kind_from_string(const std::string& name) {
  for (auto k : {LossKind::wgan, LossKind::wgan_gp, LossKind::hinge}) {
    if (to_string(k) == name) return k;
  }
  throw ContractError("unknown loss kind '" + name + "'");
}

namespace {

void require_non_empty(std::span<const double> real, std::span<const double> fake, const char* op) {
  if (real.empty() || fake.empty()) throw ContractError(std::string(op) + ": score batches must be non-empty");
}

double mean(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace

double wgan_d_loss(std::span<const double> real_scores, std::span<const double> fake_scores) {
  require_non_empty(real_scores, fake_scores, "wgan_d_loss");
  return mean(fake_scores) - mean(real_scores);
}

double hinge_d_loss(std::span<const double> real_scores, std::span<const double> fake_scores) {
  require_non_empty(real_scores, fake_scores, "hinge_d_loss");
  double real_term = 0.0, fake_term = 0.0;
  for (double r : real_scores) real_term += std::max(0.0, 1.0 - r);
  for (double f : fake_scores) fake_term += std::max(0.0, 1.0 + f);
  return real_term / static_cast<double>(real_scores.size()) + fake_term / static_cast<double>(fake_scores.size());
}

ScoreLoss critic_loss(LossKind kind, std::span<const double> real_scores, std::span<const double> fake_scores) {
  require_non_empty(real_scores, fake_scores, "critic_loss");
  const double inv_real = 1.0 / static_cast<double>(real_scores.size());
  const double inv_fake = 1.0 / static_cast<double>(fake_scores.size());
  ScoreLoss out;
  out.d_real.resize(real_scores.size());
  out.d_fake.resize(fake_scores.size());
  if (kind == LossKind::hinge) {
    out.value = hinge_d_loss(real_scores, fake_scores);
    for (std::size_t i = 0; i < real_scores.size(); ++i) out.d_real[i] = 1.0 - real_scores[i] > 0.0 ? -inv_real : 0.0;
    for (std::size_t i = 0; i < fake_scores.size(); ++i) out.d_fake[i] = 1.0 + fake_scores[i] > 0.0 ? inv_fake : 0.0;
  } else {
    out.value = wgan_d_loss(real_scores, fake_scores);
    std::fill(out.d_real.begin(), out.d_real.end(), -inv_real);
    std::fill(out.d_fake.begin(), out.d_fake.end(), inv_fake);
  }
  return out;
}

namespace {

/// Per-row copies of the head weight: the gradient of every score w.r.t. its features.
Tensor head_rows(const DiscriminatorNet& d, std::size_t n) {
  Tensor out({n, d.feature_dim()});
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(d.head_weight().values().begin(), d.head_weight().values().end(), out.row(i).begin());
  }
  return out;
}

}  // namespace

Tensor score_input_gradient(DiscriminatorNet& d, const Tensor& x) {
  d.check_input(x);
  d.body().forward(x);
  return d.body().backward(head_rows(d, x.dim(0))).input;
}

Tensor interpolate(const Tensor& real_batch, const Tensor& fake_batch, SeededRng& rng) {
  if (real_batch.shape() != fake_batch.shape()) {
    throw DimensionError("gradient_penalty: real " + numerics::shape_to_string(real_batch.shape()) + " vs fake " +
                         numerics::shape_to_string(fake_batch.shape()));
  }
  Tensor out(real_batch.shape());
  for (std::size_t i = 0; i < real_batch.dim(0); ++i) {
    const double u = rng.uniform();
    auto r = real_batch.row(i);
    auto f = fake_batch.row(i);
    auto o = out.row(i);
    for (std::size_t j = 0; j < o.size(); ++j) o[j] = u * r[j] + (1.0 - u) * f[j];
  }
  return out;
}

PenaltyResult gradient_penalty_at(DiscriminatorNet& d, const Tensor& interpolates, double gp_lambda) {
  if (!(gp_lambda >= 0.0)) throw ContractError("gradient_penalty: gp_lambda must be >= 0");
  const std::size_t n = interpolates.dim(0);
  const Tensor grad = score_input_gradient(d, interpolates);

  // v_i = dP/dg_i; the parameter gradient of P is then the parameter
  // gradient of sum_i <v_i, g_i> with v held fixed, i.e. of the critic's
  // directional derivative along v.
  PenaltyResult out;
  out.interpolates = interpolates;
  Tensor direction(grad.shape());
  const double scale = gp_lambda / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto g = grad.row(i);
    double sq = 0.0;
    for (double v : g) sq += v * v;
    const double norm = std::sqrt(sq);
    out.value += scale * (norm - 1.0) * (norm - 1.0);
    if (norm > 0.0) {
      const double coeff = scale * 2.0 * (norm - 1.0) / norm;
      auto dir = direction.row(i);
      for (std::size_t j = 0; j < g.size(); ++j) dir[j] = coeff * g[j];
    }
  }

  auto dual = d.body().forward_tangent(interpolates, direction);
  const std::size_t channels = d.feature_dim();
  Tensor grad_w({channels});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < channels; ++c) grad_w[c] += dual.tangent.at(i, c);
  }
  numerics::NetworkGrads body = d.body().backward_tangent(Tensor(dual.value.shape()), head_rows(d, n));
  out.param_grads = std::move(body.params);
  out.param_grads.push_back(std::move(grad_w));
  out.param_grads.emplace_back(numerics::Shape{1});
  return out;
}

double gradient_penalty(DiscriminatorNet& d, const Tensor& real_batch, const Tensor& fake_batch, SeededRng& rng,
                        double gp_lambda) {
  if (!(gp_lambda >= 0.0)) throw ContractError("gradient_penalty: gp_lambda must be >= 0");
  const Tensor grad = score_input_gradient(d, interpolate(real_batch, fake_batch, rng));
  double total = 0.0;
  for (std::size_t i = 0; i < grad.dim(0); ++i) {
    double sq = 0.0;
    for (double v : grad.row(i)) sq += v * v;
    total += (std::sqrt(sq) - 1.0) * (std::sqrt(sq) - 1.0);
  }
  return gp_lambda * total / static_cast<double>(grad.dim(0));
}

}  // namespace ufslab::gan
