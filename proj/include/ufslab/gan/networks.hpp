#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ufslab/numerics/network.hpp"
#include "ufslab/numerics/rng.hpp"
#include "ufslab/numerics/tensor.hpp"

namespace ufslab::gan {

using numerics::LayerSpec;
using numerics::SeededRng;
using numerics::Sequential;
using numerics::Shape;
using numerics::Tensor;

/// Maps latent vectors [n x latent_dim] to samples [n x sample_shape...].
/// The layer stack produces flat rows which are reshaped to sample_shape.
class GeneratorNet {
 public:
  GeneratorNet() = default;
  GeneratorNet(std::size_t latent_dim, Shape sample_shape, std::vector<LayerSpec> layers, SeededRng& rng,
               double init_std = 0.02);

  std::size_t latent_dim() const noexcept { return latent_dim_; }
  const Shape& sample_shape() const noexcept { return sample_shape_; }
  Sequential& net() noexcept { return net_; }
  const Sequential& net() const noexcept { return net_; }

  /// Forward pass retaining intermediates for backward().
  Tensor generate(const Tensor& z);
  Tensor infer(const Tensor& z) const;
  /// Gradients w.r.t. generator parameters for an upstream gradient on the samples.
  numerics::NetworkGrads backward(const Tensor& grad_samples);

  std::vector<Tensor*> parameters() { return net_.parameters(); }
  std::vector<const Tensor*> parameters() const { return net_.parameters(); }

 private:
  Tensor to_samples(const Tensor& flat) const;

  std::size_t latent_dim_ = 0;
  Shape sample_shape_;
  Sequential net_;
};

/// Critic split into a feature body D_R and a linear head D_L.
///
/// The body ends in a C-dimensional feature vector per sample (convolutional
/// bodies end with global_sum_pool); the head is score = <w, y> + b.
class DiscriminatorNet {
 public:
  DiscriminatorNet() = default;
  DiscriminatorNet(Shape sample_shape, std::vector<LayerSpec> body, SeededRng& rng, double init_std = 0.02);

  const Shape& sample_shape() const noexcept { return sample_shape_; }
  std::size_t feature_dim() const noexcept { return head_weight_.size(); }
  Sequential& body() noexcept { return body_; }
  const Sequential& body() const noexcept { return body_; }
  Tensor& head_weight() noexcept { return head_weight_; }
  const Tensor& head_weight() const noexcept { return head_weight_; }
  double head_bias() const noexcept { return head_bias_[0]; }
  void set_head_bias(double b) noexcept { head_bias_[0] = b; }

  /// Body parameters followed by head weight and head bias.
  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::string> parameter_names() const;

  /// scores[i] = <w, features[i]> + b.
  Tensor head(const Tensor& features) const;

  /// Checks that x is a batch of samples of sample_shape.
  void check_input(const Tensor& x) const;

 private:
  Shape sample_shape_;
  Sequential body_;
  Tensor head_weight_;
  Tensor head_bias_;
};

struct SplitOutput {
  Tensor features;  // [n x C], Y = D_R(x)
  Tensor scores;    // [n], D_L(Y)
};

/// Runs the body (retaining intermediates) and the head.
SplitOutput discriminator_forward_split(DiscriminatorNet& d, const Tensor& x);

/// Default layer stacks.
struct Architecture {
  std::size_t latent_dim = 8;
  Shape sample_shape;
  std::vector<LayerSpec> generator;
  std::vector<LayerSpec> discriminator_body;
};

/// Generator MLP latent->64->64->2 (leaky 0.2), critic body 2->64->64->64.
Architecture point_architecture(std::size_t feature_dim = 64);
/// Generator MLP latent->256->256->h*w with tanh output; critic body of three
/// stride-2 convolutions (kernel 2) plus global_sum_pool, C = 128.
Architecture image_architecture(std::size_t height, std::size_t width);

}  // namespace ufslab::gan
