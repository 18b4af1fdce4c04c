#include "ufslab/gan/networks.hpp"

#include <algorithm>

#include "ufslab/errors.hpp"

namespace ufslab::gan {

using numerics::shape_size;
using numerics::shape_to_string;

GeneratorNet::GeneratorNet(std::size_t latent_dim, Shape sample_shape, std::vector<LayerSpec> layers, SeededRng& rng,
                           double init_std)
    : latent_dim_(latent_dim), sample_shape_(std::move(sample_shape)), net_(std::move(layers), rng, init_std) {
  if (latent_dim_ == 0) throw DimensionError("generator latent dimension must be positive");
  const Shape out = net_.output_shape({latent_dim_});
  if (out.size() != 1 || out[0] != shape_size(sample_shape_)) {
    throw DimensionError("generator emits " + shape_to_string(out) + " per sample but data shape is " +
                         shape_to_string(sample_shape_));
  }
}

Tensor GeneratorNet::to_samples(const Tensor& flat) const {
  Shape shape{flat.dim(0)};
  shape.insert(shape.end(), sample_shape_.begin(), sample_shape_.end());
  return flat.reshaped(std::move(shape));
}

Tensor GeneratorNet::generate(const Tensor& z) { return to_samples(net_.forward(z)); }

Tensor GeneratorNet::infer(const Tensor& z) const { return to_samples(net_.infer(z)); }

numerics::NetworkGrads GeneratorNet::backward(const Tensor& grad_samples) {
  return net_.backward(grad_samples.reshaped({grad_samples.dim(0), shape_size(sample_shape_)}));
}

DiscriminatorNet::DiscriminatorNet(Shape sample_shape, std::vector<LayerSpec> body, SeededRng& rng, double init_std)
    : sample_shape_(std::move(sample_shape)), body_(std::move(body), rng, init_std) {
  const Shape out = body_.output_shape(sample_shape_);
  if (out.size() != 1) {
    throw DimensionError("discriminator body must end in a feature vector, got " + shape_to_string(out));
  }
  head_weight_ = numerics::gaussian_sample(rng, {out[0]}, 0.0, init_std);
  head_bias_ = Tensor({1});
}

std::vector<Tensor*> DiscriminatorNet::parameters() {
  auto out = body_.parameters();
  out.push_back(&head_weight_);
  out.push_back(&head_bias_);
  return out;
}

std::vector<const Tensor*> DiscriminatorNet::parameters() const {
  auto out = body_.parameters();
  out.push_back(&head_weight_);
  out.push_back(&head_bias_);
  return out;
}

std::vector<std::string> DiscriminatorNet::parameter_names() const {
  auto out = body_.parameter_names();
  out.emplace_back("head.weight");
  out.emplace_back("head.bias");
  return out;
}

Tensor DiscriminatorNet::head(const Tensor& features) const {
  if (features.rank() != 2 || features.dim(1) != feature_dim()) {
    throw DimensionError("head expects [n x " + std::to_string(feature_dim()) + "] features, got " +
                         shape_to_string(features.shape()));
  }
  Tensor scores({features.dim(0)});
  for (std::size_t i = 0; i < features.dim(0); ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < feature_dim(); ++c) acc += head_weight_[c] * features.at(i, c);
    scores[i] = acc + head_bias_[0];
  }
  return scores;
}

void DiscriminatorNet::check_input(const Tensor& x) const {
  if (x.rank() != sample_shape_.size() + 1 || !std::equal(sample_shape_.begin(), sample_shape_.end(), x.shape().begin() + 1)) {
    throw DimensionError("discriminator expects batches of " + shape_to_string(sample_shape_) + ", got " +
                         shape_to_string(x.shape()));
  }
}

SplitOutput discriminator_forward_split(DiscriminatorNet& d, const Tensor& x) {
  d.check_input(x);
  SplitOutput out;
  out.features = d.body().forward(x);
  out.scores = d.head(out.features);
  return out;
}

Architecture point_architecture(std::size_t feature_dim) {
  using L = LayerSpec;
  Architecture a;
  a.latent_dim = 8;
  a.sample_shape = {2};
  a.generator = {L::dense(8, 64), L::leaky_relu(0.2), L::dense(64, 64), L::leaky_relu(0.2), L::dense(64, 2)};
  a.discriminator_body = {L::dense(2, 64), L::leaky_relu(0.2), L::dense(64, 64), L::leaky_relu(0.2),
                          L::dense(64, feature_dim), L::leaky_relu(0.2)};
  return a;
}

Architecture image_architecture(std::size_t height, std::size_t width) {
  using L = LayerSpec;
  Architecture a;
  a.latent_dim = 32;
  a.sample_shape = {1, height, width};
  a.generator = {L::dense(32, 256), L::leaky_relu(0.2), L::dense(256, 256), L::leaky_relu(0.2),
                 L::dense(256, height * width), L::tanh()};
  a.discriminator_body = {L::conv2d(1, 32, 2, 2),  L::leaky_relu(0.2), L::conv2d(32, 64, 2, 2), L::leaky_relu(0.2),
                          L::conv2d(64, 128, 2, 2), L::leaky_relu(0.2), L::global_sum_pool()};
  return a;
}

}  // namespace ufslab::gan
