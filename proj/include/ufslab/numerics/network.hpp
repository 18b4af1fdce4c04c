#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ufslab/numerics/ops.hpp"
#include "ufslab/numerics/rng.hpp"
#include "ufslab/numerics/tensor.hpp"

namespace ufslab::numerics {

enum class LayerKind { dense, conv2d, leaky_relu, relu, tanh, global_sum_pool };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

/// One layer of a Sequential network.
///
/// dense: `in` -> `out` features on [n x in] inputs.
/// conv2d: `in` -> `out` channels, square `kernel`, `stride`, valid padding.
/// leaky_relu uses `slope`; the remaining kinds are parameter free.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t kernel = 0;
  std::size_t stride = 1;
  double slope = 0.2;

  static LayerSpec dense(std::size_t in, std::size_t out);
  static LayerSpec conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride);
  static LayerSpec leaky_relu(double slope = 0.2);
  static LayerSpec relu();
  static LayerSpec tanh();
  static LayerSpec global_sum_pool();

  bool has_parameters() const noexcept { return kind == LayerKind::dense || kind == LayerKind::conv2d; }
  /// Throws DimensionError/ContractError for non-positive dimensions or a bad slope.
  void validate() const;
  /// Per-sample output shape for a per-sample input shape.
  Shape output_shape(const Shape& sample_shape) const;

  bool operator==(const LayerSpec&) const = default;
};

/// Gradients of a scalar objective. `params` follows Sequential::parameters() order.
struct NetworkGrads {
  std::vector<Tensor> params;
  Tensor input;
};

/// Feed-forward stack of LayerSpecs with hand-written forward and reverse passes.
///
/// forward() retains every layer input so that backward() can run; calling
/// backward() without a preceding forward() throws StateError. The tangent
/// variants propagate a direction alongside the primal values (a forward-mode
/// JVP) and reverse through both, which yields parameter gradients of
/// directional derivatives. The gradient penalty needs exactly that.
class Sequential {
 public:
  Sequential() = default;
  /// Weights ~ N(0, init_std^2), biases zero.
  Sequential(std::vector<LayerSpec> specs, SeededRng& rng, double init_std = 0.02);

  const std::vector<LayerSpec>& specs() const noexcept { return specs_; }
  std::size_t num_layers() const noexcept { return specs_.size(); }

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::vector<std::string> parameter_names() const;

  /// Per-sample output shape, validating the whole chain.
  Shape output_shape(const Shape& sample_shape) const;

  Tensor forward(const Tensor& x);
  NetworkGrads backward(const Tensor& upstream);

  /// Stateless evaluation of the first `layers` layers (all by default).
  Tensor infer(const Tensor& x, std::size_t layers = static_cast<std::size_t>(-1)) const;

  struct Dual {
    Tensor value;
    Tensor tangent;
  };
  Dual forward_tangent(const Tensor& x, const Tensor& tx);
  /// Reverse pass through the primal/tangent pair produced by forward_tangent.
  NetworkGrads backward_tangent(const Tensor& grad_value, const Tensor& grad_tangent);

  void clear_cache() noexcept;

 private:
  struct Params {
    Tensor weight;
    Tensor bias;
  };

  Tensor layer_forward(std::size_t l, const Tensor& x) const;
  Tensor layer_tangent(std::size_t l, const Tensor& x, const Tensor& tx) const;

  std::vector<LayerSpec> specs_;
  std::vector<Params> params_;
  std::vector<Tensor> inputs_;
  std::vector<Tensor> tangents_;
  enum class Cache { none, primal, tangent } cache_ = Cache::none;
};

}  // namespace ufslab::numerics
