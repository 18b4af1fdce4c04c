#include "ufslab/numerics/network.hpp"

#include <algorithm>
#include <cmath>

#include "ufslab/errors.hpp"

namespace ufslab::numerics {

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::leaky_relu: return "leaky_relu";
    case LayerKind::relu: return "relu";
    case LayerKind::tanh: return "tanh";
    case LayerKind::global_sum_pool: return "global_sum_pool";
  }
  return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
  for (LayerKind k : {LayerKind::dense, LayerKind::conv2d, LayerKind::leaky_relu, LayerKind::relu, LayerKind::tanh,
                      LayerKind::global_sum_pool}) {
    if (to_string(k) == name) return k;
  }
  throw ContractError("unknown layer kind '" + name + "'");
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) { return {LayerKind::dense, in, out, 0, 1, 0.2}; }
LayerSpec LayerSpec::conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel, std::size_t stride) {
  return {LayerKind::conv2d, in_channels, out_channels, kernel, stride, 0.2};
}
LayerSpec LayerSpec::leaky_relu(double slope) { return {LayerKind::leaky_relu, 0, 0, 0, 1, slope}; }
LayerSpec LayerSpec::relu() { return {LayerKind::relu, 0, 0, 0, 1, 0.2}; }
LayerSpec LayerSpec::tanh() { return {LayerKind::tanh, 0, 0, 0, 1, 0.2}; }
LayerSpec LayerSpec::global_sum_pool() { return {LayerKind::global_sum_pool, 0, 0, 0, 1, 0.2}; }

void LayerSpec::validate() const {
  switch (kind) {
    case LayerKind::dense:
      if (in == 0 || out == 0) throw DimensionError("dense layer needs positive in/out features");
      break;
    case LayerKind::conv2d:
      if (in == 0 || out == 0 || kernel == 0 || stride == 0) {
        throw DimensionError("conv2d layer needs positive channels, kernel and stride");
      }
      break;
    case LayerKind::leaky_relu:
      if (!(slope > 0.0 && slope < 1.0)) throw ContractError("leaky_relu slope must lie in (0, 1)");
      break;
    default:
      break;
  }
}

Shape LayerSpec::output_shape(const Shape& s) const {
  validate();
  switch (kind) {
    case LayerKind::dense:
      if (s.size() != 1 || s[0] != in) {
        throw DimensionError("dense layer expects " + std::to_string(in) + " features, got " + shape_to_string(s));
      }
      return {out};
    case LayerKind::conv2d:
      if (s.size() != 3 || s[0] != in) {
        throw DimensionError("conv2d layer expects " + std::to_string(in) + " channels, got " + shape_to_string(s));
      }
      if (kernel > s[1] || kernel > s[2]) {
        throw DimensionError("conv2d kernel " + std::to_string(kernel) + " larger than input " + shape_to_string(s));
      }
      return {out, (s[1] - kernel) / stride + 1, (s[2] - kernel) / stride + 1};
    case LayerKind::global_sum_pool:
      if (s.size() != 3) throw DimensionError("global_sum_pool expects a c x h x w map, got " + shape_to_string(s));
      return {s[0]};
    default:
      return s;
  }
}

Sequential::Sequential(std::vector<LayerSpec> specs, SeededRng& rng, double init_std) : specs_(std::move(specs)) {
  params_.resize(specs_.size());
  // Width flowing between layers (features or channels), once a layer fixes it.
  std::size_t width = 0;
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    const LayerSpec& s = specs_[l];
    s.validate();
    if (s.has_parameters()) {
      if (width != 0 && s.in != width) {
        throw DimensionError("layer " + std::to_string(l) + " (" + to_string(s.kind) + ") expects width " +
                             std::to_string(s.in) + " but the previous layer produces " + std::to_string(width));
      }
      width = s.out;
    }
    if (s.kind == LayerKind::dense) {
      params_[l].weight = gaussian_sample(rng, {s.in, s.out}, 0.0, init_std);
      params_[l].bias = Tensor({s.out});
    } else if (s.kind == LayerKind::conv2d) {
      params_[l].weight = gaussian_sample(rng, {s.out, s.in, s.kernel, s.kernel}, 0.0, init_std);
      params_[l].bias = Tensor({s.out});
    }
  }
}

std::vector<Tensor*> Sequential::parameters() {
  std::vector<Tensor*> out;
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    if (!specs_[l].has_parameters()) continue;
    out.push_back(&params_[l].weight);
    out.push_back(&params_[l].bias);
  }
  return out;
}

std::vector<const Tensor*> Sequential::parameters() const {
  std::vector<const Tensor*> out;
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    if (!specs_[l].has_parameters()) continue;
    out.push_back(&params_[l].weight);
    out.push_back(&params_[l].bias);
  }
  return out;
}

std::vector<std::string> Sequential::parameter_names() const {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    if (!specs_[l].has_parameters()) continue;
    out.push_back("layer" + std::to_string(l) + ".weight");
    out.push_back("layer" + std::to_string(l) + ".bias");
  }
  return out;
}

Shape Sequential::output_shape(const Shape& sample_shape) const {
  Shape s = sample_shape;
  for (const LayerSpec& spec : specs_) s = spec.output_shape(s);
  return s;
}

namespace {

Activation activation_of(LayerKind kind) {
  switch (kind) {
    case LayerKind::relu: return Activation::relu;
    case LayerKind::leaky_relu: return Activation::leaky_relu;
    default: return Activation::tanh;
  }
}

Shape sample_shape_of(const Tensor& x) { return Shape(x.shape().begin() + 1, x.shape().end()); }

void add_row_bias(Tensor& y, const Tensor& bias) {
  const std::size_t n = y.dim(0), m = y.dim(1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) y.at(i, j) += bias[j];
  }
}

void add_channel_bias(Tensor& y, const Tensor& bias) {
  const std::size_t n = y.dim(0), c = y.dim(1), spatial = y.dim(2) * y.dim(3);
  double* p = y.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t s = 0; s < spatial; ++s) *p++ += bias[ch];
    }
  }
}

Tensor row_sum(const Tensor& g) {
  Tensor out({g.dim(1)});
  for (std::size_t i = 0; i < g.dim(0); ++i) {
    for (std::size_t j = 0; j < g.dim(1); ++j) out[j] += g.at(i, j);
  }
  return out;
}

Tensor channel_sum(const Tensor& g) {
  const std::size_t n = g.dim(0), c = g.dim(1), spatial = g.dim(2) * g.dim(3);
  Tensor out({c});
  const double* p = g.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t s = 0; s < spatial; ++s) out[ch] += *p++;
    }
  }
  return out;
}

Tensor unpool(const Tensor& g, const Shape& input_shape) {
  Tensor out(input_shape);
  const std::size_t spatial = input_shape[2] * input_shape[3];
  double* p = out.data();
  for (std::size_t i = 0; i < g.size(); ++i) {
    std::fill_n(p + i * spatial, spatial, g[i]);
  }
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

void accumulate(Tensor& into, const Tensor& other) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] += other[i];
}

}  // namespace

Tensor Sequential::layer_forward(std::size_t l, const Tensor& x) const {
  const LayerSpec& s = specs_[l];
  if (x.rank() < 2) throw DimensionError("layer input must be batched, got " + shape_to_string(x.shape()));
  s.output_shape(sample_shape_of(x));
  switch (s.kind) {
    case LayerKind::dense: {
      Tensor y = matmul(x, params_[l].weight);
      add_row_bias(y, params_[l].bias);
      return y;
    }
    case LayerKind::conv2d: {
      Tensor y = conv2d_forward(x, params_[l].weight, s.stride);
      add_channel_bias(y, params_[l].bias);
      return y;
    }
    case LayerKind::global_sum_pool:
      return global_sum_pool(x);
    default:
      return activation_forward(x, activation_of(s.kind), s.slope);
  }
}

Tensor Sequential::layer_tangent(std::size_t l, const Tensor& x, const Tensor& tx) const {
  const LayerSpec& s = specs_[l];
  switch (s.kind) {
    case LayerKind::dense:
      return matmul(tx, params_[l].weight);
    case LayerKind::conv2d:
      return conv2d_forward(tx, params_[l].weight, s.stride);
    case LayerKind::global_sum_pool:
      return global_sum_pool(tx);
    default:
      return hadamard(activation_derivative(x, activation_of(s.kind), s.slope), tx);
  }
}

Tensor Sequential::forward(const Tensor& x) {
  inputs_.clear();
  tangents_.clear();
  cache_ = Cache::none;
  Tensor h = x;
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    Tensor next = layer_forward(l, h);
    inputs_.push_back(std::move(h));
    h = std::move(next);
  }
  cache_ = Cache::primal;
  return h;
}

Tensor Sequential::infer(const Tensor& x, std::size_t layers) const {
  Tensor h = x;
  const std::size_t count = std::min(layers, specs_.size());
  for (std::size_t l = 0; l < count; ++l) h = layer_forward(l, h);
  return h;
}

NetworkGrads Sequential::backward(const Tensor& upstream) {
  if (cache_ != Cache::primal) throw StateError("Sequential::backward called without a preceding forward pass");
  std::vector<Params> grads(specs_.size());
  Tensor g = upstream;
  for (std::size_t l = specs_.size(); l-- > 0;) {
    const LayerSpec& s = specs_[l];
    const Tensor& x = inputs_[l];
    switch (s.kind) {
      case LayerKind::dense:
        if (g.shape() != Shape{x.dim(0), s.out}) {
          throw DimensionError("backward: upstream " + shape_to_string(g.shape()) + " does not match dense output");
        }
        grads[l].weight = matmul_tn(x, g);
        grads[l].bias = row_sum(g);
        g = matmul_nt(g, params_[l].weight);
        break;
      case LayerKind::conv2d: {
        Conv2dGrads cg = conv2d_backward(x, params_[l].weight, s.stride, g);
        grads[l].weight = std::move(cg.kernel);
        grads[l].bias = channel_sum(g);
        g = std::move(cg.input);
        break;
      }
      case LayerKind::global_sum_pool:
        if (g.shape() != Shape{x.dim(0), x.dim(1)}) {
          throw DimensionError("backward: upstream " + shape_to_string(g.shape()) + " does not match pooled output");
        }
        g = unpool(g, x.shape());
        break;
      default:
        if (g.shape() != x.shape()) throw DimensionError("backward: upstream shape mismatch at activation");
        g = hadamard(g, activation_derivative(x, activation_of(s.kind), s.slope));
        break;
    }
  }
  NetworkGrads out;
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    if (!specs_[l].has_parameters()) continue;
    out.params.push_back(std::move(grads[l].weight));
    out.params.push_back(std::move(grads[l].bias));
  }
  out.input = std::move(g);
  return out;
}

Sequential::Dual Sequential::forward_tangent(const Tensor& x, const Tensor& tx) {
  if (x.shape() != tx.shape()) {
    throw DimensionError("forward_tangent: tangent " + shape_to_string(tx.shape()) + " vs input " +
                         shape_to_string(x.shape()));
  }
  inputs_.clear();
  tangents_.clear();
  cache_ = Cache::none;
  Tensor h = x, t = tx;
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    Tensor next = layer_forward(l, h);
    Tensor next_t = layer_tangent(l, h, t);
    inputs_.push_back(std::move(h));
    tangents_.push_back(std::move(t));
    h = std::move(next);
    t = std::move(next_t);
  }
  cache_ = Cache::tangent;
  return {std::move(h), std::move(t)};
}

NetworkGrads Sequential::backward_tangent(const Tensor& grad_value, const Tensor& grad_tangent) {
  if (cache_ != Cache::tangent) {
    throw StateError("Sequential::backward_tangent called without a preceding forward_tangent pass");
  }
  if (grad_value.shape() != grad_tangent.shape()) throw DimensionError("backward_tangent: adjoint shapes differ");
  std::vector<Params> grads(specs_.size());
  Tensor gv = grad_value, gt = grad_tangent;
  for (std::size_t l = specs_.size(); l-- > 0;) {
    const LayerSpec& s = specs_[l];
    const Tensor& x = inputs_[l];
    const Tensor& t = tangents_[l];
    switch (s.kind) {
      case LayerKind::dense: {
        grads[l].weight = matmul_tn(x, gv);
        accumulate(grads[l].weight, matmul_tn(t, gt));
        grads[l].bias = row_sum(gv);
        gv = matmul_nt(gv, params_[l].weight);
        gt = matmul_nt(gt, params_[l].weight);
        break;
      }
      case LayerKind::conv2d: {
        Conv2dGrads primal = conv2d_backward(x, params_[l].weight, s.stride, gv);
        Conv2dGrads dual = conv2d_backward(t, params_[l].weight, s.stride, gt);
        grads[l].weight = std::move(primal.kernel);
        accumulate(grads[l].weight, dual.kernel);
        grads[l].bias = channel_sum(gv);
        gv = std::move(primal.input);
        gt = std::move(dual.input);
        break;
      }
      case LayerKind::global_sum_pool:
        gv = unpool(gv, x.shape());
        gt = unpool(gt, x.shape());
        break;
      default: {
        const Activation act = activation_of(s.kind);
        const Tensor d1 = activation_derivative(x, act, s.slope);
        Tensor next_gv = hadamard(gv, d1);
        if (s.kind == LayerKind::tanh) {
          const Tensor d2 = activation_second_derivative(x, act);
          for (std::size_t i = 0; i < next_gv.size(); ++i) next_gv[i] += gt[i] * d2[i] * t[i];
        }
        gt = hadamard(gt, d1);
        gv = std::move(next_gv);
        break;
      }
    }
  }
  NetworkGrads out;
  for (std::size_t l = 0; l < specs_.size(); ++l) {
    if (!specs_[l].has_parameters()) continue;
    out.params.push_back(std::move(grads[l].weight));
    out.params.push_back(std::move(grads[l].bias));
  }
  out.input = std::move(gv);
  return out;
}

void Sequential::clear_cache() noexcept {
  inputs_.clear();
  tangents_.clear();
  cache_ = Cache::none;
}

}  // namespace ufslab::numerics
