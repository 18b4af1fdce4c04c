#pragma once

#include <cstddef>

#include "ufslab/numerics/tensor.hpp"

namespace ufslab::numerics {

/// a[m x k] * b[k x n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// a^T * b for a[k x m], b[k x n].
Tensor matmul_tn(const Tensor& a, const Tensor& b);
/// a * b^T for a[m x k], b[n x k].
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

/// Valid (unpadded) 2-D cross-correlation: the kernel is not flipped.
/// input [n x c x h x w], kernel [o x c x kh x kw] -> [n x o x h' x w'] with
/// h' = (h - kh) / stride + 1.
Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, std::size_t stride);

struct Conv2dGrads {
  Tensor input;
  Tensor kernel;
};

/// Gradients of sum(upstream * conv2d_forward(input, kernel, stride)).
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel, std::size_t stride, const Tensor& upstream);

enum class Activation { relu, leaky_relu, tanh };

Tensor activation_forward(const Tensor& x, Activation kind, double slope = 0.2);
/// Elementwise phi'(x), evaluated at the pre-activation x. For the
/// piecewise-linear kinds the derivative at 0 is taken from the right.
Tensor activation_derivative(const Tensor& x, Activation kind, double slope = 0.2);
/// Elementwise phi''(x); zero for the piecewise-linear kinds.
Tensor activation_second_derivative(const Tensor& x, Activation kind);

/// [n x c x h x w] -> [n x c], summing over spatial positions.
Tensor global_sum_pool(const Tensor& x);

}  // namespace ufslab::numerics
