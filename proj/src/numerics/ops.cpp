#include "ufslab/numerics/ops.hpp"

#include <cmath>

#include <Eigen/Core>

#include "ufslab/errors.hpp"

namespace ufslab::numerics {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

void require_rank(const Tensor& t, std::size_t rank, const char* op, const char* name) {
  if (t.rank() != rank) {
    throw DimensionError(std::string(op) + ": " + name + " must have rank " + std::to_string(rank) + ", got " +
                         shape_to_string(t.shape()));
  }
}

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}

MutMap as_matrix(Tensor& t) {
  return MutMap(t.data(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(1)));
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + shape_to_string(a.shape()) + " and " +
                       shape_to_string(b.shape()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul", "a");
  require_rank(b, 2, "matmul", "b");
  if (a.dim(1) != b.dim(0)) mismatch("matmul", a, b);
  Tensor out({a.dim(0), b.dim(1)});
  as_matrix(out).noalias() = as_matrix(a) * as_matrix(b);
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul_tn", "a");
  require_rank(b, 2, "matmul_tn", "b");
  if (a.dim(0) != b.dim(0)) mismatch("matmul_tn", a, b);
  Tensor out({a.dim(1), b.dim(1)});
  as_matrix(out).noalias() = as_matrix(a).transpose() * as_matrix(b);
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul_nt", "a");
  require_rank(b, 2, "matmul_nt", "b");
  if (a.dim(1) != b.dim(1)) mismatch("matmul_nt", a, b);
  Tensor out({a.dim(0), b.dim(0)});
  as_matrix(out).noalias() = as_matrix(a) * as_matrix(b).transpose();
  return out;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose", "a");
  Tensor out({a.dim(1), a.dim(0)});
  as_matrix(out) = as_matrix(a).transpose();
  return out;
}

namespace {

struct ConvGeometry {
  std::size_t n, c, h, w, o, kh, kw, oh, ow;
};

ConvGeometry conv_geometry(const Tensor& input, const Tensor& kernel, std::size_t stride, const char* op) {
  require_rank(input, 4, op, "input");
  require_rank(kernel, 4, op, "kernel");
  if (stride == 0) throw ContractError(std::string(op) + ": stride must be positive");
  ConvGeometry g{input.dim(0), input.dim(1), input.dim(2), input.dim(3), kernel.dim(0), kernel.dim(2), kernel.dim(3), 0, 0};
  if (kernel.dim(1) != g.c) {
    throw DimensionError(std::string(op) + ": kernel " + shape_to_string(kernel.shape()) + " expects " +
                         std::to_string(kernel.dim(1)) + " input channels, input " + shape_to_string(input.shape()) +
                         " has " + std::to_string(g.c));
  }
  if (g.kh > g.h || g.kw > g.w) {
    throw DimensionError(std::string(op) + ": kernel " + shape_to_string(kernel.shape()) + " larger than input " +
                         shape_to_string(input.shape()));
  }
  g.oh = (g.h - g.kh) / stride + 1;
  g.ow = (g.w - g.kw) / stride + 1;
  return g;
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& kernel, std::size_t stride) {
  const ConvGeometry g = conv_geometry(input, kernel, stride, "conv2d_forward");
  Tensor out({g.n, g.o, g.oh, g.ow});
  // Accumulation order: channel, kernel row, kernel column.
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t o = 0; o < g.o; ++o) {
      for (std::size_t y = 0; y < g.oh; ++y) {
        for (std::size_t x = 0; x < g.ow; ++x) {
          double acc = 0.0;
          for (std::size_t c = 0; c < g.c; ++c) {
            for (std::size_t i = 0; i < g.kh; ++i) {
              for (std::size_t j = 0; j < g.kw; ++j) {
                acc += input.at(n, c, y * stride + i, x * stride + j) * kernel.at(o, c, i, j);
              }
            }
          }
          out.at(n, o, y, x) = acc;
        }
      }
    }
  }
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel, std::size_t stride, const Tensor& upstream) {
  const ConvGeometry g = conv_geometry(input, kernel, stride, "conv2d_backward");
  if (upstream.shape() != Shape{g.n, g.o, g.oh, g.ow}) mismatch("conv2d_backward upstream", upstream, input);
  Conv2dGrads grads{Tensor(input.shape()), Tensor(kernel.shape())};
  for (std::size_t n = 0; n < g.n; ++n) {
    for (std::size_t o = 0; o < g.o; ++o) {
      for (std::size_t y = 0; y < g.oh; ++y) {
        for (std::size_t x = 0; x < g.ow; ++x) {
          const double up = upstream.at(n, o, y, x);
          if (up == 0.0) continue;
          for (std::size_t c = 0; c < g.c; ++c) {
            for (std::size_t i = 0; i < g.kh; ++i) {
              for (std::size_t j = 0; j < g.kw; ++j) {
                grads.kernel.at(o, c, i, j) += up * input.at(n, c, y * stride + i, x * stride + j);
                grads.input.at(n, c, y * stride + i, x * stride + j) += up * kernel.at(o, c, i, j);
              }
            }
          }
        }
      }
    }
  }
  return grads;
}

namespace {

void check_slope(Activation kind, double slope) {
  if (kind == Activation::leaky_relu && !(slope > 0.0 && slope < 1.0)) {
    throw ContractError("leaky_relu slope must lie in (0, 1), got " + std::to_string(slope));
  }
}

}  // namespace

Tensor activation_forward(const Tensor& x, Activation kind, double slope) {
  check_slope(kind, slope);
  require_finite(x, "activation_forward input");
  Tensor out(x.shape());
  auto src = x.values();
  auto dst = out.values();
  switch (kind) {
    case Activation::relu:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
      break;
    case Activation::leaky_relu:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= 0.0 ? src[i] : slope * src[i];
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::tanh(src[i]);
      break;
  }
  return out;
}

Tensor activation_derivative(const Tensor& x, Activation kind, double slope) {
  check_slope(kind, slope);
  Tensor out(x.shape());
  auto src = x.values();
  auto dst = out.values();
  switch (kind) {
    case Activation::relu:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? 1.0 : 0.0;
      break;
    case Activation::leaky_relu:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] >= 0.0 ? 1.0 : slope;
      break;
    case Activation::tanh:
      for (std::size_t i = 0; i < src.size(); ++i) {
        const double t = std::tanh(src[i]);
        dst[i] = 1.0 - t * t;
      }
      break;
  }
  return out;
}

Tensor activation_second_derivative(const Tensor& x, Activation kind) {
  Tensor out(x.shape());
  if (kind != Activation::tanh) return out;
  auto src = x.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const double t = std::tanh(src[i]);
    dst[i] = -2.0 * t * (1.0 - t * t);
  }
  return out;
}

Tensor global_sum_pool(const Tensor& x) {
  require_rank(x, 4, "global_sum_pool", "input");
  const std::size_t n = x.dim(0), c = x.dim(1), spatial = x.dim(2) * x.dim(3);
  Tensor out({n, c});
  const double* src = x.data();
  for (std::size_t i = 0; i < n * c; ++i) {
    double acc = 0.0;
    for (std::size_t s = 0; s < spatial; ++s) acc += src[i * spatial + s];
    out[i] = acc;
  }
  return out;
}

}  // namespace ufslab::numerics
