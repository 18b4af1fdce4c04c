#include "ufslab/numerics/finite_diff.hpp"

#include <algorithm>
#include <cmath>

#include "ufslab/errors.hpp"

namespace ufslab::numerics {

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double h) {
  if (!(h > 0.0)) throw ContractError("finite_diff_grad: step h must be positive");
  Tensor grad(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

Tensor finite_diff_grad(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double h) {
  return finite_diff_grad(
      std::function<double(const Tensor&)>([&f](const Tensor& p) {
        const Tensor out = f(p);
        if (out.size() != 1) {
          throw ContractError("finite_diff_grad: f must be scalar, returned shape " + shape_to_string(out.shape()));
        }
        return out[0];
      }),
      x, h);
}

double max_relative_error(const Tensor& a, const Tensor& b, double floor) {
  if (a.shape() != b.shape()) {
    throw DimensionError("max_relative_error: " + shape_to_string(a.shape()) + " vs " + shape_to_string(b.shape()));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace ufslab::numerics
