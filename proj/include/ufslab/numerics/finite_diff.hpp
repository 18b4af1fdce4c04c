#pragma once

#include <functional>

#include "ufslab/numerics/tensor.hpp"

namespace ufslab::numerics {

/// Central-difference gradient (f(x + h e_i) - f(x - h e_i)) / 2h of a
/// scalar-valued f. A tensor-valued f must return exactly one element,
/// otherwise ContractError.
Tensor finite_diff_grad(const std::function<Tensor(const Tensor&)>& f, const Tensor& x, double h = 1e-5);
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x, double h = 1e-5);

/// max |a - b| / max(|a|, |b|, floor) over all entries.
double max_relative_error(const Tensor& a, const Tensor& b, double floor = 1e-8);

}  // namespace ufslab::numerics
