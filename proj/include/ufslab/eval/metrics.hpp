#pragma once

#include <cstddef>

#include "ufslab/numerics/tensor.hpp"

namespace ufslab::eval {

using numerics::Tensor;

struct GaussianFit {
  Tensor mean;        // [d]
  Tensor covariance;  // [d x d], symmetric PSD
};

/// Sample mean and unbiased (m - 1) covariance of [m x d] samples, m >= 2.
GaussianFit fit_gaussian(const Tensor& samples);

/// ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}).
///
/// The trace of the product root is taken as tr((A^{1/2} S_b A^{1/2})^{1/2})
/// with A^{1/2} = S_a^{1/2}, both roots from symmetric eigendecompositions;
/// eigenvalues in [-1e-10, 0) are clipped to zero, anything more negative is
/// a NumericError.
double frechet_distance(const GaussianFit& a, const GaussianFit& b);

struct ManifoldMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double density = 0.0;
  double coverage = 0.0;
};

/// k-NN precision, recall, density and coverage by brute-force distances.
///
/// Each point's ball radius is the distance to its k-th nearest neighbour in
/// its own set (itself excluded); balls are closed.
ManifoldMetrics manifold_metrics(const Tensor& real, const Tensor& fake, std::size_t k = 3);

struct ModeCoverage {
  std::size_t covered_modes = 0;
  double high_quality_fraction = 0.0;
};

/// A 2-D sample is high quality when its nearest center lies within
/// thresh_sigmas * sigma; a mode is covered when one such sample maps to it.
ModeCoverage mode_coverage(const Tensor& samples, const Tensor& centers, double sigma, double thresh_sigmas = 3.0);

}  // namespace ufslab::eval
