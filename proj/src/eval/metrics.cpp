#include "ufslab/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "ufslab/errors.hpp"

namespace ufslab::eval {

using numerics::shape_to_string;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_points(const Tensor& t, const char* op, const char* name) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(op) + ": " + name + " must be [m x d], got " + shape_to_string(t.shape()));
  }
}

Eigen::MatrixXd to_eigen(const Tensor& t) {
  return Eigen::Map<const RowMatrix>(t.data(), static_cast<Eigen::Index>(t.dim(0)),
                                     static_cast<Eigen::Index>(t.dim(1)));
}

constexpr double kClip = 1e-10;

Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (m + m.transpose()));
  if (solver.info() != Eigen::Success) throw NumericError("frechet_distance: eigendecomposition failed");
  Eigen::VectorXd values = solver.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    if (values(i) < -kClip * std::max(1.0, values.cwiseAbs().maxCoeff())) {
      throw NumericError("frechet_distance: covariance is not positive semi-definite (eigenvalue " +
                         std::to_string(values(i)) + ")");
    }
    values(i) = std::sqrt(std::max(values(i), 0.0));
  }
  return solver.eigenvectors() * values.asDiagonal() * solver.eigenvectors().transpose();
}

double trace_sqrt_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const Eigen::MatrixXd root_a = symmetric_sqrt(a);
  const Eigen::MatrixXd inner = root_a * b * root_a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (inner + inner.transpose()), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("frechet_distance: eigendecomposition failed");
  double trace = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    trace += std::sqrt(std::max(solver.eigenvalues()(i), 0.0));
  }
  return trace;
}

}  // namespace

GaussianFit fit_gaussian(const Tensor& samples) {
  require_points(samples, "fit_gaussian", "samples");
  const std::size_t m = samples.dim(0), d = samples.dim(1);
  if (m < 2) throw ContractError("fit_gaussian: need at least 2 samples");
  GaussianFit fit{Tensor({d}), Tensor({d, d})};
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) fit.mean[j] += samples.at(i, j);
  }
  for (double& v : fit.mean.values()) v /= static_cast<double>(m);
  std::vector<double> centered(d);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < d; ++j) centered[j] = samples.at(i, j) - fit.mean[j];
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t b = a; b < d; ++b) fit.covariance.at(a, b) += centered[a] * centered[b];
    }
  }
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = a; b < d; ++b) {
      const double v = fit.covariance.at(a, b) / static_cast<double>(m - 1);
      fit.covariance.at(a, b) = v;
      fit.covariance.at(b, a) = v;
    }
  }
  return fit;
}

double frechet_distance(const GaussianFit& a, const GaussianFit& b) {
  const std::size_t d = a.mean.size();
  if (b.mean.size() != d || a.covariance.shape() != numerics::Shape{d, d} ||
      b.covariance.shape() != numerics::Shape{d, d}) {
    throw ContractError("frechet_distance: dimension mismatch between fits");
  }
  double mean_term = 0.0;
  for (std::size_t j = 0; j < d; ++j) mean_term += (a.mean[j] - b.mean[j]) * (a.mean[j] - b.mean[j]);
  const Eigen::MatrixXd sa = to_eigen(a.covariance);
  const Eigen::MatrixXd sb = to_eigen(b.covariance);
  const double value = mean_term + sa.trace() + sb.trace() - 2.0 * trace_sqrt_product(sa, sb);
  if (!std::isfinite(value)) throw NumericError("frechet_distance: non-finite result");
  return std::max(value, 0.0);
}

namespace {

double squared_distance(const Tensor& a, std::size_t i, const Tensor& b, std::size_t j) {
  double acc = 0.0;
  const std::size_t d = a.dim(1);
  const double* pa = a.data() + i * d;
  const double* pb = b.data() + j * d;
  for (std::size_t q = 0; q < d; ++q) {
    const double diff = pa[q] - pb[q];
    acc += diff * diff;
  }
  return acc;
}

/// Squared distance to the k-th nearest other point of the same set.
std::vector<double> knn_radii_squared(const Tensor& points, std::size_t k) {
  const std::size_t n = points.dim(0);
  std::vector<double> radii(n), row(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t pos = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) row[pos++] = squared_distance(points, i, points, j);
    }
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    radii[i] = row[k - 1];
  }
  return radii;
}

}  // namespace

ManifoldMetrics manifold_metrics(const Tensor& real, const Tensor& fake, std::size_t k) {
  require_points(real, "manifold_metrics", "real");
  require_points(fake, "manifold_metrics", "fake");
  if (real.dim(1) != fake.dim(1)) throw DimensionError("manifold_metrics: real and fake dimensions differ");
  const std::size_t m = real.dim(0), n = fake.dim(0);
  if (k < 1 || k >= m || k >= n) {
    throw ContractError("manifold_metrics: need 1 <= k < min(M, N), got k = " + std::to_string(k));
  }
  const std::vector<double> real_radii = knn_radii_squared(real, k);
  const std::vector<double> fake_radii = knn_radii_squared(fake, k);

  std::size_t precise = 0, recalled = 0, covered = 0;
  std::size_t ball_hits = 0;
  std::vector<char> real_recalled(m, 0), real_covered(m, 0);
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < m; ++i) {
      const double dist = squared_distance(real, i, fake, j);
      if (dist <= real_radii[i]) {
        ++hits;
        real_covered[i] = 1;
      }
      if (dist <= fake_radii[j]) real_recalled[i] = 1;
    }
    if (hits > 0) ++precise;
    ball_hits += hits;
  }
  for (std::size_t i = 0; i < m; ++i) {
    recalled += real_recalled[i];
    covered += real_covered[i];
  }
  ManifoldMetrics out;
  out.precision = static_cast<double>(precise) / static_cast<double>(n);
  out.recall = static_cast<double>(recalled) / static_cast<double>(m);
  out.density = static_cast<double>(ball_hits) / (static_cast<double>(k) * static_cast<double>(n));
  out.coverage = static_cast<double>(covered) / static_cast<double>(m);
  return out;
}

ModeCoverage mode_coverage(const Tensor& samples, const Tensor& centers, double sigma, double thresh_sigmas) {
  require_points(samples, "mode_coverage", "samples");
  require_points(centers, "mode_coverage", "centers");
  if (centers.dim(0) < 1) throw ContractError("mode_coverage: need at least one center");
  if (!(sigma > 0.0)) throw ContractError("mode_coverage: sigma must be positive");
  if (samples.dim(1) != centers.dim(1)) throw DimensionError("mode_coverage: sample and center dimensions differ");
  const double limit = thresh_sigmas * sigma;
  std::vector<char> covered(centers.dim(0), 0);
  std::size_t good = 0;
  for (std::size_t i = 0; i < samples.dim(0); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_center = 0;
    for (std::size_t c = 0; c < centers.dim(0); ++c) {
      const double dist = squared_distance(samples, i, centers, c);
      if (dist < best) {
        best = dist;
        best_center = c;
      }
    }
    if (std::sqrt(best) <= limit) {
      ++good;
      covered[best_center] = 1;
    }
  }
  ModeCoverage out;
  out.covered_modes = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), 1));
  out.high_quality_fraction = samples.dim(0) ? static_cast<double>(good) / static_cast<double>(samples.dim(0)) : 0.0;
  return out;
}

}  // namespace ufslab::eval
