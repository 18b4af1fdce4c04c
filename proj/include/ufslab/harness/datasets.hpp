#pragma once

#include <memory>
#include <optional>

#include "ufslab/harness/config.hpp"
#include "ufslab/numerics/rng.hpp"
#include "ufslab/numerics/tensor.hpp"

namespace ufslab::harness {

using numerics::SeededRng;
using numerics::Shape;
using numerics::Tensor;

/// Seeded stream of training samples.
class SampleSource {
 public:
  virtual ~SampleSource() = default;
  virtual Tensor sample(std::size_t n) = 0;
  virtual Shape sample_shape() const = 0;
  bool is_image() const { return sample_shape().size() == 3; }
  /// Mixture centers [K x 2] for point datasets.
  virtual std::optional<Tensor> mode_centers() const { return std::nullopt; }
  virtual double mode_sigma() const { return 0.0; }
};

/// Isotropic Gaussian mixture with equal weights.
class GaussianMixtureSource : public SampleSource {
 public:
  GaussianMixtureSource(Tensor centers, double sigma, std::uint64_t seed);
  Tensor sample(std::size_t n) override;
  Shape sample_shape() const override { return {centers_.dim(1)}; }
  std::optional<Tensor> mode_centers() const override { return centers_; }
  double mode_sigma() const override { return sigma_; }

 private:
  Tensor centers_;
  double sigma_;
  SeededRng rng_;
};

/// Uniform draws with replacement from a fixed image set [N x 1 x h x w].
class ImageSetSource : public SampleSource {
 public:
  ImageSetSource(Tensor images, std::uint64_t seed);
  Tensor sample(std::size_t n) override;
  Shape sample_shape() const override;
  const Tensor& images() const noexcept { return images_; }

 private:
  Tensor images_;
  SeededRng rng_;
};

/// Procedural grayscale shapes (filled rectangle, disc or cross) on a
/// size x size canvas; background -1, foreground +1.
class SyntheticShapesSource : public SampleSource {
 public:
  SyntheticShapesSource(std::size_t size, std::uint64_t seed);
  Tensor sample(std::size_t n) override;
  Shape sample_shape() const override { return {1, size_, size_}; }

 private:
  std::size_t size_;
  SeededRng rng_;
};

/// Centers at angles k * 45 degrees on a circle of the given radius.
Tensor ring8_centers(double radius);
/// 5 x 5 grid centred on the origin.
Tensor grid25_centers(double spacing);

std::unique_ptr<SampleSource> make_dataset(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace ufslab::harness
