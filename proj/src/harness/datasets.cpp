#include "ufslab/harness/datasets.hpp"

#include <cmath>
#include <numbers>

#include "ufslab/errors.hpp"
#include "ufslab/harness/idx.hpp"
#include "ufslab/selection/selection.hpp"

namespace ufslab::harness {

GaussianMixtureSource::GaussianMixtureSource(Tensor centers, double sigma, std::uint64_t seed)
    : centers_(std::move(centers)), sigma_(sigma), rng_(seed) {
  if (centers_.rank() != 2) throw DimensionError("mixture centers must be [K x d]");
  if (!(sigma_ > 0.0)) throw ContractError("mixture sigma must be positive");
}

Tensor GaussianMixtureSource::sample(std::size_t n) {
  const std::size_t d = centers_.dim(1);
  Tensor out({n, d});
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t mode = rng_.uniform_index(centers_.dim(0));
    for (std::size_t j = 0; j < d; ++j) out.at(i, j) = centers_.at(mode, j) + sigma_ * rng_.normal();
  }
  return out;
}

ImageSetSource::ImageSetSource(Tensor images, std::uint64_t seed) : images_(std::move(images)), rng_(seed) {
  if (images_.rank() != 4 || images_.dim(1) != 1) throw DimensionError("image set must be [N x 1 x h x w]");
}

Tensor ImageSetSource::sample(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng_.uniform_index(images_.dim(0));
  return images_.gather_rows(idx);
}

Shape ImageSetSource::sample_shape() const { return {1, images_.dim(2), images_.dim(3)}; }

SyntheticShapesSource::SyntheticShapesSource(std::size_t size, std::uint64_t seed) : size_(size), rng_(seed) {
  if (size_ < 8) throw ContractError("synthetic shapes need a canvas of at least 8 pixels");
}

Tensor SyntheticShapesSource::sample(std::size_t n) {
  Tensor out({n, 1, size_, size_}, -1.0);
  const double s = static_cast<double>(size_);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t kind = rng_.uniform_index(3);
    const double cx = s * (0.3 + 0.4 * rng_.uniform());
    const double cy = s * (0.3 + 0.4 * rng_.uniform());
    const double extent = s * (0.15 + 0.15 * rng_.uniform());
    for (std::size_t y = 0; y < size_; ++y) {
      for (std::size_t x = 0; x < size_; ++x) {
        const double dx = static_cast<double>(x) + 0.5 - cx;
        const double dy = static_cast<double>(y) + 0.5 - cy;
        bool inside = false;
        switch (kind) {
          case 0: inside = std::abs(dx) <= extent && std::abs(dy) <= extent; break;
          case 1: inside = dx * dx + dy * dy <= extent * extent; break;
          default:
            inside = (std::abs(dx) <= extent && std::abs(dy) <= extent / 3.0) ||
                     (std::abs(dy) <= extent && std::abs(dx) <= extent / 3.0);
            break;
        }
        if (inside) out.at(i, 0, y, x) = 1.0;
      }
    }
  }
  return out;
}

Tensor ring8_centers(double radius) {
  Tensor centers({8, 2});
  for (std::size_t k = 0; k < 8; ++k) {
    const double angle = static_cast<double>(k) * std::numbers::pi / 4.0;
    centers.at(k, 0) = radius * std::cos(angle);
    centers.at(k, 1) = radius * std::sin(angle);
  }
  return centers;
}

Tensor grid25_centers(double spacing) {
  Tensor centers({25, 2});
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      centers.at(i * 5 + j, 0) = (static_cast<double>(i) - 2.0) * spacing;
      centers.at(i * 5 + j, 1) = (static_cast<double>(j) - 2.0) * spacing;
    }
  }
  return centers;
}

std::unique_ptr<SampleSource> make_dataset(const ExperimentConfig& cfg, std::uint64_t seed) {
  const DatasetParams& p = cfg.dataset_params;
  switch (cfg.dataset) {
    case DatasetKind::ring8:
      return std::make_unique<GaussianMixtureSource>(ring8_centers(p.mode_radius), p.mode_sigma, seed);
    case DatasetKind::grid25:
      return std::make_unique<GaussianMixtureSource>(grid25_centers(p.grid_spacing), p.grid_sigma, seed);
    case DatasetKind::synthetic_shapes:
      return std::make_unique<SyntheticShapesSource>(p.image_size, seed);
    case DatasetKind::idx_images: {
      Tensor images = idx_to_images(read_idx(p.image_path));
      if (p.instance_selection) {
        const auto kept = selection::instance_select(images, *p.instance_selection);
        images = images.gather_rows(kept);
      }
      return std::make_unique<ImageSetSource>(std::move(images), seed);
    }
  }
  throw ContractError("unknown dataset kind");
}

}  // namespace ufslab::harness
