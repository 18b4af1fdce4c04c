#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ufslab/numerics/rng.hpp"
#include "ufslab/numerics/tensor.hpp"

namespace ufslab::selection {

using numerics::SeededRng;
using numerics::Tensor;

enum class SelectionMode { top, bottom, random, none };

std::string to_string(SelectionMode mode);
SelectionMode selection_mode_from_string(const std::string& name);

/// Sample-level gradient selection with a linearly annealed k.
struct SelectionConfig {
  SelectionMode mode = SelectionMode::none;
  std::size_t k_start = 64;
  std::size_t k_end = 32;
  double anneal_fraction = 0.5;

  /// 1 <= k_end <= k_start <= batch_size and anneal_fraction in (0, 1].
  void validate(std::size_t batch_size) const;
};

/// Indices (ascending) of the k samples kept for the generator loss.
/// top: k largest scores, bottom: k smallest, random: uniform without
/// replacement, none: every index. Ties go to the lower index.
std::vector<std::size_t> select_indices(std::span<const double> scores, std::size_t k, SelectionMode mode,
                                        SeededRng& rng);

/// k_start -> k_end linearly over the first anneal_fraction * T iterations,
/// rounded to the nearest integer, then held at k_end.
std::size_t anneal_k(const SelectionConfig& cfg, std::size_t t, std::size_t total);

enum class CovarianceMode { full_shrinkage, diagonal };

std::string to_string(CovarianceMode mode);
CovarianceMode covariance_mode_from_string(const std::string& name);

struct InstanceSelectionConfig {
  double retention_ratio = 0.5;
  std::uint64_t embedder_seed = 0;
  CovarianceMode covariance = CovarianceMode::full_shrinkage;
};

/// Gaussian log-density of each row of `embeddings` under a fit to all rows.
/// The covariance gets delta * I with delta = 1e-6 * trace / dim.
std::vector<double> gaussian_log_density(const Tensor& embeddings, CovarianceMode mode);

/// Keeps the ceil(retention * N) highest-density samples (ascending indices).
/// Rank-2 datasets are scored on their raw coordinates; image batches
/// [N x 1 x h x w] go through the random-feature embedder first.
std::vector<std::size_t> instance_select(const Tensor& dataset, const InstanceSelectionConfig& cfg);

/// Newline-delimited decimal indices.
void write_index_list(const std::filesystem::path& path, std::span<const std::size_t> indices);
std::vector<std::size_t> read_index_list(const std::filesystem::path& path);

}  // namespace ufslab::selection
