#pragma once

#include <cstdint>
#include <filesystem>

#include "ufslab/numerics/tensor.hpp"

namespace ufslab::eval {

using numerics::Tensor;

inline constexpr std::size_t kEmbeddingDim = 64;

/// Fixed random convolutional features for [n x 1 x h x w] images: two
/// seeded stride-2 3x3 convolutions (1->32->64, leaky 0.2, zero biases)
/// followed by global_sum_pool, giving [n x 64]. Deterministic per seed.
Tensor random_feature_embed(const Tensor& images, std::uint64_t seed);

/// Flat little-endian binary: u64 rows, u64 cols, then rows*cols f64.
void write_embeddings(const std::filesystem::path& path, const Tensor& embeddings);
Tensor read_embeddings(const std::filesystem::path& path);

}  // namespace ufslab::eval
