#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "ufslab/numerics/tensor.hpp"

namespace ufslab::harness {

/// Unsigned-byte IDX array: magic 0x00 0x00 0x08 <ndims>, big-endian u32
/// extents, then the payload.
struct IdxArray {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> data;
};

/// Parses an IDX file; malformed headers raise ParseError with the byte offset.
IdxArray read_idx(const std::filesystem::path& path);
IdxArray parse_idx(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>");
std::vector<std::uint8_t> encode_idx(const IdxArray& array);
void write_idx(const std::filesystem::path& path, const IdxArray& array);

/// [N x h x w] bytes -> [N x 1 x h x w] doubles in [-1, 1].
numerics::Tensor idx_to_images(const IdxArray& array);
/// Inverse of idx_to_images with clamping and rounding.
IdxArray images_to_idx(const numerics::Tensor& images);

}  // namespace ufslab::harness
