#include "ufslab/harness/idx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "ufslab/errors.hpp"

namespace ufslab::harness {

namespace {

[[noreturn]] void fail(const std::string& source, std::size_t offset, const std::string& what) {
  throw ParseError(source + ": " + what + " at byte offset " + std::to_string(offset));
}

}  // namespace

IdxArray parse_idx(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < 4) fail(source, bytes.size(), "truncated IDX magic");
  if (bytes[0] != 0 || bytes[1] != 0) fail(source, bytes[0] != 0 ? 0 : 1, "IDX magic must start with two zero bytes");
  if (bytes[2] != 0x08) fail(source, 2, "unsupported IDX element type (only unsigned byte 0x08 is supported)");
  const std::size_t ndims = bytes[3];
  if (ndims == 0) fail(source, 3, "IDX array needs at least one dimension");
  IdxArray array;
  std::size_t offset = 4;
  std::size_t count = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    if (offset + 4 > bytes.size()) fail(source, offset, "truncated IDX dimension");
    const std::uint32_t extent = (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
                                 (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
    if (extent == 0) fail(source, offset, "zero IDX dimension");
    array.dims.push_back(extent);
    count *= extent;
    offset += 4;
  }
  if (bytes.size() - offset != count) {
    fail(source, offset,
         "IDX payload holds " + std::to_string(bytes.size() - offset) + " bytes, header promises " +
             std::to_string(count));
  }
  array.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset), bytes.end());
  return array;
}

IdxArray read_idx(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_idx(bytes, path.string());
}

std::vector<std::uint8_t> encode_idx(const IdxArray& array) {
  std::vector<std::uint8_t> out{0, 0, 0x08, static_cast<std::uint8_t>(array.dims.size())};
  for (std::uint32_t extent : array.dims) {
    out.push_back(static_cast<std::uint8_t>(extent >> 24));
    out.push_back(static_cast<std::uint8_t>(extent >> 16));
    out.push_back(static_cast<std::uint8_t>(extent >> 8));
    out.push_back(static_cast<std::uint8_t>(extent));
  }
  out.insert(out.end(), array.data.begin(), array.data.end());
  return out;
}

void write_idx(const std::filesystem::path& path, const IdxArray& array) {
  const auto bytes = encode_idx(array);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

numerics::Tensor idx_to_images(const IdxArray& array) {
  if (array.dims.size() != 3) {
    throw DimensionError("expected an [N x h x w] IDX image array, got " + std::to_string(array.dims.size()) + " dims");
  }
  numerics::Tensor images({array.dims[0], 1, array.dims[1], array.dims[2]});
  for (std::size_t i = 0; i < array.data.size(); ++i) images[i] = array.data[i] / 127.5 - 1.0;
  return images;
}

IdxArray images_to_idx(const numerics::Tensor& images) {
  if (images.rank() != 4 || images.dim(1) != 1) throw DimensionError("images_to_idx expects [N x 1 x h x w]");
  IdxArray array;
  array.dims = {static_cast<std::uint32_t>(images.dim(0)), static_cast<std::uint32_t>(images.dim(2)),
                static_cast<std::uint32_t>(images.dim(3))};
  array.data.resize(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const double v = std::clamp((images[i] + 1.0) * 127.5, 0.0, 255.0);
    array.data[i] = static_cast<std::uint8_t>(std::lround(v));
  }
  return array;
}

}  // namespace ufslab::harness
