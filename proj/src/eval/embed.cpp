#include "ufslab/eval/embed.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <vector>

#include "ufslab/errors.hpp"
#include "ufslab/numerics/network.hpp"
#include "ufslab/numerics/rng.hpp"

namespace ufslab::eval {

Tensor random_feature_embed(const Tensor& images, std::uint64_t seed) {
  if (images.rank() != 4 || images.dim(1) != 1) {
    throw DimensionError("random_feature_embed expects [n x 1 x h x w] images, got " +
                         numerics::shape_to_string(images.shape()));
  }
  using numerics::LayerSpec;
  numerics::SeededRng rng(seed);
  // Unit-scale weights keep feature magnitudes comparable to pixel values.
  const numerics::Sequential net({LayerSpec::conv2d(1, 32, 3, 2), LayerSpec::leaky_relu(0.2),
                                  LayerSpec::conv2d(32, kEmbeddingDim, 3, 2), LayerSpec::leaky_relu(0.2),
                                  LayerSpec::global_sum_pool()},
                                 rng, 1.0 / 3.0);
  return net.infer(images);
}

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::filesystem::path& path) {
  T value{};
  const auto offset = in.tellg();
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T))) {
    throw ParseError(path.string() + ": truncated at byte offset " + std::to_string(static_cast<long long>(offset)));
  }
  return value;
}

}  // namespace

void write_embeddings(const std::filesystem::path& path, const Tensor& embeddings) {
  if (embeddings.rank() != 2) throw DimensionError("write_embeddings expects a matrix");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  put<std::uint64_t>(out, embeddings.dim(0));
  put<std::uint64_t>(out, embeddings.dim(1));
  out.write(reinterpret_cast<const char*>(embeddings.data()),
            static_cast<std::streamsize>(embeddings.size() * sizeof(double)));
  if (!out) throw IoError("failed writing " + path.string());
}

Tensor read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto rows = get<std::uint64_t>(in, path);
  const auto cols = get<std::uint64_t>(in, path);
  if (rows == 0 || cols == 0 || rows > (1ULL << 32) || cols > (1ULL << 20)) {
    throw ParseError(path.string() + ": implausible embedding shape at byte offset 0");
  }
  std::vector<double> data(rows * cols);
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)))) {
    throw ParseError(path.string() + ": truncated payload at byte offset 16");
  }
  return Tensor({rows, cols}, std::move(data));
}

}  // namespace ufslab::eval
