#include "ufslab/attribution/cam.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ufslab/errors.hpp"

namespace ufslab::attribution {

std::string to_string(CamVariant variant) {
  switch (variant) {
    case CamVariant::cam: return "cam";
    case CamVariant::cam_ufs: return "cam_ufs";
    case CamVariant::cam_sup: return "cam_sup";
  }
  return "cam";
}

std::vector<AttributionMap> compute_cam(const gan::DiscriminatorNet& d, const Tensor& x,
                                        const ufs::SuppressionMatrix* s, CamVariant variant) {
  const auto& specs = d.body().specs();
  if (specs.empty() || specs.back().kind != numerics::LayerKind::global_sum_pool) {
    throw ContractError("compute_cam: critic body has no global_sum_pool stage (MLP bodies are unsupported)");
  }
  if (variant != CamVariant::cam && s == nullptr) {
    throw ContractError("compute_cam: " + to_string(variant) + " needs a suppression matrix");
  }
  d.check_input(x);
  const Tensor maps = d.body().infer(x, specs.size() - 1);
  const std::size_t n = maps.dim(0), channels = maps.dim(1), h = maps.dim(2), w = maps.dim(3);
  if (s && s->values.shape() != numerics::Shape{n, channels}) {
    throw DimensionError("compute_cam: S " + numerics::shape_to_string(s->values.shape()) + " does not match " +
                         std::to_string(n) + " samples x " + std::to_string(channels) + " channels");
  }
  const Tensor& weight = d.head_weight();
  std::vector<AttributionMap> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    AttributionMap map{variant, Tensor({h, w})};
    for (std::size_t c = 0; c < channels; ++c) {
      double mask = 1.0;
      if (variant == CamVariant::cam_ufs) mask = s->values.at(i, c);
      if (variant == CamVariant::cam_sup) mask = 1.0 - s->values.at(i, c);
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t xx = 0; xx < w; ++xx) map.values.at(y, xx) += maps.at(i, c, y, xx) * mask * weight[c];
      }
    }
    out.push_back(std::move(map));
  }
  return out;
}

Tensor upsample_nearest(const Tensor& map, std::size_t factor_h, std::size_t factor_w) {
  if (map.rank() != 2) throw DimensionError("upsample_nearest expects a 2-D map");
  if (factor_h == 0 || factor_w == 0) throw ContractError("upsample_nearest: factors must be positive");
  Tensor out({map.dim(0) * factor_h, map.dim(1) * factor_w});
  for (std::size_t y = 0; y < out.dim(0); ++y) {
    for (std::size_t x = 0; x < out.dim(1); ++x) out.at(y, x) = map.at(y / factor_h, x / factor_w);
  }
  return out;
}

PgmImage normalize_to_pgm(const Tensor& map) {
  if (map.rank() != 2) throw DimensionError("normalize_to_pgm expects a 2-D map");
  numerics::require_finite(map, "normalize_to_pgm");
  PgmImage image{map.dim(1), map.dim(0), std::vector<std::uint8_t>(map.size(), 128)};
  const auto [lo, hi] = std::minmax_element(map.values().begin(), map.values().end());
  const double range = *hi - *lo;
  if (range > 0.0) {
    for (std::size_t i = 0; i < map.size(); ++i) {
      image.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (map[i] - *lo) / range));
    }
  }
  return image;
}

void write_pgm(const std::filesystem::path& path, const PgmImage& image) {
  if (image.pixels.size() != image.width * image.height) throw DimensionError("write_pgm: pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  std::size_t width = 0, height = 0, maxval = 0;
  in >> magic >> width >> height >> maxval;
  if (!in || magic != "P5" || maxval != 255 || width == 0 || height == 0) {
    throw ParseError(path.string() + ": not an 8-bit binary PGM (header ends near byte offset " +
                     std::to_string(static_cast<long long>(in.tellg())) + ")");
  }
  in.get();
  PgmImage image{width, height, std::vector<std::uint8_t>(width * height)};
  if (!in.read(reinterpret_cast<char*>(image.pixels.data()), static_cast<std::streamsize>(image.pixels.size()))) {
    throw ParseError(path.string() + ": truncated pixel data");
  }
  return image;
}

void heatmap_to_pgm(const AttributionMap& map, const std::filesystem::path& path) {
  write_pgm(path, normalize_to_pgm(map.values));
}

std::string cam_filename(const std::string& run_id, std::size_t sample, CamVariant variant) {
  std::ostringstream name;
  name << run_id << '_' << sample << '_' << to_string(variant) << ".pgm";
  return name.str();
}

}  // namespace ufslab::attribution
