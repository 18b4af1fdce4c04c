#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ufslab/gan/networks.hpp"
#include "ufslab/ufs/ufs.hpp"

namespace ufslab::attribution {

using numerics::Tensor;

enum class CamVariant { cam, cam_ufs, cam_sup };

std::string to_string(CamVariant variant);

/// Spatial map [h' x w'] over the critic's pre-pool feature map.
struct AttributionMap {
  CamVariant variant = CamVariant::cam;
  Tensor values;
};

/// Per position (i, j): <Y~_ij, w>, <Y~_ij (x) S, w> or <Y~_ij (x) (1 - S), w>
/// with S[n] broadcast over positions. The head bias is not included.
///
/// The critic body must end in global_sum_pool (otherwise ContractError);
/// the masked variants need S, one row per sample.
std::vector<AttributionMap> compute_cam(const gan::DiscriminatorNet& d, const Tensor& x,
                                        const ufs::SuppressionMatrix* s, CamVariant variant);

/// Nearest-neighbour enlargement by integer factors.
Tensor upsample_nearest(const Tensor& map, std::size_t factor_h, std::size_t factor_w);

struct PgmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

/// Min-max normalization to [0, 255] with rounding; constant maps give 128.
PgmImage normalize_to_pgm(const Tensor& map);

/// Binary P5, maxval 255.
void write_pgm(const std::filesystem::path& path, const PgmImage& image);
PgmImage read_pgm(const std::filesystem::path& path);

void heatmap_to_pgm(const AttributionMap& map, const std::filesystem::path& path);

/// "<runid>_<sample>_<variant>.pgm"
std::string cam_filename(const std::string& run_id, std::size_t sample, CamVariant variant);

}  // namespace ufslab::attribution
