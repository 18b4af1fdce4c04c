#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ufslab/gan/trainer.hpp"
#include "ufslab/numerics/tensor.hpp"

namespace ufslab::harness {

using numerics::Tensor;

/// One evaluation row.
struct MetricsRecord {
  std::size_t iteration = 0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  double frechet = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double density = 0.0;
  double coverage = 0.0;
  std::size_t covered_modes = 0;
  double hq_fraction = 0.0;
  double wall_seconds = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "iteration,L_D,L_G,frechet,precision,recall,density,coverage,covered_modes,hq_fraction,wall_seconds";
/// Image runs measure the distance in random-feature space and say so.
inline constexpr const char* kImageMetricsHeader =
    "iteration,L_D,L_G,rf_frechet,precision,recall,density,coverage,covered_modes,hq_fraction,wall_seconds";

std::string format_metrics_row(const MetricsRecord& record);
/// Appends a row, writing `header` first when the file is new or empty.
void log_metrics_csv(const MetricsRecord& record, const std::filesystem::path& path,
                     const char* header = kMetricsHeader);
std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path);

/// Checkpoint contents: named f64 arrays in insertion-independent (sorted) order.
using Checkpoint = std::map<std::string, Tensor>;

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Little-endian: "UFSL", u32 version, u32 entry count, then per entry
/// u32 name length, name bytes, u32 rank, u64 extents, f64 values.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
/// Version mismatches raise ParseError stating both versions.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Parameters, optimizer moments, feature statistics and counters.
Checkpoint save_train_state(const gan::TrainState& state);
/// Overwrites the matching parts of `state`; shapes must agree.
void restore_train_state(gan::TrainState& state, const Checkpoint& checkpoint);

/// Restores only the critic parameters and feature statistics.
void restore_discriminator(gan::DiscriminatorNet& d, ufs::FeatureStats& stats, const Checkpoint& checkpoint);

/// Writes samples [n x d] as CSV rows, shortest round-trip formatting.
void write_points_csv(const std::filesystem::path& path, const Tensor& points);
/// Numeric CSV (optional non-numeric header line) -> [rows x cols].
Tensor read_points_csv(const std::filesystem::path& path);

/// Tiles images [n x 1 x h x w] into one PGM grid, mapping [-1, 1] to [0, 255].
void write_image_grid(const std::filesystem::path& path, const Tensor& images);

}  // namespace ufslab::harness
