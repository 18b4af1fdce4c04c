#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ufslab/gan/trainer.hpp"
#include "ufslab/selection/selection.hpp"
#include "ufslab/ufs/ufs.hpp"

namespace ufslab::harness {

enum class DatasetKind { ring8, grid25, idx_images, synthetic_shapes };

std::string to_string(DatasetKind kind);
DatasetKind dataset_kind_from_string(const std::string& name);

struct DatasetParams {
  double mode_radius = 2.0;  // ring8
  double mode_sigma = 0.02;  // ring8; grid25 uses grid_sigma
  double grid_spacing = 2.0;
  double grid_sigma = 0.05;
  std::string image_path;  // idx_images
  std::size_t image_size = 16;  // synthetic_shapes
  std::optional<selection::InstanceSelectionConfig> instance_selection;
};

struct EvalConfig {
  std::size_t cadence = 250;
  std::size_t samples = 2000;
  std::size_t k = 3;
  double hq_thresh_sigmas = 3.0;
  std::size_t dump_samples = 64;
};

/// Declarative description of one run; JSON field names mirror these members.
struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::ring8;
  DatasetParams dataset_params;
  gan::TrainConfig train;
  EvalConfig eval;
  std::string output_dir = "runs/default";
  std::uint64_t seed = 7;

  /// Checks ranges and that referenced files exist.
  void validate() const;
};

/// Strict parse: unknown keys raise ParseError naming the key path.
ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg);

/// Applies "a.b.c=value" overrides; value is parsed as JSON when possible,
/// otherwise taken as a string. Missing intermediate objects are created.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace ufslab::harness
