#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ufslab/gan/trainer.hpp"
#include "ufslab/harness/config.hpp"
#include "ufslab/harness/datasets.hpp"
#include "ufslab/harness/io.hpp"

namespace ufslab::harness {

/// Embedder seed for image-space metrics; fixed so runs stay comparable.
inline constexpr std::uint64_t kEvalEmbedderSeed = 0;

gan::Architecture architecture_for(const SampleSource& source);

/// Training config with the experiment seed applied.
gan::TrainConfig effective_train_config(const ExperimentConfig& cfg);

struct RunSummary {
  int exit_status = 0;  // 0 ok, 3 aborted on a non-finite loss
  std::vector<MetricsRecord> rows;
  double initial_frechet = 0.0;
  double final_frechet = 0.0;
  double best_frechet = 0.0;
  std::size_t best_iteration = 0;
  std::string message;
};

using ProgressFn = std::function<void(const MetricsRecord&)>;

/// Trains per cfg.train, evaluating at iteration 0, every eval cadence and
/// at the final iteration. Writes into cfg.output_dir: config.json,
/// metrics.csv, samples_<iter>.csv (points) or .pgm (images),
/// checkpoint.ufsl and summary.json. An existing metrics.csv is replaced.
RunSummary run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress = {});

/// Metrics of generated samples against a real reference set. Points are
/// compared in data space, images in random-feature space.
MetricsRecord evaluate_samples(const Tensor& real, const Tensor& fake, const SampleSource& source,
                               const EvalConfig& eval);

}  // namespace ufslab::harness
