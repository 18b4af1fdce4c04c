// ufs-lab: run experiments, score sample sets, render CAMs, prune datasets.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ufslab/attribution/cam.hpp"
#include "ufslab/errors.hpp"
#include "ufslab/eval/embed.hpp"
#include "ufslab/eval/metrics.hpp"
#include "ufslab/harness/config.hpp"
#include "ufslab/harness/experiment.hpp"
#include "ufslab/harness/idx.hpp"
#include "ufslab/harness/io.hpp"
#include "ufslab/selection/selection.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ufslab;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

bool is_idx(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  unsigned char magic[4] = {};
  in.read(reinterpret_cast<char*>(magic), 4);
  return in && magic[0] == 0 && magic[1] == 0 && magic[2] == 0x08;
}

/// CSV points, IDX images (embedded) or flat-binary embeddings.
numerics::Tensor load_samples(const fs::path& path) {
  if (path.extension() == ".csv") return harness::read_points_csv(path);
  if (is_idx(path)) {
    return eval::random_feature_embed(harness::idx_to_images(harness::read_idx(path)), harness::kEvalEmbedderSeed);
  }
  return eval::read_embeddings(path);
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& sets, const std::string& out,
            bool quiet) {
  json doc = read_json(config_path);
  for (const auto& s : sets) harness::apply_override(doc, s);
  harness::ExperimentConfig cfg = harness::config_from_json(doc);
  if (!out.empty()) cfg.output_dir = out;
  const auto summary = harness::run_experiment(cfg, [&](const harness::MetricsRecord& r) {
    if (quiet) return;
    std::fprintf(stderr, "iter %6zu  L_D %+.4f  L_G %+.4f  frechet %.5f  modes %zu  (%.1fs)\n", r.iteration, r.loss_d,
                 r.loss_g, r.frechet, r.covered_modes, r.wall_seconds);
  });
  if (summary.exit_status != 0) {
    std::cerr << "run aborted: " << summary.message << '\n';
  } else if (!quiet) {
    std::fprintf(stderr, "best frechet %.6f at iteration %zu; outputs in %s\n", summary.best_frechet,
                 summary.best_iteration, cfg.output_dir.c_str());
  }
  return summary.exit_status;
}

int cmd_eval(const std::string& real_path, const std::string& fake_path, std::size_t k) {
  const numerics::Tensor real = load_samples(real_path);
  const numerics::Tensor fake = load_samples(fake_path);
  const auto metrics = eval::manifold_metrics(real, fake, k);
  json out;
  out["frechet"] = eval::frechet_distance(eval::fit_gaussian(real), eval::fit_gaussian(fake));
  out["precision"] = metrics.precision;
  out["recall"] = metrics.recall;
  out["density"] = metrics.density;
  out["coverage"] = metrics.coverage;
  out["k"] = k;
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_cam(const std::string& checkpoint_path, const std::string& input, const std::string& out_dir,
            const std::vector<std::string>& sets, std::size_t max_samples, std::string run_id) {
  const numerics::Tensor images = harness::idx_to_images(harness::read_idx(input));
  const gan::Architecture arch = gan::image_architecture(images.dim(2), images.dim(3));
  numerics::SeededRng rng(0);
  gan::DiscriminatorNet d(arch.sample_shape, arch.discriminator_body, rng);
  ufs::FeatureStats stats;
  harness::restore_discriminator(d, stats, harness::read_checkpoint(checkpoint_path));

  // Suppression settings come from the run's config.json when it sits next to the checkpoint.
  ufs::UfsConfig ucfg;
  const fs::path run_config = fs::path(checkpoint_path).parent_path() / "config.json";
  json doc = fs::exists(run_config) ? read_json(run_config) : json::object();
  for (const auto& s : sets) harness::apply_override(doc, s);
  if (doc.contains("ufs") && !doc["ufs"].is_null()) {
    const auto cfg = harness::config_from_json(doc);
    if (cfg.train.ufs) ucfg = *cfg.train.ufs;
  }
  ucfg.validate();
  if (run_id.empty()) run_id = fs::path(checkpoint_path).parent_path().filename().string();
  if (run_id.empty()) run_id = "run";

  const std::size_t n = std::min(max_samples, images.dim(0));
  const numerics::Tensor x = images.slice_rows(0, n);
  const numerics::Tensor features = d.body().infer(x);
  ufs::SuppressionMatrix s{numerics::Tensor({n, d.feature_dim()}, 1.0)};
  if (stats.initialized) s = ufs::suppression_for(stats, d.head_weight(), features, ucfg);

  fs::create_directories(out_dir);
  const std::size_t factor_h = images.dim(2), factor_w = images.dim(3);
  for (auto variant : {attribution::CamVariant::cam, attribution::CamVariant::cam_ufs, attribution::CamVariant::cam_sup}) {
    const auto maps = attribution::compute_cam(d, x, &s, variant);
    for (std::size_t i = 0; i < maps.size(); ++i) {
      attribution::AttributionMap up = maps[i];
      up.values = attribution::upsample_nearest(maps[i].values, factor_h / maps[i].values.dim(0),
                                                factor_w / maps[i].values.dim(1));
      attribution::heatmap_to_pgm(up, fs::path(out_dir) / attribution::cam_filename(run_id, i, variant));
    }
  }
  json meta;
  meta["samples"] = n;
  meta["statistics_initialized"] = stats.initialized;
  meta["bias_included"] = false;
  meta["upsampling"] = "nearest";
  std::ofstream(fs::path(out_dir) / (run_id + "_cam.json")) << meta.dump(2) << '\n';
  std::cerr << "wrote " << 3 * n << " maps to " << out_dir << '\n';
  return 0;
}

int cmd_select(const std::string& dataset, double retention, const std::string& out, std::uint64_t seed,
               const std::string& covariance) {
  const numerics::Tensor images = harness::idx_to_images(harness::read_idx(dataset));
  selection::InstanceSelectionConfig cfg;
  cfg.retention_ratio = retention;
  cfg.embedder_seed = seed;
  cfg.covariance = selection::covariance_mode_from_string(covariance);
  const auto kept = selection::instance_select(images, cfg);
  selection::write_index_list(out, kept);
  std::cerr << "kept " << kept.size() << " of " << images.dim(0) << " samples\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale GAN lab with unrealistic feature suppression"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::vector<std::string> sets;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Train and evaluate one experiment");
  run->add_option("config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--set", sets, "Override a config key, e.g. --set train.iterations=100");
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_flag("-q,--quiet", quiet, "No progress output");

  std::string real_path, fake_path;
  std::size_t k = 3;
  auto* ev = app.add_subcommand("eval", "Frechet and k-NN metrics between two sample sets");
  ev->add_option("--real", real_path, "Real samples (.csv points, IDX images or embedding binary)")
      ->required()
      ->check(CLI::ExistingFile);
  ev->add_option("--fake", fake_path, "Generated samples")->required()->check(CLI::ExistingFile);
  ev->add_option("-k", k, "Neighbourhood size")->check(CLI::PositiveNumber);

  std::string checkpoint, input, cam_out, run_id;
  std::size_t max_samples = 16;
  auto* cam = app.add_subcommand("cam", "Write CAM, CAM_UFS and CAM_SUP heatmaps");
  cam->add_option("--checkpoint", checkpoint, "Checkpoint from an image run")->required()->check(CLI::ExistingFile);
  cam->add_option("--input", input, "IDX image file")->required()->check(CLI::ExistingFile);
  cam->add_option("--out", cam_out, "Output directory")->required();
  cam->add_option("--samples", max_samples, "Maximum number of images")->check(CLI::PositiveNumber);
  cam->add_option("--run-id", run_id, "File name prefix (default: checkpoint directory name)");
  cam->add_option("--set", sets, "Override a suppression setting, e.g. --set ufs.beta=1.5");

  std::string dataset, select_out, covariance = "full_shrinkage";
  double retention = 0.5;
  std::uint64_t seed = 0;
  auto* sel = app.add_subcommand("select", "Keep the highest-density fraction of an image dataset");
  sel->add_option("--dataset", dataset, "IDX image file")->required()->check(CLI::ExistingFile);
  sel->add_option("--retention", retention, "Fraction kept")->check(CLI::Range(0.0, 1.0));
  sel->add_option("--out", select_out, "Newline-delimited kept indices")->required();
  sel->add_option("--seed", seed, "Embedder seed");
  sel->add_option("--covariance", covariance, "full_shrinkage or diagonal");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, sets, out_dir, quiet);
    if (*ev) return cmd_eval(real_path, fake_path, k);
    if (*cam) return cmd_cam(checkpoint, input, cam_out, sets, max_samples, run_id);
    if (*sel) return cmd_select(dataset, retention, select_out, seed, covariance);
  } catch (const std::exception& e) {
    std::cerr << "ufs-lab: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
