#include "ufslab/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "ufslab/errors.hpp"
#include "ufslab/eval/embed.hpp"
#include "ufslab/eval/metrics.hpp"

namespace ufslab::harness {

namespace fs = std::filesystem;

gan::Architecture architecture_for(const SampleSource& source) {
  const Shape shape = source.sample_shape();
  if (source.is_image()) return gan::image_architecture(shape[1], shape[2]);
  if (shape.size() != 1 || shape[0] != 2) throw ContractError("only 2-D point datasets are supported");
  return gan::point_architecture();
}

gan::TrainConfig effective_train_config(const ExperimentConfig& cfg) {
  gan::TrainConfig train = cfg.train;
  train.seed = cfg.seed;
  return train;
}

MetricsRecord evaluate_samples(const Tensor& real, const Tensor& fake, const SampleSource& source,
                               const EvalConfig& eval) {
  MetricsRecord r;
  Tensor real_space = real, fake_space = fake;
  if (source.is_image()) {
    real_space = eval::random_feature_embed(real, kEvalEmbedderSeed);
    fake_space = eval::random_feature_embed(fake, kEvalEmbedderSeed);
  }
  r.frechet = eval::frechet_distance(eval::fit_gaussian(real_space), eval::fit_gaussian(fake_space));
  const eval::ManifoldMetrics m = eval::manifold_metrics(real_space, fake_space, eval.k);
  r.precision = m.precision;
  r.recall = m.recall;
  r.density = m.density;
  r.coverage = m.coverage;
  if (auto centers = source.mode_centers()) {
    const eval::ModeCoverage cov = eval::mode_coverage(fake, *centers, source.mode_sigma(), eval.hq_thresh_sigmas);
    r.covered_modes = cov.covered_modes;
    r.hq_fraction = cov.high_quality_fraction;
  }
  return r;
}

namespace {

struct Evaluator {
  const ExperimentConfig& cfg;
  const SampleSource& source;
  Tensor real;
  SeededRng base;

  Tensor fake_samples(const gan::TrainState& state, std::size_t iteration) const {
    SeededRng rng = base.derive(1000 + iteration);
    const Tensor z = numerics::gaussian_sample(rng, {cfg.eval.samples, state.generator.latent_dim()});
    return state.generator.infer(z);
  }
};

/// Losses of the untrained networks on held-out batches, computed the way
/// the training steps compute them but without any update.
std::pair<double, double> initial_losses(gan::TrainState& state, const Tensor& real, const Tensor& fake,
                                         SeededRng rng) {
  const std::size_t n = std::min(state.config.batch_size, std::min(real.dim(0), fake.dim(0)));
  const Tensor real_batch = real.slice_rows(0, n);
  const Tensor fake_batch = fake.slice_rows(0, n);
  gan::DiscriminatorNet& d = state.discriminator;
  const Tensor real_scores = d.head(d.body().infer(real_batch));
  const Tensor fake_scores = d.head(d.body().infer(fake_batch));
  double loss_d = gan::critic_loss(state.config.loss.kind, real_scores.values(), fake_scores.values()).value;
  if (state.config.loss.kind == gan::LossKind::wgan_gp) {
    loss_d += gan::gradient_penalty(d, real_batch, fake_batch, rng, state.config.loss.gp_lambda);
  }
  double sum = 0.0;
  for (double s : fake_scores.values()) sum += s;
  return {loss_d, -sum / static_cast<double>(n)};
}

void dump_samples(const fs::path& dir, std::size_t iteration, const Tensor& fake, std::size_t count,
                  bool image) {
  const Tensor head = fake.slice_rows(0, std::min(count, fake.dim(0)));
  if (image) {
    write_image_grid(dir / ("samples_" + std::to_string(iteration) + ".pgm"), head);
  } else {
    write_points_csv(dir / ("samples_" + std::to_string(iteration) + ".csv"), head);
  }
}

void write_summary(const fs::path& path, const RunSummary& s, std::size_t iterations) {
  nlohmann::json doc;
  doc["status"] = s.exit_status == 0 ? "completed" : "aborted";
  doc["message"] = s.message;
  doc["iterations"] = iterations;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); };
  doc["initial_frechet"] = finite_or_null(s.initial_frechet);
  doc["final_frechet"] = finite_or_null(s.final_frechet);
  doc["best_frechet"] = finite_or_null(s.best_frechet);
  doc["best_iteration"] = s.best_iteration;
  if (!s.rows.empty()) {
    doc["final_covered_modes"] = s.rows.back().covered_modes;
    doc["final_hq_fraction"] = finite_or_null(s.rows.back().hq_fraction);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

}  // namespace

RunSummary run_experiment(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = cfg.output_dir;
  fs::create_directories(dir);
  save_config(dir / "config.json", cfg);
  const fs::path csv = dir / "metrics.csv";
  fs::remove(csv);
  const fs::path checkpoint = dir / "checkpoint.ufsl";

  SeededRng root(cfg.seed);
  std::unique_ptr<SampleSource> train_source = make_dataset(cfg, root.derive(10).next_u64());
  std::unique_ptr<SampleSource> eval_source = make_dataset(cfg, root.derive(999).next_u64());
  const bool image = train_source->is_image();
  const char* header = image ? kImageMetricsHeader : kMetricsHeader;

  gan::TrainState state = gan::make_train_state(effective_train_config(cfg), architecture_for(*train_source));
  Evaluator evaluator{cfg, *eval_source, eval_source->sample(cfg.eval.samples), root.derive(20)};

  RunSummary summary;
  summary.best_frechet = std::numeric_limits<double>::infinity();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  auto record_eval = [&](double loss_d, double loss_g, const Tensor& fake) {
    MetricsRecord r = evaluate_samples(evaluator.real, fake, *eval_source, cfg.eval);
    r.iteration = state.iteration;
    r.loss_d = loss_d;
    r.loss_g = loss_g;
    r.wall_seconds = elapsed();
    log_metrics_csv(r, csv, header);
    dump_samples(dir, state.iteration, fake, cfg.eval.dump_samples, image);
    write_checkpoint(checkpoint, save_train_state(state));
    if (summary.rows.empty()) summary.initial_frechet = r.frechet;
    summary.final_frechet = r.frechet;
    if (r.frechet < summary.best_frechet) {
      summary.best_frechet = r.frechet;
      summary.best_iteration = r.iteration;
    }
    summary.rows.push_back(r);
    if (progress) progress(r);
  };

  {
    const Tensor fake = evaluator.fake_samples(state, 0);
    const auto [loss_d, loss_g] = initial_losses(state, evaluator.real, fake, root.derive(30));
    record_eval(loss_d, loss_g, fake);
  }

  const gan::RealSampler sampler = [&](std::size_t n) { return train_source->sample(n); };
  const std::size_t total = state.config.iterations;
  while (state.iteration < total) {
    gan::IterationResult step;
    try {
      step = gan::train_iteration(state, sampler);
    } catch (const NumericError& e) {
      MetricsRecord diag;
      diag.iteration = state.iteration;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      diag.loss_d = diag.loss_g = diag.frechet = diag.precision = diag.recall = diag.density = diag.coverage = nan;
      diag.hq_fraction = nan;
      diag.wall_seconds = elapsed();
      log_metrics_csv(diag, csv, header);
      summary.rows.push_back(diag);
      summary.exit_status = 3;
      summary.message = e.what();
      write_summary(dir / "summary.json", summary, state.iteration);
      return summary;
    }
    if (state.iteration % cfg.eval.cadence == 0 || state.iteration == total) {
      record_eval(step.critic_loss, step.generator_loss, evaluator.fake_samples(state, state.iteration));
    }
  }
  summary.message = "ok";
  write_summary(dir / "summary.json", summary, state.iteration);
  return summary;
}

}  // namespace ufslab::harness
