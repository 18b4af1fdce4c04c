#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "ufslab/numerics/tensor.hpp"

namespace ufslab::ufs {

using numerics::Tensor;

/// Running weighted feature means, refreshed during critic training.
///
/// mu_real = mean_i (w * y_real[i]) and likewise mu_fake, elementwise in w.
/// With momentum 0 each update replaces the means with the latest batch.
struct FeatureStats {
  Tensor mu_real;
  Tensor mu_fake;
  double momentum = 0.0;
  bool initialized = false;
};

struct BetaAnneal {
  double beta_start = 1.0;
  double beta_end = 1.5;
  double anneal_fraction = 1.0;
};

/// Hyperparameters of the suppression curve.
///
/// S = eps - clamp(R, alpha, beta), so every entry lies in
/// [eps - beta, eps - alpha]. `gamma` is the near-real guard on |D_c|,
/// `denom_floor` bounds |M_c| away from zero, `near_real_ratio` is the ratio
/// assigned to guarded channels.
struct UfsConfig {
  double alpha = 0.0;
  double beta = 1.0;
  double epsilon = 1.0;
  double gamma = 1e-4;
  double denom_floor = 1e-8;
  double near_real_ratio = 1.0;
  std::optional<BetaAnneal> beta_anneal;

  /// Throws ContractError unless alpha <= beta, epsilon >= beta (for every
  /// beta the anneal schedule can reach), gamma >= 0 and denom_floor > 0.
  void validate() const;
};

/// Per-sample, per-channel suppression values S [n x C].
struct SuppressionMatrix {
  Tensor values;
};

/// Refreshes the weighted means from one critic batch (bias excluded).
void update_stats(FeatureStats& stats, const Tensor& w, const Tensor& y_real, const Tensor& y_fake);

/// Y_hat = w (x) Y_fake per sample, no batch reduction.
Tensor weighted_features(const Tensor& w, const Tensor& y_fake);

/// R = D / M with D = mu_real - y_hat and M = mu_real - mu_fake.
/// |M_c| is floored at denom_floor keeping its sign (0 counts as positive);
/// channels with |D_c| < gamma get near_real_ratio.
Tensor compute_ratio(const FeatureStats& stats, const Tensor& y_hat, const UfsConfig& cfg);

/// Piecewise-linear suppression curve applied entrywise.
SuppressionMatrix compute_suppression(const Tensor& ratio, const UfsConfig& cfg);

/// Convenience: weighted_features -> compute_ratio -> compute_suppression.
SuppressionMatrix suppression_for(const FeatureStats& stats, const Tensor& w, const Tensor& y_fake,
                                  const UfsConfig& cfg);

/// ybar[i] = <w, y_fake[i] (x) S[i]> + b.
Tensor apply_suppression(const Tensor& y_fake, const SuppressionMatrix& s, const Tensor& w, double b);

/// d ybar[i] / d y_fake[i][c] = w_c * S[i][c]; S is treated as a constant.
Tensor suppressed_score_gradient(const Tensor& w, const SuppressionMatrix& s);

enum class Regime { suppression, dismission };

struct RegimeReport {
  Regime regime = Regime::suppression;
  /// Set when eps - beta >= 1: the floor of S is at least 1, so no channel is
  /// scaled down.
  bool no_effective_suppression = false;
  std::string warning;
};

std::string to_string(Regime regime);

/// eps - beta == 0 is dismission (far channels are zeroed); eps - beta > 0
/// keeps them at a positive scale.
RegimeReport classify_mode(const UfsConfig& cfg);

/// Linear beta schedule over the first anneal_fraction * T iterations,
/// constant afterwards. Returns cfg.beta when no schedule is configured.
double anneal_beta(const UfsConfig& cfg, std::size_t t, std::size_t total);

/// cfg with beta replaced by anneal_beta(cfg, t, total).
UfsConfig config_at(const UfsConfig& cfg, std::size_t t, std::size_t total);

}  // namespace ufslab::ufs
