#include "ufslab/ufs/ufs.hpp"

#include <algorithm>
#include <cmath>

#include "ufslab/errors.hpp"

namespace ufslab::ufs {

using numerics::shape_to_string;

namespace {

void require_features(const Tensor& y, std::size_t channels, const char* op, const char* name) {
  if (y.rank() != 2 || y.dim(1) != channels) {
    throw DimensionError(std::string(op) + ": " + name + " " + shape_to_string(y.shape()) + " does not match " +
                         std::to_string(channels) + " channels");
  }
}

void require_weight(const Tensor& w, const char* op) {
  if (w.rank() != 1) throw DimensionError(std::string(op) + ": head weight must be a vector");
}

bool approximately_zero(double v) { return std::abs(v) <= 1e-12; }

}  // namespace

void UfsConfig::validate() const {
  auto check_beta = [&](double b) {
    if (!(alpha <= b)) throw ContractError("UfsConfig: alpha must not exceed beta");
    if (!(epsilon - b >= -1e-12)) throw ContractError("UfsConfig: epsilon - beta must be >= 0");
  };
  if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(epsilon)) {
    throw ContractError("UfsConfig: alpha, beta, epsilon must be finite");
  }
  check_beta(beta);
  if (beta_anneal) {
    check_beta(beta_anneal->beta_start);
    check_beta(beta_anneal->beta_end);
    if (!(beta_anneal->anneal_fraction > 0.0 && beta_anneal->anneal_fraction <= 1.0)) {
      throw ContractError("UfsConfig: anneal_fraction must lie in (0, 1]");
    }
  }
  if (!(gamma >= 0.0)) throw ContractError("UfsConfig: gamma must be >= 0");
  if (!(denom_floor > 0.0)) throw ContractError("UfsConfig: denom_floor must be > 0");
  if (!std::isfinite(near_real_ratio)) throw ContractError("UfsConfig: near_real_ratio must be finite");
}

void update_stats(FeatureStats& stats, const Tensor& w, const Tensor& y_real, const Tensor& y_fake) {
  require_weight(w, "update_stats");
  const std::size_t channels = w.size();
  require_features(y_real, channels, "update_stats", "y_real");
  require_features(y_fake, channels, "update_stats", "y_fake");
  if (!(stats.momentum >= 0.0 && stats.momentum <= 1.0)) throw ContractError("update_stats: momentum must lie in [0, 1]");

  auto batch_mean = [&](const Tensor& y) {
    Tensor mean({channels});
    const std::size_t n = y.dim(0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < channels; ++c) mean[c] += w[c] * y.at(i, c);
    }
    for (double& v : mean.values()) v /= static_cast<double>(n);
    return mean;
  };
  Tensor m_real = batch_mean(y_real);
  Tensor m_fake = batch_mean(y_fake);
  numerics::require_finite(m_real, "update_stats real mean");
  numerics::require_finite(m_fake, "update_stats fake mean");

  if (!stats.initialized || stats.momentum == 0.0 || stats.mu_real.size() != channels) {
    stats.mu_real = std::move(m_real);
    stats.mu_fake = std::move(m_fake);
  } else {
    const double keep = stats.momentum;
    for (std::size_t c = 0; c < channels; ++c) {
      stats.mu_real[c] = keep * stats.mu_real[c] + (1.0 - keep) * m_real[c];
      stats.mu_fake[c] = keep * stats.mu_fake[c] + (1.0 - keep) * m_fake[c];
    }
  }
  stats.initialized = true;
}

Tensor weighted_features(const Tensor& w, const Tensor& y_fake) {
  require_weight(w, "weighted_features");
  require_features(y_fake, w.size(), "weighted_features", "y_fake");
  Tensor out(y_fake.shape());
  for (std::size_t i = 0; i < y_fake.dim(0); ++i) {
    for (std::size_t c = 0; c < w.size(); ++c) out.at(i, c) = w[c] * y_fake.at(i, c);
  }
  return out;
}

Tensor compute_ratio(const FeatureStats& stats, const Tensor& y_hat, const UfsConfig& cfg) {
  if (!stats.initialized) throw StateError("compute_ratio: feature statistics have not been populated");
  const std::size_t channels = stats.mu_real.size();
  if (stats.mu_fake.size() != channels) throw DimensionError("compute_ratio: mu_real and mu_fake lengths differ");
  require_features(y_hat, channels, "compute_ratio", "y_hat");

  Tensor margin({channels});
  for (std::size_t c = 0; c < channels; ++c) {
    const double m = stats.mu_real[c] - stats.mu_fake[c];
    const double sign = m < 0.0 ? -1.0 : 1.0;
    margin[c] = sign * std::max(std::abs(m), cfg.denom_floor);
  }
  Tensor ratio(y_hat.shape());
  for (std::size_t i = 0; i < y_hat.dim(0); ++i) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double distance = stats.mu_real[c] - y_hat.at(i, c);
      ratio.at(i, c) = std::abs(distance) >= cfg.gamma ? distance / margin[c] : cfg.near_real_ratio;
    }
  }
  return ratio;
}

SuppressionMatrix compute_suppression(const Tensor& ratio, const UfsConfig& cfg) {
  cfg.validate();
  SuppressionMatrix s{Tensor(ratio.shape())};
  for (std::size_t i = 0; i < ratio.size(); ++i) {
    const double r = ratio[i];
    if (std::isnan(r)) throw NumericError("compute_suppression: NaN ratio");
    if (r < cfg.alpha) {
      s.values[i] = -cfg.alpha + cfg.epsilon;
    } else if (r <= cfg.beta) {
      s.values[i] = -r + cfg.epsilon;
    } else {
      s.values[i] = -cfg.beta + cfg.epsilon;
    }
  }
  return s;
}

SuppressionMatrix suppression_for(const FeatureStats& stats, const Tensor& w, const Tensor& y_fake,
                                  const UfsConfig& cfg) {
  return compute_suppression(compute_ratio(stats, weighted_features(w, y_fake), cfg), cfg);
}

Tensor apply_suppression(const Tensor& y_fake, const SuppressionMatrix& s, const Tensor& w, double b) {
  require_weight(w, "apply_suppression");
  require_features(y_fake, w.size(), "apply_suppression", "y_fake");
  if (s.values.shape() != y_fake.shape()) {
    throw DimensionError("apply_suppression: S " + shape_to_string(s.values.shape()) + " vs features " +
                         shape_to_string(y_fake.shape()));
  }
  Tensor scores({y_fake.dim(0)});
  for (std::size_t i = 0; i < y_fake.dim(0); ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < w.size(); ++c) acc += w[c] * (y_fake.at(i, c) * s.values.at(i, c));
    scores[i] = acc + b;
  }
  return scores;
}

Tensor suppressed_score_gradient(const Tensor& w, const SuppressionMatrix& s) {
  require_weight(w, "suppressed_score_gradient");
  require_features(s.values, w.size(), "suppressed_score_gradient", "S");
  Tensor grad(s.values.shape());
  for (std::size_t i = 0; i < grad.dim(0); ++i) {
    for (std::size_t c = 0; c < w.size(); ++c) grad.at(i, c) = w[c] * s.values.at(i, c);
  }
  return grad;
}

std::string to_string(Regime regime) { return regime == Regime::dismission ? "dismission" : "suppression"; }

RegimeReport classify_mode(const UfsConfig& cfg) {
  cfg.validate();
  const double floor = cfg.epsilon - cfg.beta;
  RegimeReport report;
  if (approximately_zero(floor)) {
    report.regime = Regime::dismission;
    return report;
  }
  report.regime = Regime::suppression;
  if (floor >= 1.0 - 1e-12) {
    report.no_effective_suppression = true;
    report.warning = "epsilon - beta >= 1: no channel is scaled below 1";
  }
  return report;
}

double anneal_beta(const UfsConfig& cfg, std::size_t t, std::size_t total) {
  if (!cfg.beta_anneal) return cfg.beta;
  if (t > total) throw ContractError("anneal_beta: t must not exceed T");
  const BetaAnneal& a = *cfg.beta_anneal;
  const double window = a.anneal_fraction * static_cast<double>(total);
  const double progress = window > 0.0 ? std::min(static_cast<double>(t) / window, 1.0) : 1.0;
  return a.beta_start + (a.beta_end - a.beta_start) * progress;
}

UfsConfig config_at(const UfsConfig& cfg, std::size_t t, std::size_t total) {
  UfsConfig out = cfg;
  out.beta = anneal_beta(cfg, t, total);
  return out;
}

}  // namespace ufslab::ufs
