#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ufslab/errors.hpp"
#include "ufslab/numerics/rng.hpp"
#include "ufslab/ufs/ufs.hpp"

using namespace ufslab;
using namespace ufslab::ufs;
using numerics::SeededRng;
using numerics::gaussian_sample;

namespace {

FeatureStats stats_of(std::vector<double> real, std::vector<double> fake) {
  FeatureStats s;
  s.mu_real = Tensor::vector(std::move(real));
  s.mu_fake = Tensor::vector(std::move(fake));
  s.initialized = true;
  return s;
}

UfsConfig cfg_of(double a, double b, double e) {
  UfsConfig c;
  c.alpha = a;
  c.beta = b;
  c.epsilon = e;
  return c;
}

double suppress(double r, const UfsConfig& c) { return compute_suppression(Tensor::vector({r}), c).values[0]; }

// Closed form of the piecewise curve, written out per branch.
double curve(double r, double a, double b, double e) {
  if (r < a) return e - a;
  if (r > b) return e - b;
  return e - r;
}

}  // namespace

TEST(UpdateStats, HandArithmetic) {
  FeatureStats s;
  update_stats(s, Tensor::vector({1, 2}), Tensor::matrix({{1, 1}, {3, 1}}), Tensor::matrix({{0, 0}, {0, 0}}));
  EXPECT_TRUE(s.initialized);
  EXPECT_EQ(s.mu_real, Tensor::vector({2, 2}));
  EXPECT_EQ(s.mu_fake, Tensor::vector({0, 0}));
}

TEST(UpdateStats, Momentum) {
  FeatureStats s = stats_of({0, 0}, {0, 0});
  s.momentum = 0.5;
  update_stats(s, Tensor::vector({1, 1}), Tensor::matrix({{2, 2}}), Tensor::matrix({{4, 4}}));
  EXPECT_EQ(s.mu_real, Tensor::vector({1, 1}));
  EXPECT_EQ(s.mu_fake, Tensor::vector({2, 2}));
}

TEST(UpdateStats, MatchesLoopOracle) {
  SeededRng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor w = gaussian_sample(rng, {5}), yr = gaussian_sample(rng, {7, 5}), yf = gaussian_sample(rng, {7, 5});
    FeatureStats s;
    update_stats(s, w, yr, yf);
    for (std::size_t c = 0; c < 5; ++c) {
      double r = 0, f = 0;
      for (std::size_t i = 0; i < 7; ++i) r += w[c] * yr.at(i, c), f += w[c] * yf.at(i, c);
      EXPECT_NEAR(s.mu_real[c], r / 7, 1e-12);
      EXPECT_NEAR(s.mu_fake[c], f / 7, 1e-12);
    }
  }
}

TEST(UpdateStats, WidthMismatch) {
  FeatureStats s;
  EXPECT_THROW(update_stats(s, Tensor::vector({1, 2, 3}), Tensor({2, 2}), Tensor({2, 2})), DimensionError);
}

TEST(WeightedFeatures, Examples) {
  const Tensor y = Tensor::matrix({{3, 5}, {-1, 2}});
  EXPECT_EQ(weighted_features(Tensor::vector({1, 1}), y), y);
  EXPECT_EQ(weighted_features(Tensor::vector({2, 0}), Tensor::matrix({{3, 5}})), Tensor::matrix({{6, 0}}));
  SeededRng rng(2);
  const Tensor w = gaussian_sample(rng, {4}), yr = gaussian_sample(rng, {6, 4});
  const Tensor got = weighted_features(w, yr);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(got.at(i, c), w[c] * yr.at(i, c));
  EXPECT_THROW(weighted_features(Tensor::vector({1}), y), DimensionError);
}

TEST(ComputeRatio, HandArithmetic) {
  const Tensor r = compute_ratio(stats_of({2}, {1}), Tensor::matrix({{0.5}}), UfsConfig{});
  EXPECT_DOUBLE_EQ(r[0], 1.5);
}

TEST(ComputeRatio, NearRealFeatureGetsRatioOne) {
  EXPECT_EQ(compute_ratio(stats_of({2}, {1}), Tensor::matrix({{2.0}}), UfsConfig{})[0], 1.0);
  UfsConfig keep;
  keep.near_real_ratio = 0.0;
  EXPECT_EQ(compute_ratio(stats_of({2}, {1}), Tensor::matrix({{2.0}}), keep)[0], 0.0);
}

TEST(ComputeRatio, FlooredMargin) {
  EXPECT_DOUBLE_EQ(compute_ratio(stats_of({1}, {1}), Tensor::matrix({{0.0}}), UfsConfig{})[0], 1e8);
  // A negative margin keeps its sign.
  EXPECT_DOUBLE_EQ(compute_ratio(stats_of({1}, {1 + 1e-12}), Tensor::matrix({{0.0}}), UfsConfig{})[0], -1e8);
}

TEST(ComputeRatio, UninitialisedStatistics) {
  EXPECT_THROW(compute_ratio(FeatureStats{}, Tensor::matrix({{1.0}}), UfsConfig{}), StateError);
}

TEST(ComputeSuppression, FigureThreeExamples) {
  const UfsConfig half = cfg_of(0.5, 1.0, 1.5);
  EXPECT_EQ(suppress(0.3, half), 1.0);
  EXPECT_EQ(suppress(1.2, half), 0.5);
  EXPECT_EQ(suppress(0.75, half), 0.75);
  EXPECT_EQ(suppress(2.0, cfg_of(0, 1, 1)), 0.0);
}

TEST(ApplySuppression, Identities) {
  SeededRng rng(3);
  const Tensor w = gaussian_sample(rng, {4}), y = gaussian_sample(rng, {5, 4});
  const double b = 0.3;
  const Tensor plain = apply_suppression(y, SuppressionMatrix{Tensor({5, 4}, 1.0)}, w, b);
  for (std::size_t i = 0; i < 5; ++i) {
    double s = 0;
    for (std::size_t c = 0; c < 4; ++c) s += w[c] * y.at(i, c);
    EXPECT_NEAR(plain[i], s + b, 1e-12);
  }
  const Tensor zeroed = apply_suppression(y, SuppressionMatrix{Tensor({5, 4})}, w, b);
  for (double v : zeroed.values()) EXPECT_EQ(v, b);
  EXPECT_THROW(apply_suppression(y, SuppressionMatrix{Tensor({5, 3})}, w, b), DimensionError);
}

TEST(ApplySuppression, MatchesLoopOracle) {
  SeededRng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor w = gaussian_sample(rng, {6}), y = gaussian_sample(rng, {4, 6}), s = gaussian_sample(rng, {4, 6});
    const Tensor got = apply_suppression(y, SuppressionMatrix{s}, w, -1.0);
    for (std::size_t i = 0; i < 4; ++i) {
      double acc = 0;
      for (std::size_t c = 0; c < 6; ++c) acc += w[c] * y.at(i, c) * s.at(i, c);
      EXPECT_NEAR(got[i], acc - 1.0, 1e-12);
    }
  }
}

TEST(ClassifyMode, TableRows) {
  struct Row {
    double a, b, e;
    Regime label;
  };
  const Row rows[] = {{0, 1, 1, Regime::dismission},    {1, 2, 2.5, Regime::suppression}, {1, 2, 3, Regime::suppression},
                      {1, 3, 3, Regime::dismission},    {1, 1.2, 2, Regime::suppression}, {1, 1.3, 2, Regime::suppression},
                      {1, 1.4, 2, Regime::suppression}, {1, 1.5, 2, Regime::suppression}};
  for (const Row& r : rows) {
    EXPECT_EQ(classify_mode(cfg_of(r.a, r.b, r.e)).regime, r.label) << r.a << ' ' << r.b << ' ' << r.e;
  }
}

TEST(ClassifyMode, WarnsWhenFloorReachesOne) {
  const RegimeReport wide = classify_mode(cfg_of(1, 2, 3));
  EXPECT_TRUE(wide.no_effective_suppression);
  EXPECT_FALSE(wide.warning.empty());
  const RegimeReport usual = classify_mode(cfg_of(1, 1.5, 2));
  EXPECT_FALSE(usual.no_effective_suppression);
  EXPECT_TRUE(usual.warning.empty());
}

TEST(Config, ValidationRejectsBadBounds) {
  EXPECT_THROW(cfg_of(2, 1, 3).validate(), ContractError);
  EXPECT_THROW(cfg_of(0, 1, 0.5).validate(), ContractError);
  UfsConfig c;
  c.beta_anneal = BetaAnneal{1.0, 1.5, 1.0};  // epsilon 1 < beta_end
  EXPECT_THROW(c.validate(), ContractError);
}

TEST(AnnealBeta, Schedule) {
  UfsConfig c = cfg_of(1, 1, 2);
  c.beta_anneal = BetaAnneal{1.0, 1.5, 0.5};
  EXPECT_EQ(anneal_beta(c, 0, 1000), 1.0);
  EXPECT_EQ(anneal_beta(c, 500, 1000), 1.5);
  EXPECT_EQ(anneal_beta(c, 900, 1000), 1.5);
  EXPECT_DOUBLE_EQ(anneal_beta(c, 250, 1000), 1.25);
  EXPECT_EQ(config_at(c, 250, 1000).beta, anneal_beta(c, 250, 1000));
  EXPECT_EQ(anneal_beta(cfg_of(0, 1, 1), 10, 100), 1.0);
}

TEST(Properties, BoundsAndMonotonicity) {
  SeededRng rng(5);
  for (int trial = 0; trial < 10000; ++trial) {
    const double a = rng.uniform() * 2 - 0.5;
    const double b = a + rng.uniform() * 2;
    const double e = b + rng.uniform() * 1.5;
    const UfsConfig c = cfg_of(a, b, e);
    const double r1 = (rng.uniform() - 0.3) * 6, r2 = r1 + rng.uniform() * 3;
    const double s1 = suppress(r1, c), s2 = suppress(r2, c);
    EXPECT_GE(s1, e - b);
    EXPECT_LE(s1, e - a);
    EXPECT_GE(s1, s2);
  }
}

TEST(Properties, IdentityRegime) {
  SeededRng rng(6);
  const UfsConfig c = cfg_of(2.0, 3.0, 3.0);  // eps - alpha = 1
  const Tensor w = gaussian_sample(rng, {4}), y = gaussian_sample(rng, {6, 4});
  Tensor ratio({6, 4});
  for (double& v : ratio.values()) v = rng.uniform() * 4 - 2;  // all <= alpha
  const SuppressionMatrix s = compute_suppression(ratio, c);
  for (double v : s.values.values()) EXPECT_EQ(v, 1.0);
  const Tensor masked = apply_suppression(y, s, w, 0.7);
  for (std::size_t i = 0; i < 6; ++i) {
    double acc = 0;
    for (std::size_t k = 0; k < 4; ++k) acc += w[k] * y.at(i, k);
    EXPECT_EQ(masked[i], acc + 0.7);
  }
}

TEST(Properties, KeptPlusSuppressedIsWhole) {
  SeededRng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Tensor w = gaussian_sample(rng, {5}), y = gaussian_sample(rng, {3, 5});
    Tensor s = gaussian_sample(rng, {3, 5}), rest({3, 5});
    for (std::size_t i = 0; i < s.size(); ++i) rest[i] = 1.0 - s[i];
    const Tensor kept = apply_suppression(y, SuppressionMatrix{s}, w, 0.0);
    const Tensor dropped = apply_suppression(y, SuppressionMatrix{rest}, w, 0.0);
    const Tensor whole = apply_suppression(y, SuppressionMatrix{Tensor({3, 5}, 1.0)}, w, 0.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(kept[i] + dropped[i], whole[i], 1e-10);
  }
}

TEST(Properties, PermutingRowsPermutesOutputs) {
  SeededRng rng(8);
  const FeatureStats st = stats_of({1.0, -0.5, 2.0}, {0.2, 0.4, 1.0});
  const Tensor yhat = gaussian_sample(rng, {6, 3});
  std::vector<std::size_t> perm(6);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[1], perm[4]);
  const UfsConfig c = cfg_of(0.5, 1.0, 1.5);
  const Tensor r = compute_ratio(st, yhat, c), rp = compute_ratio(st, yhat.gather_rows(perm), c);
  EXPECT_EQ(rp, r.gather_rows(perm));
  EXPECT_EQ(compute_suppression(rp, c).values, compute_suppression(r, c).values.gather_rows(perm));
}

TEST(Properties, RatioIsScaleFree) {
  SeededRng rng(9);
  UfsConfig c;
  c.gamma = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor mr = gaussian_sample(rng, {4}), mf = gaussian_sample(rng, {4}), yhat = gaussian_sample(rng, {3, 4});
    const Tensor base = compute_ratio(stats_of({mr.values().begin(), mr.values().end()}, {mf.values().begin(), mf.values().end()}), yhat, c);
    for (double lambda : {0.5, 2.0, 10.0}) {
      std::vector<double> r2, f2;
      for (double v : mr.values()) r2.push_back(lambda * v);
      for (double v : mf.values()) f2.push_back(lambda * v);
      Tensor y2 = yhat;
      for (double& v : y2.values()) v *= lambda;
      const Tensor scaled = compute_ratio(stats_of(r2, f2), y2, c);
      for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(scaled[i], base[i], 1e-9 * std::max(1.0, std::abs(base[i])));
    }
  }
}

TEST(Properties, ClosedFormOnGrid) {
  for (const UfsConfig& c : {cfg_of(0.5, 1.0, 1.5), cfg_of(0.0, 1.0, 1.0)}) {
    for (int i = 0; i < 1000; ++i) {
      const double r = -1.0 + 3.0 * i / 999.0;
      EXPECT_NEAR(suppress(r, c), curve(r, c.alpha, c.beta, c.epsilon), 1e-12);
    }
  }
}
