#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "support/oracles.hpp"
#include "ufslab/errors.hpp"
#include "ufslab/eval/embed.hpp"
#include "ufslab/eval/metrics.hpp"
#include "ufslab/harness/datasets.hpp"

using namespace ufslab;
using namespace ufslab::eval;
using numerics::gaussian_sample;
using numerics::SeededRng;

namespace {

GaussianFit fit1(double mean, double var) { return {Tensor::vector({mean}), Tensor::matrix({{var}})}; }

Tensor random_psd(SeededRng& rng, std::size_t d) {
  const Tensor a = gaussian_sample(rng, {d, d});
  Tensor c({d, d});
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t q = 0; q < d; ++q) c.at(i, j) += a.at(i, q) * a.at(j, q);
  for (std::size_t i = 0; i < d; ++i) c.at(i, i) += 0.05;
  return c;
}

Tensor points_1d(std::vector<double> xs) {
  Tensor t({xs.size(), 1});
  for (std::size_t i = 0; i < xs.size(); ++i) t.at(i, 0) = xs[i];
  return t;
}

void expect_manifold_eq(const ManifoldMetrics& got, const oracle::Manifold& want, double tol = 0.0) {
  EXPECT_NEAR(got.precision, want.precision, tol);
  EXPECT_NEAR(got.recall, want.recall, tol);
  EXPECT_NEAR(got.density, want.density, tol + 1e-15);
  EXPECT_NEAR(got.coverage, want.coverage, tol);
}

}  // namespace

TEST(FitGaussian, TwoPoints) {
  const GaussianFit f = fit_gaussian(Tensor::matrix({{0, 0}, {2, 0}}));
  EXPECT_EQ(f.mean, Tensor::vector({1, 0}));
  EXPECT_EQ(f.covariance, Tensor::matrix({{2, 0}, {0, 0}}));
}

TEST(FitGaussian, IdenticalPointsHaveZeroCovariance) {
  const GaussianFit f = fit_gaussian(Tensor::matrix({{1.5, -2}, {1.5, -2}, {1.5, -2}}));
  for (double v : f.covariance.values()) EXPECT_EQ(v, 0.0);
}

TEST(FitGaussian, MatchesLoopOracle) {
  SeededRng rng(1);
  const Tensor x = gaussian_sample(rng, {50, 4});
  const GaussianFit f = fit_gaussian(x);
  for (std::size_t a = 0; a < 4; ++a) {
    long double ma = 0;
    for (std::size_t i = 0; i < 50; ++i) ma += x.at(i, a);
    ma /= 50;
    EXPECT_NEAR(f.mean[a], static_cast<double>(ma), 1e-10);
    for (std::size_t b = 0; b < 4; ++b) {
      long double mb = 0, c = 0;
      for (std::size_t i = 0; i < 50; ++i) mb += x.at(i, b);
      mb /= 50;
      for (std::size_t i = 0; i < 50; ++i) c += (x.at(i, a) - ma) * (x.at(i, b) - mb);
      EXPECT_NEAR(f.covariance.at(a, b), static_cast<double>(c / 49), 1e-10);
      EXPECT_EQ(f.covariance.at(a, b), f.covariance.at(b, a));
    }
  }
}

TEST(FitGaussian, NeedsTwoSamples) { EXPECT_THROW(fit_gaussian(Tensor::matrix({{1, 2}})), ContractError); }

TEST(Frechet, OneDimensionalClosedForms) {
  EXPECT_NEAR(frechet_distance(fit1(0, 1), fit1(1, 1)), 1.0, 1e-12);
  EXPECT_NEAR(frechet_distance(fit1(0, 1), fit1(0, 4)), 1.0, 1e-12);
  SeededRng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const double m1 = rng.normal(), m2 = rng.normal(), s1 = 0.1 + rng.uniform() * 3, s2 = 0.1 + rng.uniform() * 3;
    EXPECT_NEAR(frechet_distance(fit1(m1, s1 * s1), fit1(m2, s2 * s2)), (m1 - m2) * (m1 - m2) + (s1 - s2) * (s1 - s2),
                1e-9);
  }
}

TEST(Frechet, EqualFitsGiveZero) {
  SeededRng rng(3);
  const GaussianFit f{gaussian_sample(rng, {3}), random_psd(rng, 3)};
  EXPECT_NEAR(frechet_distance(f, f), 0.0, 1e-10);
}

TEST(Frechet, MatchesIterativeRootOracle3d) {
  SeededRng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const GaussianFit a{gaussian_sample(rng, {3}), random_psd(rng, 3)};
    const GaussianFit b{gaussian_sample(rng, {3}), random_psd(rng, 3)};
    const double want = oracle::frechet3(a.mean, a.covariance, b.mean, b.covariance);
    EXPECT_NEAR(frechet_distance(a, b), want, 1e-6);
  }
}

TEST(Frechet, SymmetricAndPositiveWhenFitsDiffer) {
  SeededRng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const GaussianFit a{gaussian_sample(rng, {4}), random_psd(rng, 4)};
    const GaussianFit b{gaussian_sample(rng, {4}), random_psd(rng, 4)};
    const double ab = frechet_distance(a, b);
    EXPECT_NEAR(ab, frechet_distance(b, a), 1e-10);
    EXPECT_GT(ab, 1e-6);
  }
}

TEST(Frechet, Errors) {
  EXPECT_THROW(frechet_distance(fit1(0, 1), GaussianFit{Tensor({2}), Tensor({2, 2})}), ContractError);
  EXPECT_THROW(frechet_distance(fit1(0, -1), fit1(0, 1)), NumericError);
}

TEST(Manifold, IdenticalSetsK1) {
  SeededRng rng(6);
  const Tensor x = gaussian_sample(rng, {20, 3});
  const ManifoldMetrics m = manifold_metrics(x, x, 1);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.coverage, 1.0);
}

TEST(Manifold, FarApartClustersScoreZero) {
  SeededRng rng(7);
  const Tensor real = gaussian_sample(rng, {15, 2});
  Tensor fake = gaussian_sample(rng, {15, 2});
  for (std::size_t i = 0; i < 15; ++i) fake.at(i, 0) += 1e7;
  const ManifoldMetrics m = manifold_metrics(real, fake, 3);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.density, 0.0);
  EXPECT_EQ(m.coverage, 0.0);
}

TEST(Manifold, HandEnumeratedSixBySix) {
  const Tensor real = points_1d({0, 1, 2, 3, 4, 5});
  const Tensor fake = points_1d({0.5, 1.5, 2.5, 10, 11, 12});
  const ManifoldMetrics m = manifold_metrics(real, fake, 2);
  EXPECT_DOUBLE_EQ(m.precision, 3.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.recall, 5.0 / 6.0);
  EXPECT_DOUBLE_EQ(m.density, 7.0 / 12.0);
  EXPECT_DOUBLE_EQ(m.coverage, 4.0 / 6.0);
}

TEST(Manifold, MatchesEnumerationOracle) {
  SeededRng rng(8);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(3);
    const std::size_t m = k + 1 + rng.uniform_index(12 - k), n = k + 1 + rng.uniform_index(12 - k);
    const std::size_t d = 1 + rng.uniform_index(3);
    Tensor real = gaussian_sample(rng, {m, d}), fake = gaussian_sample(rng, {n, d}, 0.3, 1.0);
    if (trial % 3 == 0) {
      // Lattice points make boundary ties common.
      for (double& v : real.values()) v = std::round(v * 2);
      for (double& v : fake.values()) v = std::round(v * 2);
    }
    expect_manifold_eq(manifold_metrics(real, fake, k), oracle::manifold(real, fake, k));
  }
}

TEST(Manifold, SwappingArgumentsSwapsPrecisionAndRecall) {
  SeededRng rng(9);
  for (int trial = 0; trial < 30; ++trial) {
    const Tensor a = gaussian_sample(rng, {25, 2}), b = gaussian_sample(rng, {30, 2}, 0.5, 1.2);
    const ManifoldMetrics ab = manifold_metrics(a, b, 3), ba = manifold_metrics(b, a, 3);
    EXPECT_EQ(ab.precision, ba.recall);
    EXPECT_EQ(ab.recall, ba.precision);
  }
}

TEST(Manifold, RotationInvariant) {
  SeededRng rng(10);
  const double th = 0.7, c = std::cos(th), s = std::sin(th);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor a = gaussian_sample(rng, {30, 2}), b = gaussian_sample(rng, {30, 2}, 0.4, 1.0);
    Tensor ra = a, rb = b;
    for (auto* p : {&ra, &rb}) {
      const Tensor& src = p == &ra ? a : b;
      for (std::size_t i = 0; i < 30; ++i) {
        p->at(i, 0) = c * src.at(i, 0) - s * src.at(i, 1);
        p->at(i, 1) = s * src.at(i, 0) + c * src.at(i, 1);
      }
    }
    const ManifoldMetrics m = manifold_metrics(a, b, 3), r = manifold_metrics(ra, rb, 3);
    EXPECT_NEAR(m.precision, r.precision, 1e-9);
    EXPECT_NEAR(m.recall, r.recall, 1e-9);
    EXPECT_NEAR(m.density, r.density, 1e-9);
    EXPECT_NEAR(m.coverage, r.coverage, 1e-9);
    EXPECT_NEAR(frechet_distance(fit_gaussian(a), fit_gaussian(b)), frechet_distance(fit_gaussian(ra), fit_gaussian(rb)),
                1e-9);
  }
}

TEST(Manifold, Bounds) {
  SeededRng rng(11);
  const Tensor a = gaussian_sample(rng, {40, 2}), b = gaussian_sample(rng, {35, 2}, 0.2, 0.5);
  const ManifoldMetrics m = manifold_metrics(a, b, 3);
  for (double v : {m.precision, m.recall, m.coverage}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_GE(m.density, 0.0);
  EXPECT_THROW(manifold_metrics(a, b, 0), ContractError);
  const std::vector<std::size_t> three{0, 1, 2};
  EXPECT_THROW(manifold_metrics(a, b.gather_rows(three), 3), ContractError);
}

TEST(ModeCoverage, Examples) {
  const Tensor centers = harness::ring8_centers(2.0);
  const double sigma = 0.02;
  Tensor at_zero({10, 2});
  for (std::size_t i = 0; i < 10; ++i) at_zero.at(i, 0) = 2.0;
  ModeCoverage one = mode_coverage(at_zero, centers, sigma);
  EXPECT_EQ(one.covered_modes, 1u);
  EXPECT_EQ(one.high_quality_fraction, 1.0);

  const ModeCoverage all = mode_coverage(centers, centers, sigma);
  EXPECT_EQ(all.covered_modes, 8u);
  EXPECT_EQ(all.high_quality_fraction, 1.0);

  const Tensor off = Tensor::matrix({{2.0 + 4 * sigma, 0.0}});
  const ModeCoverage far = mode_coverage(off, centers, sigma);
  EXPECT_EQ(far.covered_modes, 0u);
  EXPECT_EQ(far.high_quality_fraction, 0.0);
}

TEST(Embed, DeterministicPerSeed) {
  SeededRng rng(12);
  const Tensor imgs = gaussian_sample(rng, {4, 1, 16, 16});
  const Tensor e = random_feature_embed(imgs, 3);
  EXPECT_EQ(e.shape(), (numerics::Shape{4, kEmbeddingDim}));
  EXPECT_EQ(e, random_feature_embed(imgs, 3));
  EXPECT_NE(e, random_feature_embed(imgs, 4));
}

TEST(Embed, ZeroImagesEmbedToZero) {
  const Tensor e = random_feature_embed(Tensor({2, 1, 8, 8}), 0);
  for (double v : e.values()) EXPECT_EQ(v, 0.0);
}

TEST(Embed, DuplicateImageHasZeroDistance) {
  SeededRng rng(13);
  Tensor imgs = gaussian_sample(rng, {2, 1, 12, 12});
  for (std::size_t q = 0; q < 144; ++q) imgs[144 + q] = imgs[q];
  const Tensor e = random_feature_embed(imgs, 5);
  for (std::size_t c = 0; c < kEmbeddingDim; ++c) EXPECT_EQ(e.at(0, c), e.at(1, c));
}

TEST(Embed, BinaryRoundTrip) {
  SeededRng rng(14);
  const Tensor e = gaussian_sample(rng, {5, 7});
  const auto path = std::filesystem::temp_directory_path() / "ufslab_embed.bin";
  write_embeddings(path, e);
  EXPECT_EQ(read_embeddings(path), e);
  std::filesystem::remove(path);
}
