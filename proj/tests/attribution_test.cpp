#include <gtest/gtest.h>

#include <filesystem>

#include "ufslab/attribution/cam.hpp"
#include "ufslab/errors.hpp"
#include "ufslab/gan/networks.hpp"

using namespace ufslab;
using namespace ufslab::attribution;
using gan::DiscriminatorNet;
using numerics::gaussian_sample;
using numerics::LayerSpec;
using numerics::SeededRng;

namespace {

DiscriminatorNet small_conv_critic(SeededRng& rng, std::size_t side = 10) {
  DiscriminatorNet d({1, side, side},
                     {LayerSpec::conv2d(1, 4, 3, 1), LayerSpec::leaky_relu(), LayerSpec::conv2d(4, 5, 3, 1),
                      LayerSpec::leaky_relu(), LayerSpec::global_sum_pool()},
                     rng, 0.5);
  d.set_head_bias(0.25);
  return d;
}

ufs::SuppressionMatrix random_mask(SeededRng& rng, std::size_t n, std::size_t c) {
  ufs::SuppressionMatrix s{gaussian_sample(rng, {n, c})};
  return s;
}

}  // namespace

TEST(Cam, SingleChannelIdentity) {
  SeededRng rng(0);
  DiscriminatorNet d({1, 2, 2}, {LayerSpec::conv2d(1, 1, 1, 1), LayerSpec::global_sum_pool()}, rng);
  for (Tensor* p : d.body().parameters()) {
    for (double& v : p->values()) v = p->size() == 1 && p == d.body().parameters().front() ? 1.0 : 0.0;
  }
  d.head_weight()[0] = 1.0;
  const Tensor x({1, 1, 2, 2}, {1, 2, 3, 4});
  const auto maps = compute_cam(d, x, nullptr, CamVariant::cam);
  ASSERT_EQ(maps.size(), 1u);
  EXPECT_EQ(maps[0].values, Tensor::matrix({{1, 2}, {3, 4}}));
}

TEST(Cam, MaskIdentities) {
  SeededRng rng(1);
  DiscriminatorNet d = small_conv_critic(rng);
  const Tensor x = gaussian_sample(rng, {3, 1, 10, 10});
  const auto plain = compute_cam(d, x, nullptr, CamVariant::cam);
  const ufs::SuppressionMatrix zero{Tensor({3, 5})};
  const auto kept0 = compute_cam(d, x, &zero, CamVariant::cam_ufs);
  const auto sup0 = compute_cam(d, x, &zero, CamVariant::cam_sup);
  for (std::size_t n = 0; n < 3; ++n) {
    EXPECT_EQ(plain[n].values.shape(), (numerics::Shape{6, 6}));
    for (double v : kept0[n].values.values()) EXPECT_EQ(v, 0.0);
    for (std::size_t q = 0; q < 36; ++q) EXPECT_NEAR(sup0[n].values[q], plain[n].values[q], 1e-12);
  }
  for (int trial = 0; trial < 10; ++trial) {
    const ufs::SuppressionMatrix s = random_mask(rng, 3, 5);
    const auto kept = compute_cam(d, x, &s, CamVariant::cam_ufs);
    const auto sup = compute_cam(d, x, &s, CamVariant::cam_sup);
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t q = 0; q < 36; ++q)
        EXPECT_NEAR(kept[n].values[q] + sup[n].values[q], plain[n].values[q], 1e-10);
  }
}

TEST(Cam, SumPlusBiasIsScore) {
  SeededRng rng(2);
  DiscriminatorNet d = small_conv_critic(rng);
  const Tensor x = gaussian_sample(rng, {4, 1, 10, 10});
  const auto maps = compute_cam(d, x, nullptr, CamVariant::cam);
  const gan::SplitOutput out = gan::discriminator_forward_split(d, x);
  for (std::size_t n = 0; n < 4; ++n) {
    double total = d.head_bias();
    for (double v : maps[n].values.values()) total += v;
    EXPECT_NEAR(total, out.scores[n], 1e-9);
  }
}

TEST(Cam, DefaultImageCritic) {
  SeededRng rng(3);
  const gan::Architecture arch = gan::image_architecture(16, 16);
  DiscriminatorNet d(arch.sample_shape, arch.discriminator_body, rng);
  const Tensor x = gaussian_sample(rng, {2, 1, 16, 16});
  const auto maps = compute_cam(d, x, nullptr, CamVariant::cam);
  const gan::SplitOutput out = gan::discriminator_forward_split(d, x);
  for (std::size_t n = 0; n < 2; ++n) {
    EXPECT_EQ(maps[n].values.shape(), (numerics::Shape{2, 2}));
    double total = d.head_bias();
    for (double v : maps[n].values.values()) total += v;
    EXPECT_NEAR(total, out.scores[n], 1e-9);
  }
}

TEST(Cam, TranslationEquivariantInInterior) {
  SeededRng rng(4);
  DiscriminatorNet d = small_conv_critic(rng, 12);
  const Tensor x = gaussian_sample(rng, {1, 1, 12, 12});
  Tensor shifted({1, 1, 12, 12});
  for (std::size_t r = 1; r < 12; ++r)
    for (std::size_t c = 1; c < 12; ++c) shifted.at(0, 0, r, c) = x.at(0, 0, r - 1, c - 1);
  const Tensor a = compute_cam(d, x, nullptr, CamVariant::cam)[0].values;
  const Tensor b = compute_cam(d, shifted, nullptr, CamVariant::cam)[0].values;
  for (std::size_t i = 0; i + 1 < 8; ++i)
    for (std::size_t j = 0; j + 1 < 8; ++j) EXPECT_NEAR(b.at(i + 1, j + 1), a.at(i, j), 1e-12);
}

TEST(Cam, Errors) {
  SeededRng rng(5);
  const gan::Architecture arch = gan::point_architecture();
  DiscriminatorNet mlp(arch.sample_shape, arch.discriminator_body, rng);
  EXPECT_THROW(compute_cam(mlp, Tensor({1, 2}), nullptr, CamVariant::cam), ContractError);
  DiscriminatorNet d = small_conv_critic(rng);
  const Tensor x({2, 1, 10, 10});
  EXPECT_THROW(compute_cam(d, x, nullptr, CamVariant::cam_ufs), ContractError);
  EXPECT_THROW(compute_cam(d, x, nullptr, CamVariant::cam_sup), ContractError);
  const ufs::SuppressionMatrix wrong{Tensor({2, 3})};
  EXPECT_THROW(compute_cam(d, x, &wrong, CamVariant::cam_ufs), DimensionError);
}

TEST(Upsample, Nearest) {
  const Tensor up = upsample_nearest(Tensor::matrix({{1, 2}, {3, 4}}), 2, 3);
  EXPECT_EQ(up, Tensor::matrix({{1, 1, 1, 2, 2, 2}, {1, 1, 1, 2, 2, 2}, {3, 3, 3, 4, 4, 4}, {3, 3, 3, 4, 4, 4}}));
}

TEST(Pgm, MinMaxArithmetic) {
  const PgmImage img = normalize_to_pgm(Tensor::matrix({{0, 1}, {2, 3}}));
  EXPECT_EQ(img.width, 2u);
  EXPECT_EQ(img.height, 2u);
  EXPECT_EQ(img.pixels, (std::vector<std::uint8_t>{0, 85, 170, 255}));
}

TEST(Pgm, ConstantMapIsMidGrey) {
  const PgmImage img = normalize_to_pgm(Tensor({3, 4}, -7.5));
  EXPECT_EQ(img.pixels, std::vector<std::uint8_t>(12, 128));
}

TEST(Pgm, RoundTrip) {
  SeededRng rng(6);
  const AttributionMap map{CamVariant::cam_sup, gaussian_sample(rng, {5, 7})};
  const auto path = std::filesystem::temp_directory_path() / cam_filename("roundtrip", 0, map.variant);
  heatmap_to_pgm(map, path);
  const PgmImage back = read_pgm(path);
  const PgmImage want = normalize_to_pgm(map.values);
  EXPECT_EQ(back.width, 7u);
  EXPECT_EQ(back.height, 5u);
  EXPECT_EQ(back.pixels, want.pixels);
  std::filesystem::remove(path);
}

TEST(Pgm, FileNaming) {
  EXPECT_EQ(cam_filename("run1", 3, CamVariant::cam), "run1_3_cam.pgm");
  EXPECT_EQ(cam_filename("run1", 0, CamVariant::cam_ufs), "run1_0_cam_ufs.pgm");
  EXPECT_EQ(cam_filename("r", 12, CamVariant::cam_sup), "r_12_cam_sup.pgm");
}

TEST(Pgm, MissingFileNamesPath) {
  try {
    read_pgm("/nonexistent/dir/x.pgm");
    FAIL();
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/dir/x.pgm"), std::string::npos);
  }
}
