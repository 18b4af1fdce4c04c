#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <set>

#include "ufslab/errors.hpp"
#include "ufslab/numerics/rng.hpp"
#include "ufslab/selection/selection.hpp"

using namespace ufslab;
using namespace ufslab::selection;
using numerics::gaussian_sample;

namespace {

// Full-sort oracle: order by score (descending for top), ties by index.
std::vector<std::size_t> sort_oracle(const std::vector<double>& s, std::size_t k, bool top) {
  std::vector<std::size_t> idx(s.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (s[a] != s[b]) return top ? s[a] > s[b] : s[a] < s[b];
    return a < b;
  });
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

TEST(SelectIndices, TopExample) {
  SeededRng rng(0);
  const std::vector<double> s{0.9, -0.2, 0.5};
  EXPECT_EQ(select_indices(s, 2, SelectionMode::top, rng), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(select_indices(s, 2, SelectionMode::bottom, rng), (std::vector<std::size_t>{1, 2}));
}

TEST(SelectIndices, FullBatchIsEverything) {
  SeededRng rng(1);
  const std::vector<double> s{3, 1, 2, 2};
  for (auto mode : {SelectionMode::top, SelectionMode::bottom, SelectionMode::random, SelectionMode::none}) {
    EXPECT_EQ(select_indices(s, 4, mode, rng), (std::vector<std::size_t>{0, 1, 2, 3}));
  }
}

TEST(SelectIndices, KOutOfRange) {
  SeededRng rng(2);
  const std::vector<double> s{1, 2};
  EXPECT_THROW(select_indices(s, 0, SelectionMode::top, rng), ContractError);
  EXPECT_THROW(select_indices(s, 3, SelectionMode::top, rng), ContractError);
}

TEST(SelectIndices, TiesGoToLowerIndex) {
  SeededRng rng(3);
  const std::vector<double> s{1, 1, 1, 0};
  EXPECT_EQ(select_indices(s, 2, SelectionMode::top, rng), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(select_indices(s, 2, SelectionMode::bottom, rng), (std::vector<std::size_t>{0, 3}));
}

TEST(SelectIndices, MatchesSortOracle) {
  SeededRng rng(4);
  for (std::size_t n = 1; n <= 64; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> s(n);
      // Coarse values so ties occur.
      for (double& v : s) v = std::round(rng.normal() * 3) / 2;
      const std::size_t k = 1 + rng.uniform_index(n);
      EXPECT_EQ(select_indices(s, k, SelectionMode::top, rng), sort_oracle(s, k, true));
      EXPECT_EQ(select_indices(s, k, SelectionMode::bottom, rng), sort_oracle(s, k, false));
    }
  }
}

TEST(SelectIndices, RandomIsUniqueInRangeAndSeeded) {
  SeededRng a(5), b(5);
  std::vector<double> s(30, 0.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = select_indices(s, 12, SelectionMode::random, a);
    EXPECT_EQ(x, select_indices(s, 12, SelectionMode::random, b));
    EXPECT_EQ(std::set<std::size_t>(x.begin(), x.end()).size(), 12u);
    EXPECT_LT(x.back(), 30u);
  }
  // Every index shows up eventually.
  std::vector<int> hits(30, 0);
  for (int trial = 0; trial < 500; ++trial)
    for (auto i : select_indices(s, 5, SelectionMode::random, a)) ++hits[i];
  for (int h : hits) EXPECT_GT(h, 0);
}

TEST(SelectIndices, TopIsBottomOfNegated) {
  SeededRng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(40), k = 1 + rng.uniform_index(n);
    std::vector<double> s(n), neg(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::round(rng.normal() * 4), neg[i] = -s[i];
    EXPECT_EQ(select_indices(s, k, SelectionMode::top, rng), select_indices(neg, k, SelectionMode::bottom, rng));
  }
}

TEST(AnnealK, Schedule) {
  const SelectionConfig c{SelectionMode::top, 64, 32, 0.5};
  EXPECT_EQ(anneal_k(c, 0, 1000), 64u);
  EXPECT_EQ(anneal_k(c, 500, 1000), 32u);
  EXPECT_EQ(anneal_k(c, 1000, 1000), 32u);
  EXPECT_EQ(anneal_k(c, 250, 1000), 48u);
  std::size_t prev = 64;
  for (std::size_t t = 0; t <= 1000; ++t) {
    const std::size_t k = anneal_k(c, t, 1000);
    EXPECT_LE(k, prev);
    EXPECT_GE(k, 32u);
    EXPECT_LE(k, 64u);
    prev = k;
  }
}

TEST(SelectionConfig, Validation) {
  EXPECT_THROW((SelectionConfig{SelectionMode::top, 32, 64, 0.5}.validate(64)), ContractError);
  EXPECT_THROW((SelectionConfig{SelectionMode::top, 128, 32, 0.5}.validate(64)), ContractError);
  EXPECT_THROW((SelectionConfig{SelectionMode::top, 64, 0, 0.5}.validate(64)), ContractError);
  EXPECT_NO_THROW((SelectionConfig{SelectionMode::top, 64, 32, 0.5}.validate(64)));
}

namespace {

Tensor cluster(SeededRng& rng, std::size_t n) { return gaussian_sample(rng, {n, 2}, 0.0, 1.0); }

}  // namespace

TEST(InstanceSelect, RetentionCounts) {
  SeededRng rng(7);
  const Tensor d = cluster(rng, 10);
  EXPECT_EQ(instance_select(d, {1.0, 0, CovarianceMode::full_shrinkage}).size(), 10u);
  EXPECT_EQ(instance_select(d, {0.5, 0, CovarianceMode::full_shrinkage}).size(), 5u);
  EXPECT_EQ(instance_select(d, {0.33, 0, CovarianceMode::diagonal}).size(), 4u);
  EXPECT_THROW(instance_select(d, {0.1, 0, CovarianceMode::full_shrinkage}), ContractError);
  EXPECT_THROW(instance_select(cluster(rng, 3), {1.0, 0, CovarianceMode::full_shrinkage}), ContractError);
}

TEST(InstanceSelect, OutlierIsPruned) {
  SeededRng rng(8);
  Tensor d = cluster(rng, 100);
  d.at(37, 0) = 1e6;
  d.at(37, 1) = -1e6;
  for (auto mode : {CovarianceMode::full_shrinkage, CovarianceMode::diagonal}) {
    const auto kept = instance_select(d, {0.9, 0, mode});
    EXPECT_EQ(kept.size(), 90u);
    EXPECT_EQ(std::find(kept.begin(), kept.end(), 37u), kept.end());
  }
}

TEST(InstanceSelect, PermutationEquivariant) {
  SeededRng rng(9);
  const Tensor d = cluster(rng, 40);
  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 39; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  const auto kept = instance_select(d, {0.5, 0, CovarianceMode::full_shrinkage});
  const auto kept_perm = instance_select(d.gather_rows(perm), {0.5, 0, CovarianceMode::full_shrinkage});
  std::vector<std::size_t> mapped;
  for (auto j : kept_perm) mapped.push_back(perm[j]);
  std::sort(mapped.begin(), mapped.end());
  EXPECT_EQ(mapped, kept);
}

TEST(InstanceSelect, ImagesGoThroughEmbedder) {
  SeededRng rng(10);
  Tensor imgs = gaussian_sample(rng, {12, 1, 8, 8}, 0.0, 0.1);
  for (std::size_t y = 0; y < 8; ++y)
    for (std::size_t x = 0; x < 8; ++x) imgs.at(5, 0, y, x) = 1e3;
  const auto kept = instance_select(imgs, {0.75, 3, CovarianceMode::diagonal});
  EXPECT_EQ(kept.size(), 9u);
  EXPECT_EQ(std::find(kept.begin(), kept.end(), 5u), kept.end());
  EXPECT_EQ(kept, instance_select(imgs, {0.75, 3, CovarianceMode::diagonal}));
}

TEST(IndexList, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "ufslab_index_list.txt";
  const std::vector<std::size_t> idx{0, 4, 17, 1000003};
  write_index_list(path, idx);
  EXPECT_EQ(read_index_list(path), idx);
  std::filesystem::remove(path);
}
