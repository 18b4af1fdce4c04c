#include "ufslab/selection/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "ufslab/errors.hpp"
#include "ufslab/eval/embed.hpp"

namespace ufslab::selection {

std::string to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::top: return "top";
    case SelectionMode::bottom: return "bottom";
    case SelectionMode::random: return "random";
    case SelectionMode::none: return "none";
  }
  return "none";
}

SelectionMode selection_mode_from_string(const std::string& name) {
  for (auto m : {SelectionMode::top, SelectionMode::bottom, SelectionMode::random, SelectionMode::none}) {
    if (to_string(m) == name) return m;
  }
  throw ContractError("unknown selection mode '" + name + "'");
}

void SelectionConfig::validate(std::size_t batch_size) const {
  if (mode == SelectionMode::none) return;
  if (!(1 <= k_end && k_end <= k_start && k_start <= batch_size)) {
    throw ContractError("SelectionConfig: need 1 <= k_end <= k_start <= batch size (" + std::to_string(k_end) + ", " +
                        std::to_string(k_start) + ", " + std::to_string(batch_size) + ")");
  }
  if (!(anneal_fraction > 0.0 && anneal_fraction <= 1.0)) {
    throw ContractError("SelectionConfig: anneal_fraction must lie in (0, 1]");
  }
}

std::vector<std::size_t> select_indices(std::span<const double> scores, std::size_t k, SelectionMode mode,
                                        SeededRng& rng) {
  const std::size_t n = scores.size();
  if (mode == SelectionMode::none) k = n;
  if (k < 1 || k > n) {
    throw ContractError("select_indices: k = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  switch (mode) {
    case SelectionMode::none:
      return order;
    case SelectionMode::top:
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      break;
    case SelectionMode::bottom:
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
      break;
    case SelectionMode::random:
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng.uniform_index(n - i);
        std::swap(order[i], order[j]);
      }
      break;
  }
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

std::size_t anneal_k(const SelectionConfig& cfg, std::size_t t, std::size_t total) {
  if (t > total) throw ContractError("anneal_k: t must not exceed T");
  const double window = cfg.anneal_fraction * static_cast<double>(total);
  const double progress = window > 0.0 ? std::min(static_cast<double>(t) / window, 1.0) : 1.0;
  const double k = static_cast<double>(cfg.k_start) +
                   (static_cast<double>(cfg.k_end) - static_cast<double>(cfg.k_start)) * progress;
  return static_cast<std::size_t>(std::llround(k));
}

std::string to_string(CovarianceMode mode) {
  return mode == CovarianceMode::diagonal ? "diagonal" : "full_shrinkage";
}

CovarianceMode covariance_mode_from_string(const std::string& name) {
  if (name == "full_shrinkage") return CovarianceMode::full_shrinkage;
  if (name == "diagonal") return CovarianceMode::diagonal;
  throw ContractError("unknown covariance mode '" + name + "'");
}

std::vector<double> gaussian_log_density(const Tensor& embeddings, CovarianceMode mode) {
  if (embeddings.rank() != 2 || embeddings.dim(0) < 2) {
    throw ContractError("gaussian_log_density: need an [N x d] matrix with N >= 2");
  }
  const auto n = static_cast<Eigen::Index>(embeddings.dim(0));
  const auto d = static_cast<Eigen::Index>(embeddings.dim(1));
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> x(embeddings.data(), n, d);
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd centered = x.rowwise() - mean;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  if (mode == CovarianceMode::diagonal) cov = Eigen::MatrixXd(cov.diagonal().asDiagonal());
  const double delta = 1e-6 * cov.trace() / static_cast<double>(d);
  cov.diagonal().array() += delta;

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success || !(delta > 0.0)) {
    throw NumericError("gaussian_log_density: covariance is singular after shrinkage (delta = " +
                       std::to_string(delta) + ", dim = " + std::to_string(d) + ")");
  }
  const Eigen::MatrixXd l = llt.matrixL();
  const double log_det = 2.0 * l.diagonal().array().log().sum();
  const double constant = -0.5 * (static_cast<double>(d) * std::log(2.0 * std::numbers::pi) + log_det);
  const Eigen::MatrixXd solved = llt.matrixL().solve(centered.transpose());
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = constant - 0.5 * solved.col(i).squaredNorm();
  return out;
}

std::vector<std::size_t> instance_select(const Tensor& dataset, const InstanceSelectionConfig& cfg) {
  if (dataset.rank() < 2 || dataset.dim(0) < 4) throw ContractError("instance_select: need at least 4 samples");
  if (!(cfg.retention_ratio > 0.0 && cfg.retention_ratio <= 1.0)) {
    throw ContractError("instance_select: retention_ratio must lie in (0, 1]");
  }
  const std::size_t n = dataset.dim(0);
  const auto keep = static_cast<std::size_t>(std::ceil(cfg.retention_ratio * static_cast<double>(n) - 1e-9));
  if (keep < 2) throw ContractError("instance_select: retention keeps fewer than 2 samples");

  Tensor embeddings;
  if (dataset.rank() == 2) {
    embeddings = dataset;
  } else if (dataset.rank() == 4) {
    embeddings = eval::random_feature_embed(dataset, cfg.embedder_seed);
  } else {
    throw DimensionError("instance_select: expected [N x d] points or [N x 1 x h x w] images, got " +
                         numerics::shape_to_string(dataset.shape()));
  }
  const std::vector<double> score = gaussian_log_density(embeddings, cfg.covariance);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

void write_index_list(const std::filesystem::path& path, std::span<const std::size_t> indices) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i : indices) out << i << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::size_t> read_index_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::size_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(line, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != line.size()) throw ParseError(path.string() + ":" + std::to_string(line_no) + ": not an index");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace ufslab::selection
