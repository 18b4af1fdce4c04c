#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "ufslab/errors.hpp"
#include "ufslab/eval/embed.hpp"
#include "ufslab/eval/metrics.hpp"
#include "ufslab/harness/config.hpp"
#include "ufslab/harness/experiment.hpp"
#include "ufslab/harness/io.hpp"
#include "ufslab/selection/selection.hpp"
#include "ufslab/ufs/ufs.hpp"

namespace py = pybind11;
using namespace ufslab;
using numerics::Tensor;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
  numerics::Shape shape(a.shape(), a.shape() + a.ndim());
  Tensor t(shape);
  if (t.size() > 0) std::memcpy(t.data(), a.data(), t.size() * sizeof(double));
  return t;
}

Array to_array(const Tensor& t) {
  std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
  Array a(shape);
  if (t.size() > 0) std::memcpy(a.mutable_data(), t.data(), t.size() * sizeof(double));
  return a;
}

ufs::UfsConfig make_ufs(double alpha, double beta, double epsilon, double gamma) {
  ufs::UfsConfig c;
  c.alpha = alpha;
  c.beta = beta;
  c.epsilon = epsilon;
  c.gamma = gamma;
  c.validate();
  return c;
}

py::dict summary_dict(const harness::RunSummary& s) {
  py::dict d;
  d["exit_status"] = s.exit_status;
  d["initial_frechet"] = s.initial_frechet;
  d["final_frechet"] = s.final_frechet;
  d["best_frechet"] = s.best_frechet;
  d["best_iteration"] = s.best_iteration;
  d["message"] = s.message;
  py::list rows;
  for (const auto& r : s.rows) {
    py::dict row;
    row["iteration"] = r.iteration;
    row["L_D"] = r.loss_d;
    row["L_G"] = r.loss_g;
    row["frechet"] = r.frechet;
    row["precision"] = r.precision;
    row["recall"] = r.recall;
    row["density"] = r.density;
    row["coverage"] = r.coverage;
    row["covered_modes"] = r.covered_modes;
    row["hq_fraction"] = r.hq_fraction;
    row["wall_seconds"] = r.wall_seconds;
    rows.append(row);
  }
  d["rows"] = rows;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Feature suppression for adversarial training: core routines";

  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<StateError>(m, "StateError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def(
      "compute_suppression",
      [](const Array& ratio, double alpha, double beta, double epsilon) {
        return to_array(ufs::compute_suppression(to_tensor(ratio), make_ufs(alpha, beta, epsilon, 1e-4)).values);
      },
      py::arg("ratio"), py::arg("alpha"), py::arg("beta"), py::arg("epsilon"),
      "S = epsilon - clamp(R, alpha, beta), elementwise.");

  m.def(
      "compute_ratio",
      [](const Array& mu_real, const Array& mu_fake, const Array& y_hat, double gamma) {
        ufs::FeatureStats stats{to_tensor(mu_real), to_tensor(mu_fake), 0.0, true};
        ufs::UfsConfig cfg;
        cfg.gamma = gamma;
        return to_array(ufs::compute_ratio(stats, to_tensor(y_hat), cfg));
      },
      py::arg("mu_real"), py::arg("mu_fake"), py::arg("y_hat"), py::arg("gamma") = 1e-4);

  m.def(
      "suppression_for",
      [](const Array& mu_real, const Array& mu_fake, const Array& w, const Array& y_fake, double alpha, double beta,
         double epsilon, double gamma) {
        ufs::FeatureStats stats{to_tensor(mu_real), to_tensor(mu_fake), 0.0, true};
        return to_array(
            ufs::suppression_for(stats, to_tensor(w), to_tensor(y_fake), make_ufs(alpha, beta, epsilon, gamma)).values);
      },
      py::arg("mu_real"), py::arg("mu_fake"), py::arg("w"), py::arg("y_fake"), py::arg("alpha") = 0.0,
      py::arg("beta") = 1.0, py::arg("epsilon") = 1.0, py::arg("gamma") = 1e-4,
      "Suppression matrix [n x C] for raw critic features of a fake batch.");

  m.def(
      "apply_suppression",
      [](const Array& y, const Array& s, const Array& w, double b) {
        return to_array(ufs::apply_suppression(to_tensor(y), ufs::SuppressionMatrix{to_tensor(s)}, to_tensor(w), b));
      },
      py::arg("y_fake"), py::arg("s"), py::arg("w"), py::arg("b"));

  m.def(
      "classify_mode",
      [](double alpha, double beta, double epsilon) {
        const ufs::RegimeReport r = ufs::classify_mode(make_ufs(alpha, beta, epsilon, 1e-4));
        py::dict d;
        d["regime"] = ufs::to_string(r.regime);
        d["no_effective_suppression"] = r.no_effective_suppression;
        d["warning"] = r.warning;
        return d;
      },
      py::arg("alpha"), py::arg("beta"), py::arg("epsilon"));

  m.def(
      "select_indices",
      [](const std::vector<double>& scores, std::size_t k, const std::string& mode, std::uint64_t seed) {
        numerics::SeededRng rng(seed);
        return selection::select_indices(scores, k, selection::selection_mode_from_string(mode), rng);
      },
      py::arg("scores"), py::arg("k"), py::arg("mode") = "top", py::arg("seed") = 0);

  m.def(
      "instance_select",
      [](const Array& data, double retention, const std::string& covariance, std::uint64_t embedder_seed) {
        return selection::instance_select(
            to_tensor(data), {retention, embedder_seed, selection::covariance_mode_from_string(covariance)});
      },
      py::arg("data"), py::arg("retention") = 0.5, py::arg("covariance") = "full_shrinkage",
      py::arg("embedder_seed") = 0);

  m.def(
      "frechet_distance",
      [](const Array& a, const Array& b) {
        return eval::frechet_distance(eval::fit_gaussian(to_tensor(a)), eval::fit_gaussian(to_tensor(b)));
      },
      py::arg("a"), py::arg("b"), "Frechet distance between Gaussian fits of two sample sets [m x d].");

  m.def(
      "manifold_metrics",
      [](const Array& real, const Array& fake, std::size_t k) {
        const eval::ManifoldMetrics r = eval::manifold_metrics(to_tensor(real), to_tensor(fake), k);
        py::dict d;
        d["precision"] = r.precision;
        d["recall"] = r.recall;
        d["density"] = r.density;
        d["coverage"] = r.coverage;
        return d;
      },
      py::arg("real"), py::arg("fake"), py::arg("k") = 3);

  m.def(
      "mode_coverage",
      [](const Array& samples, const Array& centers, double sigma, double thresh_sigmas) {
        const eval::ModeCoverage r = eval::mode_coverage(to_tensor(samples), to_tensor(centers), sigma, thresh_sigmas);
        return py::make_tuple(r.covered_modes, r.high_quality_fraction);
      },
      py::arg("samples"), py::arg("centers"), py::arg("sigma"), py::arg("thresh_sigmas") = 3.0);

  m.def(
      "random_feature_embed",
      [](const Array& images, std::uint64_t seed) { return to_array(eval::random_feature_embed(to_tensor(images), seed)); },
      py::arg("images"), py::arg("seed") = 0);

  m.def(
      "read_checkpoint",
      [](const std::string& path) {
        py::dict d;
        for (const auto& [name, t] : harness::read_checkpoint(path)) d[py::str(name)] = to_array(t);
        return d;
      },
      py::arg("path"));

  m.def(
      "run_experiment",
      [](const std::string& config_path, const std::vector<std::string>& overrides) {
        nlohmann::json doc = harness::config_to_json(harness::load_config(config_path));
        for (const std::string& o : overrides) harness::apply_override(doc, o);
        const harness::ExperimentConfig cfg = harness::config_from_json(doc);
        cfg.validate();
        harness::RunSummary s;
        {
          py::gil_scoped_release release;
          s = harness::run_experiment(cfg);
        }
        return summary_dict(s);
      },
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
      "Runs one experiment from a JSON config with optional key=value overrides.");

  m.attr("METRICS_HEADER") = harness::kMetricsHeader;
}
