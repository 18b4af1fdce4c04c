#include "ufslab/harness/config.hpp"

#include <fstream>
#include <set>

#include "ufslab/errors.hpp"

namespace ufslab::harness {

using nlohmann::json;

std::string to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::ring8: return "ring8";
    case DatasetKind::grid25: return "grid25";
    case DatasetKind::idx_images: return "idx_images";
    case DatasetKind::synthetic_shapes: return "synthetic_shapes";
  }
  return "ring8";
}

DatasetKind dataset_kind_from_string(const std::string& name) {
  for (auto k : {DatasetKind::ring8, DatasetKind::grid25, DatasetKind::idx_images, DatasetKind::synthetic_shapes}) {
    if (to_string(k) == name) return k;
  }
  throw ParseError("unknown dataset '" + name + "'");
}

namespace {

/// Reads fields from one JSON object and rejects keys nobody asked for.
class StrictObject {
 public:
  StrictObject(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ParseError("config: '" + display() + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& into) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end()) return;
    try {
      into = it->get<T>();
    } catch (const json::exception& e) {
      throw ParseError("config: bad value for '" + child(key) + "': " + e.what());
    }
  }

  /// Nested object, or nullptr when absent or null.
  const json* object(const char* key) {
    seen_.insert(key);
    auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  bool has(const char* key) const { return obj_.contains(key); }

  std::string child(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& item : obj_.items()) {
      if (!seen_.count(item.key())) throw ParseError("config: unknown key '" + child(item.key().c_str()) + "'");
    }
  }

 private:
  std::string display() const { return path_.empty() ? "<root>" : path_; }

  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

numerics::AdamConfig parse_adam(const json& j, const std::string& path, numerics::AdamConfig base) {
  StrictObject o(j, path);
  o.read("lr", base.lr);
  o.read("beta1", base.beta1);
  o.read("beta2", base.beta2);
  o.read("eps", base.eps);
  o.finish();
  return base;
}

json adam_json(const numerics::AdamConfig& a) {
  return {{"lr", a.lr}, {"beta1", a.beta1}, {"beta2", a.beta2}, {"eps", a.eps}};
}

ufs::UfsConfig parse_ufs(const json& j) {
  ufs::UfsConfig u;
  StrictObject o(j, "ufs");
  o.read("alpha", u.alpha);
  o.read("beta", u.beta);
  o.read("epsilon", u.epsilon);
  o.read("gamma", u.gamma);
  o.read("denom_floor", u.denom_floor);
  o.read("near_real_ratio", u.near_real_ratio);
  if (const json* a = o.object("beta_anneal")) {
    ufs::BetaAnneal anneal;
    StrictObject ao(*a, "ufs.beta_anneal");
    ao.read("beta_start", anneal.beta_start);
    ao.read("beta_end", anneal.beta_end);
    ao.read("anneal_fraction", anneal.anneal_fraction);
    ao.finish();
    u.beta_anneal = anneal;
  }
  o.finish();
  return u;
}

selection::SelectionConfig parse_selection(const json& j) {
  selection::SelectionConfig s;
  StrictObject o(j, "selection");
  std::string mode = selection::to_string(s.mode);
  o.read("mode", mode);
  s.mode = selection::selection_mode_from_string(mode);
  o.read("k_start", s.k_start);
  o.read("k_end", s.k_end);
  o.read("anneal_fraction", s.anneal_fraction);
  o.finish();
  return s;
}

selection::InstanceSelectionConfig parse_instance_selection(const json& j) {
  selection::InstanceSelectionConfig c;
  StrictObject o(j, "dataset_params.instance_selection");
  o.read("retention_ratio", c.retention_ratio);
  o.read("embedder_seed", c.embedder_seed);
  std::string cov = selection::to_string(c.covariance);
  o.read("covariance", cov);
  c.covariance = selection::covariance_mode_from_string(cov);
  o.finish();
  return c;
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig cfg;
  StrictObject root(doc, "");
  std::string dataset = to_string(cfg.dataset);
  root.read("dataset", dataset);
  cfg.dataset = dataset_kind_from_string(dataset);
  root.read("output_dir", cfg.output_dir);
  root.read("seed", cfg.seed);

  if (const json* j = root.object("dataset_params")) {
    StrictObject o(*j, "dataset_params");
    auto& p = cfg.dataset_params;
    o.read("mode_radius", p.mode_radius);
    o.read("mode_sigma", p.mode_sigma);
    o.read("grid_spacing", p.grid_spacing);
    o.read("grid_sigma", p.grid_sigma);
    o.read("image_path", p.image_path);
    o.read("image_size", p.image_size);
    if (const json* is = o.object("instance_selection")) p.instance_selection = parse_instance_selection(*is);
    o.finish();
  }

  if (const json* j = root.object("train")) {
    StrictObject o(*j, "train");
    auto& t = cfg.train;
    o.read("batch_size", t.batch_size);
    o.read("n_critic", t.n_critic);
    o.read("iterations", t.iterations);
    std::string loss = gan::to_string(t.loss.kind);
    o.read("loss", loss);
    t.loss.kind = gan::loss_kind_from_string(loss);
    o.read("gp_lambda", t.loss.gp_lambda);
    o.read("feature_momentum", t.feature_momentum);
    o.read("strict_stats", t.strict_stats);
    if (const json* a = o.object("generator_adam")) t.generator_adam = parse_adam(*a, "train.generator_adam", t.generator_adam);
    if (const json* a = o.object("discriminator_adam")) {
      t.discriminator_adam = parse_adam(*a, "train.discriminator_adam", t.discriminator_adam);
    }
    o.finish();
  }

  if (const json* j = root.object("ufs")) cfg.train.ufs = parse_ufs(*j);
  if (const json* j = root.object("selection")) cfg.train.selection = parse_selection(*j);

  if (const json* j = root.object("eval")) {
    StrictObject o(*j, "eval");
    o.read("cadence", cfg.eval.cadence);
    o.read("samples", cfg.eval.samples);
    o.read("k", cfg.eval.k);
    o.read("hq_thresh_sigmas", cfg.eval.hq_thresh_sigmas);
    o.read("dump_samples", cfg.eval.dump_samples);
    o.finish();
  }
  root.finish();
  cfg.train.seed = cfg.seed;
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  const auto& p = cfg.dataset_params;
  json params = {{"mode_radius", p.mode_radius}, {"mode_sigma", p.mode_sigma}, {"grid_spacing", p.grid_spacing},
                 {"grid_sigma", p.grid_sigma},   {"image_path", p.image_path}, {"image_size", p.image_size},
                 {"instance_selection", nullptr}};
  if (p.instance_selection) {
    params["instance_selection"] = {{"retention_ratio", p.instance_selection->retention_ratio},
                                    {"embedder_seed", p.instance_selection->embedder_seed},
                                    {"covariance", selection::to_string(p.instance_selection->covariance)}};
  }
  const auto& t = cfg.train;
  json doc = {
      {"dataset", to_string(cfg.dataset)},
      {"dataset_params", params},
      {"train",
       {{"batch_size", t.batch_size},
        {"n_critic", t.n_critic},
        {"iterations", t.iterations},
        {"loss", gan::to_string(t.loss.kind)},
        {"gp_lambda", t.loss.gp_lambda},
        {"feature_momentum", t.feature_momentum},
        {"strict_stats", t.strict_stats},
        {"generator_adam", adam_json(t.generator_adam)},
        {"discriminator_adam", adam_json(t.discriminator_adam)}}},
      {"ufs", nullptr},
      {"selection", nullptr},
      {"eval",
       {{"cadence", cfg.eval.cadence},
        {"samples", cfg.eval.samples},
        {"k", cfg.eval.k},
        {"hq_thresh_sigmas", cfg.eval.hq_thresh_sigmas},
        {"dump_samples", cfg.eval.dump_samples}}},
      {"output_dir", cfg.output_dir},
      {"seed", cfg.seed}};
  if (t.ufs) {
    const auto& u = *t.ufs;
    doc["ufs"] = {{"alpha", u.alpha}, {"beta", u.beta}, {"epsilon", u.epsilon}, {"gamma", u.gamma},
                  {"denom_floor", u.denom_floor}, {"near_real_ratio", u.near_real_ratio}, {"beta_anneal", nullptr}};
    if (u.beta_anneal) {
      doc["ufs"]["beta_anneal"] = {{"beta_start", u.beta_anneal->beta_start},
                                   {"beta_end", u.beta_anneal->beta_end},
                                   {"anneal_fraction", u.beta_anneal->anneal_fraction}};
    }
  }
  if (t.selection) {
    doc["selection"] = {{"mode", selection::to_string(t.selection->mode)},
                        {"k_start", t.selection->k_start},
                        {"k_end", t.selection->k_end},
                        {"anneal_fraction", t.selection->anneal_fraction}};
  }
  return doc;
}

void ExperimentConfig::validate() const {
  if (eval.cadence < 1) throw ContractError("config: eval.cadence must be >= 1");
  if (eval.samples < eval.k + 1) throw ContractError("config: eval.samples must exceed eval.k");
  if (eval.samples > 10000) throw ContractError("config: eval.samples is capped at 10000");
  if (dataset == DatasetKind::idx_images && !std::filesystem::exists(dataset_params.image_path)) {
    throw ContractError("config: image file '" + dataset_params.image_path + "' does not exist");
  }
  if (dataset == DatasetKind::ring8 && !(dataset_params.mode_sigma > 0.0)) {
    throw ContractError("config: mode_sigma must be positive");
  }
  if (dataset == DatasetKind::grid25 && !(dataset_params.grid_sigma > 0.0)) {
    throw ContractError("config: grid_sigma must be positive");
  }
  if (dataset == DatasetKind::synthetic_shapes && dataset_params.image_size < 8) {
    throw ContractError("config: image_size must be at least 8");
  }
  train.validate();
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

void save_config(const std::filesystem::path& path, const ExperimentConfig& cfg) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << config_to_json(cfg).dump(2) << '\n';
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ParseError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ParseError("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ParseError("override key '" + key + "': '" + part + "' is not an object");
    node = &next;
    start = dot + 1;
  }
}

}  // namespace ufslab::harness
