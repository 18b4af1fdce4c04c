#include "ufslab/harness/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ufslab/attribution/cam.hpp"
#include "ufslab/errors.hpp"

namespace ufslab::harness {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& field, const std::string& context) {
  if (field == "nan") return std::nan("");
  if (field == "inf") return INFINITY;
  if (field == "-inf") return -INFINITY;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(field, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != field.size() || field.empty()) throw ParseError(context + ": '" + field + "' is not a number");
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_metrics_row(const MetricsRecord& r) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", r.wall_seconds);
  std::ostringstream out;
  out << r.iteration << ',' << fmt_double(r.loss_d) << ',' << fmt_double(r.loss_g) << ',' << fmt_double(r.frechet)
      << ',' << fmt_double(r.precision) << ',' << fmt_double(r.recall) << ',' << fmt_double(r.density) << ','
      << fmt_double(r.coverage) << ',' << r.covered_modes << ',' << fmt_double(r.hq_fraction) << ',' << wall;
  return out.str();
}

void log_metrics_csv(const MetricsRecord& record, const std::filesystem::path& path, const char* header) {
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open " + path.string() + " for appending");
  if (fresh) out << header << '\n';
  out << format_metrics_row(record) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<MetricsRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kMetricsHeader && line != kImageMetricsHeader) throw ParseError(path.string() + ": unexpected header");
  std::vector<MetricsRecord> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto f = split_csv(line);
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    if (f.size() != 11) throw ParseError(ctx + ": expected 11 fields");
    MetricsRecord r;
    r.iteration = static_cast<std::size_t>(parse_double(f[0], ctx));
    r.loss_d = parse_double(f[1], ctx);
    r.loss_g = parse_double(f[2], ctx);
    r.frechet = parse_double(f[3], ctx);
    r.precision = parse_double(f[4], ctx);
    r.recall = parse_double(f[5], ctx);
    r.density = parse_double(f[6], ctx);
    r.coverage = parse_double(f[7], ctx);
    r.covered_modes = static_cast<std::size_t>(parse_double(f[8], ctx));
    r.hq_fraction = parse_double(f[9], ctx);
    r.wall_seconds = parse_double(f[10], ctx);
    rows.push_back(r);
  }
  return rows;
}

namespace {

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

class Reader {
 public:
  Reader(std::ifstream& in, std::string source) : in_(in), source_(std::move(source)) {}

  template <typename T>
  T get() {
    T value{};
    bytes(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
  }

  void bytes(char* into, std::size_t n) {
    if (!in_.read(into, static_cast<std::streamsize>(n))) {
      throw ParseError(source_ + ": truncated checkpoint at byte offset " + std::to_string(offset_));
    }
    offset_ += n;
  }

  std::size_t offset() const { return offset_; }

 private:
  std::ifstream& in_;
  std::string source_;
  std::size_t offset_ = 0;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ostringstream buffer;
  buffer.write("UFSL", 4);
  put<std::uint32_t>(buffer, kCheckpointVersion);
  put<std::uint32_t>(buffer, static_cast<std::uint32_t>(checkpoint.size()));
  for (const auto& [name, tensor] : checkpoint) {
    put<std::uint32_t>(buffer, static_cast<std::uint32_t>(name.size()));
    buffer.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(buffer, static_cast<std::uint32_t>(tensor.rank()));
    for (std::size_t extent : tensor.shape()) put<std::uint64_t>(buffer, extent);
    buffer.write(reinterpret_cast<const char*>(tensor.data()), static_cast<std::streamsize>(tensor.size() * 8));
  }
  // Write-then-rename keeps the previous checkpoint intact if writing fails.
  const auto tmp = std::filesystem::path(path).concat(".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    const std::string bytes = buffer.str();
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  Reader r(in, path.string());
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "UFSL", 4) != 0) throw ParseError(path.string() + ": bad checkpoint magic at byte offset 0");
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ParseError(path.string() + ": incompatible checkpoint version " + std::to_string(version) + " (expected " +
                     std::to_string(kCheckpointVersion) + ")");
  }
  const auto count = r.get<std::uint32_t>();
  Checkpoint checkpoint;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto name_len = r.get<std::uint32_t>();
    if (name_len == 0 || name_len > 4096) {
      throw ParseError(path.string() + ": bad entry name length at byte offset " + std::to_string(r.offset() - 4));
    }
    std::string name(name_len, '\0');
    r.bytes(name.data(), name_len);
    const auto rank = r.get<std::uint32_t>();
    if (rank == 0 || rank > 8) {
      throw ParseError(path.string() + ": bad rank for '" + name + "' at byte offset " + std::to_string(r.offset() - 4));
    }
    numerics::Shape shape(rank);
    std::uint64_t total = 1;
    for (auto& extent : shape) {
      extent = static_cast<std::size_t>(r.get<std::uint64_t>());
      if (extent == 0 || extent > (1ULL << 32)) {
        throw ParseError(path.string() + ": bad extent for '" + name + "' at byte offset " +
                         std::to_string(r.offset() - 8));
      }
      total *= extent;
    }
    if (total > (1ULL << 32)) throw ParseError(path.string() + ": entry '" + name + "' is implausibly large");
    std::vector<double> data(total);
    r.bytes(reinterpret_cast<char*>(data.data()), total * 8);
    checkpoint.emplace(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return checkpoint;
}

namespace {

void save_params(Checkpoint& c, const std::string& prefix, const std::vector<std::string>& names,
                 const std::vector<const Tensor*>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) c.emplace(prefix + names[i], *params[i]);
}

void save_adam(Checkpoint& c, const std::string& prefix, const numerics::AdamState& opt) {
  for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
    c.emplace(prefix + "m/" + std::to_string(i), opt.first_moments()[i]);
    c.emplace(prefix + "v/" + std::to_string(i), opt.second_moments()[i]);
  }
  c.emplace(prefix + "steps", Tensor({1}, {static_cast<double>(opt.step_count())}));
}

const Tensor& entry(const Checkpoint& c, const std::string& name) {
  auto it = c.find(name);
  if (it == c.end()) throw ParseError("checkpoint is missing entry '" + name + "'");
  return it->second;
}

void load_params(const Checkpoint& c, const std::string& prefix, const std::vector<std::string>& names,
                 const std::vector<Tensor*>& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor& stored = entry(c, prefix + names[i]);
    if (stored.shape() != params[i]->shape()) {
      throw DimensionError("checkpoint entry '" + prefix + names[i] + "' has shape " +
                           numerics::shape_to_string(stored.shape()) + ", model expects " +
                           numerics::shape_to_string(params[i]->shape()));
    }
    *params[i] = stored;
  }
}

void load_adam(const Checkpoint& c, const std::string& prefix, numerics::AdamState& opt) {
  std::vector<Tensor> m, v;
  for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
    m.push_back(entry(c, prefix + "m/" + std::to_string(i)));
    v.push_back(entry(c, prefix + "v/" + std::to_string(i)));
  }
  opt.restore(std::move(m), std::move(v), static_cast<std::uint64_t>(entry(c, prefix + "steps")[0]));
}

void save_stats(Checkpoint& c, const ufs::FeatureStats& stats) {
  c.emplace("stats/initialized", Tensor({1}, {stats.initialized ? 1.0 : 0.0}));
  c.emplace("stats/momentum", Tensor({1}, {stats.momentum}));
  if (stats.initialized) {
    c.emplace("stats/mu_real", stats.mu_real);
    c.emplace("stats/mu_fake", stats.mu_fake);
  }
}

void load_stats(const Checkpoint& c, ufs::FeatureStats& stats) {
  stats.initialized = entry(c, "stats/initialized")[0] != 0.0;
  stats.momentum = entry(c, "stats/momentum")[0];
  if (stats.initialized) {
    stats.mu_real = entry(c, "stats/mu_real");
    stats.mu_fake = entry(c, "stats/mu_fake");
  } else {
    stats.mu_real = Tensor();
    stats.mu_fake = Tensor();
  }
}

}  // namespace

Checkpoint save_train_state(const gan::TrainState& state) {
  Checkpoint c;
  save_params(c, "generator/", state.generator.net().parameter_names(), state.generator.parameters());
  save_params(c, "discriminator/", state.discriminator.parameter_names(), state.discriminator.parameters());
  save_adam(c, "generator_opt/", state.generator_opt);
  save_adam(c, "discriminator_opt/", state.discriminator_opt);
  save_stats(c, state.stats);
  c.emplace("state/iteration", Tensor({1}, {static_cast<double>(state.iteration)}));
  c.emplace("state/critic_steps", Tensor({1}, {static_cast<double>(state.critic_steps_taken)}));
  return c;
}

void restore_train_state(gan::TrainState& state, const Checkpoint& c) {
  load_params(c, "generator/", state.generator.net().parameter_names(), state.generator.parameters());
  restore_discriminator(state.discriminator, state.stats, c);
  load_adam(c, "generator_opt/", state.generator_opt);
  load_adam(c, "discriminator_opt/", state.discriminator_opt);
  state.iteration = static_cast<std::size_t>(entry(c, "state/iteration")[0]);
  state.critic_steps_taken = static_cast<std::size_t>(entry(c, "state/critic_steps")[0]);
}

void restore_discriminator(gan::DiscriminatorNet& d, ufs::FeatureStats& stats, const Checkpoint& c) {
  load_params(c, "discriminator/", d.parameter_names(), d.parameters());
  load_stats(c, stats);
}

void write_points_csv(const std::filesystem::path& path, const Tensor& points) {
  if (points.rank() != 2) throw DimensionError("write_points_csv expects [n x d]");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < points.dim(0); ++i) {
    for (std::size_t j = 0; j < points.dim(1); ++j) {
      if (j) out << ',';
      out << fmt_double(points.at(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Tensor read_points_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    if (rows == 0 && line_no == 1) {
      // Tolerate one header line.
      bool numeric = true;
      for (const auto& f : fields) {
        try {
          parse_double(f, ctx);
        } catch (const ParseError&) {
          numeric = false;
        }
      }
      if (!numeric) continue;
    }
    if (cols == 0) cols = fields.size();
    if (fields.size() != cols) throw ParseError(ctx + ": expected " + std::to_string(cols) + " fields");
    for (const auto& f : fields) values.push_back(parse_double(f, ctx));
    ++rows;
  }
  if (rows == 0) throw ParseError(path.string() + ": no numeric rows");
  return Tensor({rows, cols}, std::move(values));
}

void write_image_grid(const std::filesystem::path& path, const Tensor& images) {
  if (images.rank() != 4 || images.dim(1) != 1) throw DimensionError("write_image_grid expects [n x 1 x h x w]");
  const std::size_t n = images.dim(0), h = images.dim(2), w = images.dim(3);
  const auto cols = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
  const std::size_t rows = (n + cols - 1) / cols;
  attribution::PgmImage grid{cols * w, rows * h, std::vector<std::uint8_t>(cols * w * rows * h, 0)};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t oy = (i / cols) * h, ox = (i % cols) * w;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double v = std::clamp((images.at(i, 0, y, x) + 1.0) * 127.5, 0.0, 255.0);
        grid.pixels[(oy + y) * grid.width + ox + x] = static_cast<std::uint8_t>(std::lround(v));
      }
    }
  }
  attribution::write_pgm(path, grid);
}

}  // namespace ufslab::harness
