#include "vc/training/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

namespace vc::training {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'C', 'K', '1'};

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}
  template <typename T>
  void pod(const T& v) {
    os_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void block(const std::string& name, const compute::Tensor& t) {
    pod(static_cast<std::uint32_t>(name.size()));
    os_.write(name.data(), static_cast<std::streamsize>(name.size()));
    pod(static_cast<std::uint32_t>(t.rank()));
    for (auto e : t.shape()) pod(static_cast<std::uint32_t>(e));
    std::vector<float> f(t.values().begin(), t.values().end());
    os_.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size() * sizeof(float)));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  Reader(std::istream& is, std::string origin) : is_(is), origin_(std::move(origin)) {}
  template <typename T>
  T pod() {
    T v{};
    is_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is_) throw IoError(origin_ + ": truncated checkpoint");
    return v;
  }
  NamedTensor block() {
    NamedTensor out;
    const auto len = pod<std::uint32_t>();
    if (len > (1u << 16)) throw IoError(origin_ + ": corrupt block name length");
    out.name.resize(len);
    is_.read(out.name.data(), len);
    const auto rank = pod<std::uint32_t>();
    if (rank == 0 || rank > 8) throw IoError(origin_ + ": block '" + out.name + "' has invalid rank");
    compute::Shape shape(rank);
    std::size_t count = 1;
    for (auto& e : shape) {
      e = pod<std::uint32_t>();
      if (e == 0) throw IoError(origin_ + ": block '" + out.name + "' has a zero extent");
      count *= e;
    }
    if (count > (std::size_t{1} << 31)) throw IoError(origin_ + ": block '" + out.name + "' is implausibly large");
    std::vector<float> f(count);
    is_.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(count * sizeof(float)));
    if (!is_) throw IoError(origin_ + ": truncated block '" + out.name + "'");
    try {
      out.value = compute::Tensor(shape, std::vector<double>(f.begin(), f.end()));
    } catch (const Error& e) {
      throw IoError(origin_ + ": block '" + out.name + "': " + e.what());
    }
    return out;
  }

 private:
  std::istream& is_;
  std::string origin_;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const compute::ParameterSet& params,
                      const TrainerSnapshot& state) {
  std::ostringstream buf(std::ios::binary);
  Writer w(buf);
  buf.write(kMagic, 4);
  w.pod(kCheckpointVersion);
  const auto all = params.all();
  w.pod(static_cast<std::uint32_t>(all.size()));
  for (const auto* p : all) w.block(p->name, p->value);
  w.pod(state.iteration);
  w.pod(state.baseline);
  w.pod(static_cast<std::uint32_t>(state.momentum.size()));
  for (const auto& [name, t] : state.momentum) w.block(name, t);

  // Staged in a sibling file, then renamed.
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    const auto s = buf.str();
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!out) throw IoError("failed writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into place at " + path.string() + ": " + ec.message());
}

CheckpointData read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Reader r(in, path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw IoError(path.string() + ": not a VCK1 checkpoint");
  CheckpointData d;
  d.version = r.pod<std::uint32_t>();
  if (d.version != kCheckpointVersion)
    throw ConfigError(path.string() + ": checkpoint format version " + std::to_string(d.version) + ", expected " +
                      std::to_string(kCheckpointVersion));
  const auto n = r.pod<std::uint32_t>();
  for (std::uint32_t k = 0; k < n; ++k) d.parameters.push_back(r.block());
  d.state.iteration = r.pod<std::uint64_t>();
  d.state.baseline = r.pod<double>();
  const auto m = r.pod<std::uint32_t>();
  for (std::uint32_t k = 0; k < m; ++k) {
    auto b = r.block();
    d.state.momentum.emplace(b.name, std::move(b.value));
  }
  return d;
}

void apply_checkpoint(compute::ParameterSet& params, const CheckpointData& data) {
  std::set<std::string> seen;
  for (const auto& b : data.parameters) {
    auto* p = params.find(b.name);
    if (!p) throw ConfigError("checkpoint block '" + b.name + "' does not exist in the model");
    if (p->value.shape() != b.value.shape())
      throw DimensionError("parameter block '" + b.name + "': checkpoint shape " + compute::shape_string(b.value.shape()) +
                           ", model shape " + compute::shape_string(p->value.shape()));
    seen.insert(b.name);
  }
  for (const auto* p : params.all())
    if (!seen.count(p->name)) throw ConfigError("checkpoint lacks parameter block '" + p->name + "'");
  for (const auto& [name, t] : data.state.momentum) {
    const auto* p = params.find(name);
    if (!p) throw ConfigError("momentum block '" + name + "' does not exist in the model");
    if (p->value.shape() != t.shape())
      throw DimensionError("momentum block '" + name + "': checkpoint shape " + compute::shape_string(t.shape()) +
                           ", model shape " + compute::shape_string(p->value.shape()));
  }
  for (const auto& b : data.parameters) params.at(b.name).value = b.value;
}

void round_to_storage(compute::ParameterSet& params) {
  for (auto* p : params.all())
    for (auto& v : p->value.values()) v = static_cast<double>(static_cast<float>(v));
}

namespace {
const char* flag(bool b) { return b ? "true" : "false"; }

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(where + ": expected a boolean, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const auto x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a non-negative integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& where) {
  try {
    std::size_t pos = 0;
    const auto x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError(where + ": expected a number, got '" + v + "'");
  }
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}
}  // namespace

std::string model_config_text(const ModelConfig& cfg, const RunMetadata& meta) {
  std::ostringstream os;
  char dropout[32];
  std::snprintf(dropout, sizeof dropout, "%.17g", cfg.dropout);
  os << "format = vc-model-1\n"
     << "head = " << head_name(cfg.head) << '\n'
     << "generation = " << gen_mode_name(cfg.gen) << '\n'
     << "embed_dim = " << cfg.encoder.embed_dim << '\n'
     << "hidden = " << cfg.encoder.hidden << '\n'
     << "wo_alpha = " << flag(cfg.encoder.uniform_attention) << '\n'
     << "region_dim = " << cfg.region_dim << '\n'
     << "exclude_self = " << flag(cfg.exclude_self) << '\n'
     << "wo_reg = " << flag(cfg.wo_reg) << '\n'
     << "decoder_hidden = " << cfg.decoder_hidden << '\n'
     << "dropout = " << dropout << '\n'
     << "gen_min_count = " << cfg.gen_min_count << '\n'
     << "objective = " << meta.objective << '\n'
     << "dataset_hash = " << meta.dataset_hash << '\n'
     << "seed = " << meta.seed << '\n';
  return os.str();
}

std::pair<ModelConfig, RunMetadata> parse_model_config(const std::string& text, const std::string& origin) {
  ModelConfig cfg;
  RunMetadata meta;
  std::istringstream in(text);
  std::size_t lineno = 0;
  bool format_seen = false;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    if (key == "format") {
      if (val != "vc-model-1") throw ConfigError(where + ": unsupported model format '" + val + "'");
      format_seen = true;
    } else if (key == "head") cfg.head = parse_head(val);
    else if (key == "generation") cfg.gen = parse_gen_mode(val);
    else if (key == "embed_dim") cfg.encoder.embed_dim = parse_u64(val, where);
    else if (key == "hidden") cfg.encoder.hidden = parse_u64(val, where);
    else if (key == "wo_alpha") cfg.encoder.uniform_attention = parse_bool(val, where);
    else if (key == "region_dim") cfg.region_dim = parse_u64(val, where);
    else if (key == "exclude_self") cfg.exclude_self = parse_bool(val, where);
    else if (key == "wo_reg") cfg.wo_reg = parse_bool(val, where);
    else if (key == "decoder_hidden") cfg.decoder_hidden = parse_u64(val, where);
    else if (key == "dropout") cfg.dropout = parse_double(val, where);
    else if (key == "gen_min_count") cfg.gen_min_count = parse_u64(val, where);
    else if (key == "objective") {
      if (val != "supervised" && val != "unsupervised") throw ConfigError(where + ": unknown objective '" + val + "'");
      meta.objective = val;
    } else if (key == "dataset_hash") meta.dataset_hash = parse_u64(val, where);
    else if (key == "seed") meta.seed = parse_u64(val, where);
    else throw ConfigError(where + ": unknown key '" + key + "'");
  }
  if (!format_seen) throw ConfigError(origin + ": missing 'format' line");
  return {cfg, meta};
}

void save_model(const std::filesystem::path& path, const Model& model, const TrainerSnapshot& state,
                const RunMetadata& meta) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  write_checkpoint(path, model.parameters(), state);
  const auto cfg_path = path.string() + ".cfg";
  std::ofstream out(cfg_path);
  if (!out) throw IoError("cannot write " + cfg_path);
  out << model_config_text(model.config(), meta);
  if (!out) throw IoError("failed writing " + cfg_path);
  language::save_vocabularies(path.string() + ".vocab", model.comprehension_vocab(), model.generation_vocab());
}

LoadedModel load_model(const std::filesystem::path& path) {
  const auto cfg_path = path.string() + ".cfg";
  std::ifstream in(cfg_path);
  if (!in) throw IoError("cannot open " + cfg_path);
  std::stringstream text;
  text << in.rdbuf();
  auto [cfg, meta] = parse_model_config(text.str(), cfg_path);
  auto [comp, gen] = language::load_vocabularies(path.string() + ".vocab");
  const auto data = read_checkpoint(path);
  LoadedModel out;
  out.model = Model::create(cfg, std::move(comp), std::move(gen), 0);
  apply_checkpoint(out.model->parameters(), data);
  out.state = data.state;
  out.meta = meta;
  return out;
}

void check_compatible(const Model& model, const data::Dataset& ds) {
  const std::string block = "comprehension/phi/single/w";
  const auto& w = model.parameters().at(block);
  for (const auto& s : ds.scenes)
    for (const auto& r : s.regions) {
      const auto d = r.feature.concat().size();
      if (d != w.value.cols())
        throw DimensionError("parameter block '" + block + "' has shape " + compute::shape_string(w.value.shape()) +
                             " but scene " + std::to_string(s.id) + " region " + std::to_string(r.id) +
                             " has features of extent " + std::to_string(d));
      return;
    }
}

}  // namespace vc::training
