#include "run_config.hpp"

#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "vc/errors.hpp"

namespace vc::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t to_u64(const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) throw ConfigError("expected a non-negative integer, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& v) { return static_cast<std::size_t>(to_u64(v)); }

double to_double(const std::string& v) {
  char* end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE) throw ConfigError("expected a number, got '" + v + "'");
  return d;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

training::Objective to_objective(const std::string& v) {
  if (v == "supervised") return training::Objective::kSupervised;
  if (v == "unsupervised") return training::Objective::kUnsupervised;
  throw ConfigError("objective must be supervised or unsupervised, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;
using Table = std::map<std::string, Setter>;

const std::map<std::string, Table>& tables() {
  static const std::map<std::string, Table> t = {
      {"run",
       {
           {"seed", [](RunConfig& c, const std::string& v) { c.seed = to_u64(v); }},
           {"eval_split", [](RunConfig& c, const std::string& v) { c.eval_split = v; }},
           {"threshold", [](RunConfig& c, const std::string& v) { c.threshold = to_double(v); }},
           {"embeddings", [](RunConfig& c, const std::string& v) { c.embeddings = v; }},
       }},
      {"synth",
       {
           {"train_scenes", [](RunConfig& c, const std::string& v) { c.synth.train_scenes = to_size(v); }},
           {"val_scenes", [](RunConfig& c, const std::string& v) { c.synth.val_scenes = to_size(v); }},
           {"test_scenes", [](RunConfig& c, const std::string& v) { c.synth.test_scenes = to_size(v); }},
           {"expressions_per_scene",
            [](RunConfig& c, const std::string& v) { c.synth.expressions_per_scene = to_size(v); }},
           {"min_objects", [](RunConfig& c, const std::string& v) { c.synth.min_objects = to_size(v); }},
           {"max_objects", [](RunConfig& c, const std::string& v) { c.synth.max_objects = to_size(v); }},
           {"min_distractors", [](RunConfig& c, const std::string& v) { c.synth.min_distractors = to_size(v); }},
           {"max_distractors", [](RunConfig& c, const std::string& v) { c.synth.max_distractors = to_size(v); }},
           {"categories", [](RunConfig& c, const std::string& v) { c.synth.categories = split_list(v); }},
           {"colors", [](RunConfig& c, const std::string& v) { c.synth.colors = split_list(v); }},
           {"sizes", [](RunConfig& c, const std::string& v) { c.synth.sizes = split_list(v); }},
           {"relations",
            [](RunConfig& c, const std::string& v) {
              c.synth.relations.clear();
              for (const auto& r : split_list(v)) c.synth.relations.push_back(data::parse_relation(r));
            }},
           {"templates",
            [](RunConfig& c, const std::string& v) {
              c.synth.templates.clear();
              for (const auto& r : split_list(v)) c.synth.templates.push_back(data::parse_template(r));
            }},
           {"template_weights",
            [](RunConfig& c, const std::string& v) {
              c.synth.template_weights.clear();
              for (const auto& w : split_list(v)) c.synth.template_weights.push_back(to_double(w));
            }},
           {"between_layout", [](RunConfig& c, const std::string& v) { c.synth.between_layout = to_double(v); }},
           {"image_width", [](RunConfig& c, const std::string& v) { c.synth.image_width = to_double(v); }},
           {"image_height", [](RunConfig& c, const std::string& v) { c.synth.image_height = to_double(v); }},
           {"visual_dim", [](RunConfig& c, const std::string& v) { c.synth.visual_dim = to_size(v); }},
           {"noise_std", [](RunConfig& c, const std::string& v) { c.synth.noise_std = to_double(v); }},
           {"use_visdif", [](RunConfig& c, const std::string& v) { c.synth.use_visdif = to_bool(v); }},
       }},
      {"model",
       {
           {"embed_dim", [](RunConfig& c, const std::string& v) { c.model.encoder.embed_dim = to_size(v); }},
           {"hidden", [](RunConfig& c, const std::string& v) { c.model.encoder.hidden = to_size(v); }},
           {"wo_alpha", [](RunConfig& c, const std::string& v) { c.model.encoder.uniform_attention = to_bool(v); }},
           {"wo_reg", [](RunConfig& c, const std::string& v) { c.model.wo_reg = to_bool(v); }},
           {"exclude_self", [](RunConfig& c, const std::string& v) { c.model.exclude_self = to_bool(v); }},
           {"head", [](RunConfig& c, const std::string& v) { c.model.head = parse_head(v); }},
           {"generation", [](RunConfig& c, const std::string& v) { c.model.gen = parse_gen_mode(v); }},
           {"decoder_hidden", [](RunConfig& c, const std::string& v) { c.model.decoder_hidden = to_size(v); }},
           {"dropout", [](RunConfig& c, const std::string& v) { c.model.dropout = to_double(v); }},
           {"gen_min_count", [](RunConfig& c, const std::string& v) { c.model.gen_min_count = to_size(v); }},
       }},
      {"train",
       {
           {"iterations", [](RunConfig& c, const std::string& v) { c.train.iterations = to_size(v); }},
           {"lr", [](RunConfig& c, const std::string& v) { c.train.schedule.lr = to_double(v); }},
           {"lr_factor", [](RunConfig& c, const std::string& v) { c.train.schedule.factor = to_double(v); }},
           {"lr_decay_every", [](RunConfig& c, const std::string& v) { c.train.schedule.decay_every = to_size(v); }},
           {"momentum", [](RunConfig& c, const std::string& v) { c.train.momentum = to_double(v); }},
           {"weight_decay", [](RunConfig& c, const std::string& v) { c.train.weight_decay = to_double(v); }},
           {"entropy_weight", [](RunConfig& c, const std::string& v) { c.train.entropy_weight = to_double(v); }},
           {"clip_norm", [](RunConfig& c, const std::string& v) { c.train.clip_norm = to_double(v); }},
           {"objective", [](RunConfig& c, const std::string& v) { c.train.objective = to_objective(v); }},
           {"split", [](RunConfig& c, const std::string& v) { c.train.split = v; }},
           {"log_every", [](RunConfig& c, const std::string& v) { c.train.log_every = to_size(v); }},
           {"checkpoint_every", [](RunConfig& c, const std::string& v) { c.train.checkpoint_every = to_size(v); }},
           {"accuracy_window", [](RunConfig& c, const std::string& v) { c.train.accuracy_window = to_size(v); }},
       }},
  };
  return t;
}

}  // namespace

void RunConfig::validate() const {
  synth.validate();
  auto m = model;
  if (m.region_dim == 0) m.region_dim = 1;  // filled from the data later
  m.validate();
  if (threshold < 0.0 || threshold >= 1.0) throw ConfigError("threshold must lie in [0, 1)");
  if (train.iterations == 0) throw ConfigError("train.iterations must be positive");
  if (!(train.schedule.lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (train.schedule.decay_every == 0) throw ConfigError("train.lr_decay_every must be positive");
  if (train.log_every == 0) throw ConfigError("train.log_every must be positive");
  if (model.dropout < 0.0 || model.dropout >= 1.0) throw ConfigError("model.dropout must lie in [0, 1)");
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::string section = "run";
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto where = origin + ":" + std::to_string(lineno) + ": ";
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!tables().count(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto& table = tables().at(section);
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    try {
      it->second(cfg, value);
    } catch (const Error& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  if (const char* env = std::getenv("VC_SEED"); env && *env) {
    try {
      cfg.seed = to_u64(env);
    } catch (const Error& e) {
      throw ConfigError(std::string("VC_SEED: ") + e.what());
    }
  }
  cfg.synth.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), path.string());
}

std::string default_config_text() {
  return R"(# Run configuration. Keys before any section belong to [run].
seed = 1                 # VC_SEED overrides
eval_split = test
threshold = 0.5          # IoU must exceed this
# embeddings = glove.txt # optional "word v1 ... vD" file

[synth]
train_scenes = 200
val_scenes = 0
test_scenes = 50
expressions_per_scene = 1
min_objects = 4
max_objects = 8
min_distractors = 2
max_distractors = 4
categories = ball, cube, cone, ring
colors = red, green, blue, yellow
sizes = small, large
relations = left-of, right-of, above, below, largest, smallest, between
templates = attribute, relation, superlative   # between is opt-in
# template_weights = 1, 1, 1
between_layout = 0
image_width = 640
image_height = 480
visual_dim = 16
noise_std = 0.05
use_visdif = true

[model]
embed_dim = 64
hidden = 64              # per direction
wo_alpha = false
wo_reg = false
exclude_self = false
head = vc                # vc, mil-maxpool, mil-noisyor
generation = plain       # plain, with_generation, with_generation_pg
decoder_hidden = 128
dropout = 0.3
gen_min_count = 5

[train]
iterations = 4000
lr = 0.01
lr_factor = 0.1
lr_decay_every = 3000
momentum = 0.95
weight_decay = 0.0005
entropy_weight = 0.005
clip_norm = 10
objective = supervised   # or unsupervised
split = train
log_every = 100
checkpoint_every = 0
accuracy_window = 100
)";
}

}  // namespace vc::cli
