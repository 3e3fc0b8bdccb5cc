#include "vc/data/annotations.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "vc/errors.hpp"

namespace vc::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little, "feature files are read on little-endian hosts only");

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  if (!is) throw IoError("truncated feature matrix header");
  return v;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string record(const char* kind, std::int64_t id) { return std::string(kind) + " " + std::to_string(id); }

std::vector<std::string> sorted_values(const json& images, const char* field, bool attribute) {
  std::set<std::string> s;
  for (const auto& img : images) {
    if (!img.contains("regions") || !img["regions"].is_array()) continue;
    for (const auto& r : img["regions"]) {
      if (attribute) {
        if (r.contains("attributes") && r["attributes"].contains(field) && r["attributes"][field].is_string())
          s.insert(r["attributes"][field].get<std::string>());
      } else if (r.contains(field) && r[field].is_string()) {
        s.insert(r[field].get<std::string>());
      }
    }
  }
  return {s.begin(), s.end()};
}

}  // namespace

void write_feature_matrix(const fs::path& path, const FeatureMatrix& m) {
  if (m.values.size() != static_cast<std::size_t>(m.count) * m.dim)
    throw DimensionError("feature matrix holds " + std::to_string(m.values.size()) + " values for " +
                         std::to_string(m.count) + "x" + std::to_string(m.dim));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write("VCF1", 4);
  put_u32(out, m.count);
  put_u32(out, m.dim);
  out.write(reinterpret_cast<const char*>(m.values.data()), static_cast<std::streamsize>(m.values.size() * sizeof(float)));
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureMatrix read_feature_matrix(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "VCF1", 4) != 0) throw ValidationError(path.string() + ": bad feature matrix magic");
  FeatureMatrix m;
  m.count = get_u32(in);
  m.dim = get_u32(in);
  m.values.resize(static_cast<std::size_t>(m.count) * m.dim);
  in.read(reinterpret_cast<char*>(m.values.data()), static_cast<std::streamsize>(m.values.size() * sizeof(float)));
  if (!in) throw ValidationError(path.string() + ": truncated feature matrix");
  return m;
}

void write_feature_index(const fs::path& path, const FeatureIndex& index) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& [img, reg] : index) out << img << ' ' << reg << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

FeatureIndex read_feature_index(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  FeatureIndex index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::int64_t img = 0, reg = 0;
    if (!(ls >> img >> reg))
      throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": expected 'image_id region_id'");
    index.emplace_back(img, reg);
  }
  return index;
}

Dataset load_annotations(const fs::path& path, const LoadOptions& opts) {
  return parse_annotations(read_text(path), path.parent_path(), opts);
}

Dataset parse_annotations(const std::string& text, const fs::path& base_dir, const LoadOptions& opts) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("annotation JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("images") || !doc["images"].is_array())
    throw ValidationError("annotation JSON must be an object with an 'images' array");

  std::vector<std::string> issues;
  Dataset ds;
  const json& images = doc["images"];

  if (doc.contains("alphabets")) {
    const auto& a = doc["alphabets"];
    ds.alphabets.category = a.value("category", std::vector<std::string>{});
    ds.alphabets.color = a.value("color", std::vector<std::string>{});
    ds.alphabets.size = a.value("size", std::vector<std::string>{});
  } else {
    ds.alphabets.category = sorted_values(images, "category", false);
    ds.alphabets.color = sorted_values(images, "color", true);
    ds.alphabets.size = sorted_values(images, "size", true);
  }
  ds.use_visdif = doc.value("use_visdif", true);

  std::optional<FeatureMatrix> matrix;
  std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> rows;
  if (doc.contains("features")) {
    const auto& f = doc["features"];
    matrix = read_feature_matrix(base_dir / f.at("matrix").get<std::string>());
    const auto index = read_feature_index(base_dir / f.at("index").get<std::string>());
    if (index.size() != matrix->count)
      issues.push_back("feature index lists " + std::to_string(index.size()) + " rows, matrix holds " +
                       std::to_string(matrix->count));
    for (std::size_t i = 0; i < index.size(); ++i)
      if (!rows.emplace(index[i], i).second)
        issues.push_back("feature index repeats region " + std::to_string(index[i].second) + " of image " +
                         std::to_string(index[i].first));
  }
  const std::size_t code_dim = ds.alphabets.category.size() + ds.alphabets.color.size() + ds.alphabets.size.size();
  ds.visual_dim = doc.value("visual_dim", matrix ? static_cast<std::size_t>(matrix->dim) : code_dim);
  if (matrix && matrix->dim != ds.visual_dim)
    issues.push_back("feature matrix dim " + std::to_string(matrix->dim) + " != visual_dim " +
                     std::to_string(ds.visual_dim));

  std::set<std::int64_t> image_ids;
  for (const auto& img : images) {
    Scene s;
    try {
      s.id = img.at("id").get<std::int64_t>();
      s.width = img.at("width").get<double>();
      s.height = img.at("height").get<double>();
    } catch (const json::exception& e) {
      issues.push_back(std::string("image record malformed: ") + e.what());
      continue;
    }
    const std::string name = record("image", s.id);
    if (!image_ids.insert(s.id).second) issues.push_back(name + ": duplicate image id");
    if (!(s.width > 0) || !(s.height > 0)) issues.push_back(name + ": non-positive image extents");
    if (!img.contains("regions") || !img["regions"].is_array() || img["regions"].empty()) {
      issues.push_back(name + ": empty region list");
      continue;
    }
    std::set<std::int64_t> region_ids;
    bool scene_ok = true;
    for (const auto& r : img["regions"]) {
      Region reg;
      try {
        reg.id = r.at("id").get<std::int64_t>();
        const auto bb = r.at("bbox").get<std::vector<double>>();
        if (bb.size() != 4) throw ValidationError("bbox needs 4 numbers");
        reg.box = {bb[0], bb[1], bb[2], bb[3]};
      } catch (const std::exception& e) {
        issues.push_back(name + ": region malformed: " + e.what());
        scene_ok = false;
        continue;
      }
      const std::string rname = name + " region " + std::to_string(reg.id);
      if (!region_ids.insert(reg.id).second) {
        issues.push_back(rname + ": duplicate region id");
        scene_ok = false;
      }
      try {
        validate_box(reg.box, s.width, s.height);
      } catch (const ValidationError& e) {
        issues.push_back(rname + ": " + e.what());
        scene_ok = false;
      }
      if (r.contains("category") && r["category"].is_string()) reg.category = r["category"].get<std::string>();
      if (r.contains("attributes") && r["attributes"].is_object())
        for (const auto& [k, v] : r["attributes"].items())
          if (v.is_string()) reg.attributes[k] = v.get<std::string>();
      if (matrix) {
        auto it = rows.find({s.id, reg.id});
        if (it == rows.end()) {
          issues.push_back(rname + ": no row in feature matrix");
          scene_ok = false;
        } else if (matrix->dim == ds.visual_dim) {
          const float* row = matrix->values.data() + it->second * matrix->dim;
          reg.feature.visual.assign(row, row + matrix->dim);
        }
      } else {
        try {
          reg.feature.visual = attribute_code(ds.alphabets, ds.visual_dim, reg.category, reg.attributes);
        } catch (const Error& e) {
          issues.push_back(rname + ": " + e.what());
          scene_ok = false;
        }
      }
      s.regions.push_back(std::move(reg));
    }
    if (scene_ok && issues.empty()) finalize_features(s, ds.use_visdif);
    ds.scenes.push_back(std::move(s));
  }

  std::map<std::int64_t, const Scene*> scene_by_id;
  for (const auto& s : ds.scenes) scene_by_id[s.id] = &s;

  std::set<std::int64_t> expr_ids;
  if (doc.contains("expressions") && doc["expressions"].is_array()) {
    for (const auto& e : doc["expressions"]) {
      ExpressionRecord rec;
      try {
        rec.id = e.at("id").get<std::int64_t>();
        rec.scene_id = e.at("image_id").get<std::int64_t>();
      } catch (const json::exception& ex) {
        issues.push_back(std::string("expression record malformed: ") + ex.what());
        continue;
      }
      const std::string name = record("expression", rec.id);
      if (!expr_ids.insert(rec.id).second) issues.push_back(name + ": duplicate expression id");
      rec.raw = e.value("raw", std::string());
      if (e.contains("tokens") && e["tokens"].is_array()) {
        for (const auto& t : e["tokens"])
          if (rec.tokens.size() < kMaxTokens) rec.tokens.push_back(t.get<std::string>());
      } else {
        rec.tokens = tokenize(rec.raw);
      }
      if (rec.raw.empty()) {
        for (const auto& t : rec.tokens) rec.raw += (rec.raw.empty() ? "" : " ") + t;
      }
      if (rec.tokens.empty()) issues.push_back(name + ": no tokens");
      auto sit = scene_by_id.find(rec.scene_id);
      if (sit == scene_by_id.end()) {
        issues.push_back(name + ": unknown image_id " + std::to_string(rec.scene_id));
      } else if (e.contains("referent_region_id") && !e["referent_region_id"].is_null()) {
        const auto rid = e["referent_region_id"].get<std::int64_t>();
        rec.referent = sit->second->region_index(rid);
        if (!rec.referent)
          issues.push_back(name + ": referent region " + std::to_string(rid) + " not in image " +
                           std::to_string(rec.scene_id) + " (" + std::to_string(sit->second->regions.size()) +
                           " regions)");
      } else if (opts.require_referents) {
        issues.push_back(name + ": missing referent in supervised mode");
      }
      ds.expressions.push_back(std::move(rec));
    }
  }

  if (doc.contains("splits") && doc["splits"].is_object()) {
    for (const auto& [split, ids] : doc["splits"].items()) {
      auto& list = ds.splits[split];
      for (const auto& id : ids) {
        const auto v = id.get<std::int64_t>();
        if (!expr_ids.count(v))
          issues.push_back("split '" + split + "' lists unknown expression " + std::to_string(v));
        list.push_back(v);
      }
    }
  }

  if (!issues.empty()) throw ValidationError(std::move(issues));
  ds.reindex();
  return ds;
}

namespace {

json to_json(const Dataset& ds) {
  json doc;
  doc["format"] = "vc-annotations-1";
  doc["visual_dim"] = ds.visual_dim;
  doc["use_visdif"] = ds.use_visdif;
  doc["alphabets"] = {{"category", ds.alphabets.category}, {"color", ds.alphabets.color}, {"size", ds.alphabets.size}};
  json images = json::array();
  for (const auto& s : ds.scenes) {
    json regions = json::array();
    for (const auto& r : s.regions) {
      json jr{{"id", r.id}, {"bbox", {r.box.x_tl, r.box.y_tl, r.box.x_br, r.box.y_br}}};
      if (r.category) jr["category"] = *r.category;
      if (!r.attributes.empty()) jr["attributes"] = r.attributes;
      regions.push_back(std::move(jr));
    }
    images.push_back({{"id", s.id}, {"width", s.width}, {"height", s.height}, {"regions", std::move(regions)}});
  }
  doc["images"] = std::move(images);
  json exprs = json::array();
  for (const auto& e : ds.expressions) {
    json je{{"id", e.id}, {"image_id", e.scene_id}, {"tokens", e.tokens}, {"raw", e.raw}};
    if (e.referent) je["referent_region_id"] = ds.scene(e.scene_id).regions[*e.referent].id;
    exprs.push_back(std::move(je));
  }
  doc["expressions"] = std::move(exprs);
  json splits = json::object();
  for (const auto& [k, v] : ds.splits) splits[k] = v;
  doc["splits"] = std::move(splits);
  return doc;
}

FeatureMatrix visual_matrix(const Dataset& ds, FeatureIndex* index) {
  FeatureMatrix m;
  m.dim = static_cast<std::uint32_t>(ds.visual_dim);
  for (const auto& s : ds.scenes)
    for (const auto& r : s.regions) {
      if (r.feature.visual.size() != ds.visual_dim)
        throw DimensionError("region " + std::to_string(r.id) + " of image " + std::to_string(s.id) +
                             " has visual dim " + std::to_string(r.feature.visual.size()));
      for (double v : r.feature.visual) m.values.push_back(static_cast<float>(v));
      if (index) index->emplace_back(s.id, r.id);
      ++m.count;
    }
  return m;
}

}  // namespace

std::string annotations_json(const Dataset& ds) { return to_json(ds).dump(1); }

void save_annotations(const Dataset& ds, const fs::path& json_path) {
  if (!json_path.parent_path().empty()) {
    std::error_code ec;
    fs::create_directories(json_path.parent_path(), ec);
  }
  FeatureIndex index;
  const FeatureMatrix m = visual_matrix(ds, &index);
  fs::path matrix_path = json_path;
  matrix_path.replace_extension(".vcf");
  fs::path index_path = json_path;
  index_path.replace_extension(".idx");
  write_feature_matrix(matrix_path, m);
  write_feature_index(index_path, index);

  json doc = to_json(ds);
  doc["features"] = {{"matrix", matrix_path.filename().string()}, {"index", index_path.filename().string()}};
  std::ofstream out(json_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + json_path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("failed writing " + json_path.string());
}

std::uint64_t dataset_hash(const Dataset& ds) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  const std::string text = annotations_json(ds);
  mix(text.data(), text.size());
  const FeatureMatrix m = visual_matrix(ds, nullptr);
  mix(m.values.data(), m.values.size() * sizeof(float));
  return h;
}

}  // namespace vc::data
