#include "vc/data/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "vc/errors.hpp"

namespace vc::data {

std::vector<double> RegionFeature::concat() const {
  std::vector<double> x(visual);
  if (visdif) x.insert(x.end(), visdif->begin(), visdif->end());
  x.insert(x.end(), spatial.begin(), spatial.end());
  return x;
}

std::optional<std::size_t> Scene::region_index(std::int64_t region_id) const {
  for (std::size_t i = 0; i < regions.size(); ++i)
    if (regions[i].id == region_id) return i;
  return std::nullopt;
}

const Scene& Dataset::scene(std::int64_t id) const {
  auto it = scene_index_.find(id);
  if (it == scene_index_.end()) throw ValidationError("unknown scene id " + std::to_string(id));
  return scenes[it->second];
}

const ExpressionRecord& Dataset::expression(std::int64_t id) const {
  auto it = expression_index_.find(id);
  if (it == expression_index_.end()) throw ValidationError("unknown expression id " + std::to_string(id));
  return expressions[it->second];
}

std::vector<const ExpressionRecord*> Dataset::split(const std::string& name) const {
  std::vector<const ExpressionRecord*> out;
  if (name == "all") {
    for (const auto& e : expressions) out.push_back(&e);
    return out;
  }
  auto it = splits.find(name);
  if (it == splits.end()) throw ConfigError("dataset has no split named '" + name + "'");
  for (auto id : it->second) out.push_back(&expression(id));
  return out;
}

bool Dataset::has_referents() const {
  return std::all_of(expressions.begin(), expressions.end(), [](const auto& e) { return e.referent.has_value(); });
}

void Dataset::reindex() {
  scene_index_.clear();
  expression_index_.clear();
  for (std::size_t i = 0; i < scenes.size(); ++i) scene_index_[scenes[i].id] = i;
  for (std::size_t i = 0; i < expressions.size(); ++i) expression_index_[expressions[i].id] = i;
}

void finalize_features(Scene& scene, bool use_visdif) {
  const bool categorized =
      std::all_of(scene.regions.begin(), scene.regions.end(), [](const Region& r) { return r.category.has_value(); });
  for (auto& r : scene.regions) {
    r.feature.spatial = spatial_feature(r.box, scene.width, scene.height);
    r.feature.category = r.category;
  }
  for (std::size_t i = 0; i < scene.regions.size(); ++i) {
    auto& r = scene.regions[i];
    if (!use_visdif) {
      r.feature.visdif.reset();
      continue;
    }
    std::vector<std::span<const double>> others;
    for (std::size_t j = 0; j < scene.regions.size(); ++j) {
      if (j == i) continue;
      if (categorized && scene.regions[j].category != r.category) continue;
      others.emplace_back(scene.regions[j].feature.visual);
    }
    r.feature.visdif = visdif_feature(r.feature.visual, others);
  }
  scene.global_feature.clear();
  for (const auto& r : scene.regions) {
    const auto x = r.feature.concat();
    if (scene.global_feature.empty()) scene.global_feature.assign(x.size(), 0.0);
    for (std::size_t k = 0; k < x.size(); ++k) scene.global_feature[k] += x[k];
  }
  for (auto& v : scene.global_feature) v /= static_cast<double>(scene.regions.size());
}

std::vector<double> attribute_code(const Alphabets& a, std::size_t visual_dim, const std::optional<std::string>& category,
                                   const std::map<std::string, std::string>& attributes) {
  const std::size_t need = a.category.size() + a.color.size() + a.size.size();
  if (need > visual_dim)
    throw ConfigError("visual_dim " + std::to_string(visual_dim) + " too small for " + std::to_string(need) +
                      " attribute codes");
  std::vector<double> v(visual_dim, 0.0);
  auto place = [&v](const std::vector<std::string>& alphabet, std::size_t offset, const std::string& value) {
    auto it = std::find(alphabet.begin(), alphabet.end(), value);
    if (it != alphabet.end()) v[offset + static_cast<std::size_t>(it - alphabet.begin())] = 1.0;
  };
  if (category) place(a.category, 0, *category);
  if (auto it = attributes.find("color"); it != attributes.end()) place(a.color, a.category.size(), it->second);
  if (auto it = attributes.find("size"); it != attributes.end())
    place(a.size, a.category.size() + a.color.size(), it->second);
  return v;
}

std::vector<std::string> tokenize(const std::string& raw) {
  std::string clean;
  clean.reserve(raw.size());
  for (unsigned char c : raw) clean.push_back(std::isalnum(c) || c == '\'' ? static_cast<char>(std::tolower(c)) : ' ');
  std::istringstream is(clean);
  std::vector<std::string> out;
  for (std::string w; is >> w && out.size() < kMaxTokens;) out.push_back(w);
  return out;
}

}  // namespace vc::data
