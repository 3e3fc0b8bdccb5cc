#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vc/data/features.hpp"

namespace vc::data {

inline constexpr std::size_t kMaxTokens = 20;

struct RegionFeature {
  std::vector<double> visual;
  std::optional<std::vector<double>> visdif;
  std::array<double, 5> spatial{};
  std::optional<std::string> category;

  // x_i = [visual, visdif?, spatial].
  std::vector<double> concat() const;

  friend bool operator==(const RegionFeature&, const RegionFeature&) = default;
};

struct Region {
  std::int64_t id = 0;
  Box box;
  std::optional<std::string> category;
  // Free-form attributes (the synthetic world stores color and size here).
  std::map<std::string, std::string> attributes;
  RegionFeature feature;

  friend bool operator==(const Region&, const Region&) = default;
};

struct Scene {
  std::int64_t id = 0;
  double width = 0, height = 0;
  std::vector<Region> regions;
  // Global image feature I; defaults to the mean of region features.
  std::vector<double> global_feature;

  std::optional<std::size_t> region_index(std::int64_t region_id) const;
  friend bool operator==(const Scene&, const Scene&) = default;
};

struct ExpressionRecord {
  std::int64_t id = 0;
  std::int64_t scene_id = 0;
  std::vector<std::string> tokens;  // at most kMaxTokens
  std::string raw;
  std::optional<std::size_t> referent;  // index into Scene::regions

  friend bool operator==(const ExpressionRecord&, const ExpressionRecord&) = default;
};

// Ordered alphabets used to encode attribute codes into visual features.
struct Alphabets {
  std::vector<std::string> category;
  std::vector<std::string> color;
  std::vector<std::string> size;

  friend bool operator==(const Alphabets&, const Alphabets&) = default;
};

struct Dataset {
  std::vector<Scene> scenes;
  std::vector<ExpressionRecord> expressions;
  std::map<std::string, std::vector<std::int64_t>> splits;
  Alphabets alphabets;
  std::size_t visual_dim = 0;
  bool use_visdif = true;

  const Scene& scene(std::int64_t id) const;
  const Scene& scene_of(const ExpressionRecord& e) const { return scene(e.scene_id); }
  const ExpressionRecord& expression(std::int64_t id) const;
  // Expressions of a split in listed order; "all" yields every expression.
  std::vector<const ExpressionRecord*> split(const std::string& name) const;
  bool has_referents() const;

  // Rebuilds lookup tables after scenes/expressions change.
  void reindex();

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.scenes == b.scenes && a.expressions == b.expressions && a.splits == b.splits &&
           a.alphabets == b.alphabets && a.visual_dim == b.visual_dim && a.use_visdif == b.use_visdif;
  }

 private:
  std::map<std::int64_t, std::size_t> scene_index_;
  std::map<std::int64_t, std::size_t> expression_index_;
};

// Recomputes spatial, visdif (when enabled) and the global feature of every
// region from boxes and visual vectors. The visdif comparison set is the
// other regions of the same category when categories are present, otherwise
// all other regions.
void finalize_features(Scene& scene, bool use_visdif);

// Visual attribute code: one-hot category, color, size blocks, zero padded
// to `visual_dim`. Unknown or missing attributes leave their block zero.
std::vector<double> attribute_code(const Alphabets& alphabets, std::size_t visual_dim,
                                   const std::optional<std::string>& category,
                                   const std::map<std::string, std::string>& attributes);

// Lowercases, strips punctuation, splits on whitespace, truncates to kMaxTokens.
std::vector<std::string> tokenize(const std::string& raw);

}  // namespace vc::data
