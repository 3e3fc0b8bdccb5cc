#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vc/data/dataset.hpp"

namespace vc::data {

enum class Relation { kLeftOf, kRightOf, kAbove, kBelow, kLargest, kSmallest, kBetween };

const char* relation_name(Relation r);
Relation parse_relation(const std::string& name);

// Expression template families.
//   attribute:   "the <color> <category>"  or  "the <size> <category>"
//   relation:    "the <category> <left of|right of|above|below> the <color> <category>"
//   superlative: "the <largest|smallest> <category>"
//   between:     "the <category> between the <color> <category> and the <color> <category>"
enum class Template { kAttribute, kRelation, kSuperlative, kBetween };

// A region is between two landmarks when its center lies within
// kBetweenInner * r of their midpoint, r being half the landmark distance.
// Other regions of its category must stay beyond kBetweenOuter * r.
// A superlative target outsizes every same-category region by this factor.
inline constexpr double kSuperlativeRatio = 1.5;
inline constexpr double kBetweenInner = 0.8;
inline constexpr double kBetweenOuter = 1.2;

const char* template_name(Template t);
Template parse_template(const std::string& name);

struct SynthConfig {
  std::size_t train_scenes = 200;
  std::size_t val_scenes = 0;
  std::size_t test_scenes = 50;
  std::size_t expressions_per_scene = 1;
  std::size_t min_objects = 4;
  std::size_t max_objects = 8;
  // Other objects sharing the referent's category (clipped to the scene size).
  std::size_t min_distractors = 2;
  std::size_t max_distractors = 4;
  std::vector<std::string> categories{"ball", "cube", "cone", "ring"};
  std::vector<std::string> colors{"red", "green", "blue", "yellow"};
  std::vector<std::string> sizes{"small", "large"};
  std::vector<Relation> relations{Relation::kLeftOf, Relation::kRightOf, Relation::kAbove,
                                  Relation::kBelow,  Relation::kLargest, Relation::kSmallest,
                                  Relation::kBetween};
  // kBetween is opt-in.
  std::vector<Template> templates{Template::kAttribute, Template::kRelation, Template::kSuperlative};
  // Fraction of scenes laid out with a target-category object near the
  // midpoint of two other objects, so "between" expressions are available.
  double between_layout = 0.0;
  // Relative preference when ordering templates for a target (empty: uniform).
  std::vector<double> template_weights;
  double image_width = 640;
  double image_height = 480;
  std::size_t visual_dim = 16;
  double noise_std = 0.05;
  bool use_visdif = true;
  std::uint64_t seed = 1;

  // Throws ConfigError on an unusable configuration.
  void validate() const;
};

struct SynthResult {
  Dataset dataset;
  // Scenes regenerated because no template produced a unique referent.
  std::size_t skipped = 0;
};

// Deterministic for a given config. Every expression denotes exactly one
// region; distractors of the referent's category are always present when
// the scene size allows.
SynthResult synth_world(const SynthConfig& config);

}  // namespace vc::data
