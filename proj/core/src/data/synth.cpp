#include "vc/data/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <set>

#include "vc/errors.hpp"
#include "vc/random.hpp"

namespace vc::data {

const char* relation_name(Relation r) {
  switch (r) {
    case Relation::kLeftOf: return "left-of";
    case Relation::kRightOf: return "right-of";
    case Relation::kAbove: return "above";
    case Relation::kBelow: return "below";
    case Relation::kLargest: return "largest";
    case Relation::kSmallest: return "smallest";
    case Relation::kBetween: return "between";
  }
  return "?";
}

Relation parse_relation(const std::string& name) {
  for (auto r : {Relation::kLeftOf, Relation::kRightOf, Relation::kAbove, Relation::kBelow, Relation::kLargest,
                 Relation::kSmallest, Relation::kBetween})
    if (name == relation_name(r)) return r;
  throw ConfigError("unknown relation '" + name + "'");
}

const char* template_name(Template t) {
  switch (t) {
    case Template::kAttribute: return "attribute";
    case Template::kRelation: return "relation";
    case Template::kSuperlative: return "superlative";
    case Template::kBetween: return "between";
  }
  return "?";
}

Template parse_template(const std::string& name) {
  for (auto t : {Template::kAttribute, Template::kRelation, Template::kSuperlative, Template::kBetween})
    if (name == template_name(t)) return t;
  throw ConfigError("unknown template '" + name + "'");
}

void SynthConfig::validate() const {
  if (categories.empty() || colors.empty() || sizes.empty()) throw ConfigError("synth: alphabets must be non-empty");
  if (min_objects < 1 || min_objects > max_objects) throw ConfigError("synth: need 1 <= min_objects <= max_objects");
  if (min_distractors > max_distractors) throw ConfigError("synth: min_distractors > max_distractors");
  if (templates.empty()) throw ConfigError("synth: no expression templates enabled");
  if (categories.size() + colors.size() + sizes.size() > visual_dim)
    throw ConfigError("synth: visual_dim too small for attribute codes");
  if (!(image_width > 0) || !(image_height > 0)) throw ConfigError("synth: image extents must be positive");
  if (noise_std < 0) throw ConfigError("synth: noise_std must be non-negative");
  if (expressions_per_scene < 1) throw ConfigError("synth: expressions_per_scene must be >= 1");
  if (!template_weights.empty()) {
    if (template_weights.size() != templates.size())
      throw ConfigError("synth: template_weights must list one weight per template");
    for (double w : template_weights)
      if (!(w > 0.0)) throw ConfigError("synth: template weights must be positive");
  }
}

namespace {

struct Object {
  std::size_t category = 0, color = 0, size = 0;
  Box box;
};

bool is_spatial(Relation r) {
  return r == Relation::kLeftOf || r == Relation::kRightOf || r == Relation::kAbove || r == Relation::kBelow;
}

std::vector<std::string> relation_words(Relation r) {
  switch (r) {
    case Relation::kLeftOf: return {"left", "of"};
    case Relation::kRightOf: return {"right", "of"};
    case Relation::kAbove: return {"above"};
    case Relation::kBelow: return {"below"};
    case Relation::kLargest: return {"largest"};
    case Relation::kSmallest: return {"smallest"};
    case Relation::kBetween: return {"between"};
  }
  return {};
}

class SceneBuilder {
 public:
  SceneBuilder(const SynthConfig& c, Rng& rng) : c_(c), rng_(rng) {}

  std::optional<std::vector<Object>> objects() {
    const auto n = static_cast<std::size_t>(rng_.integer(static_cast<std::int64_t>(c_.min_objects),
                                                         static_cast<std::int64_t>(c_.max_objects)));
    const std::size_t dmin = std::min(c_.min_distractors, n - 1);
    const std::size_t dmax = std::min(c_.max_distractors, n - 1);
    const auto same = 1 + static_cast<std::size_t>(rng_.integer(static_cast<std::int64_t>(dmin),
                                                                 static_cast<std::int64_t>(dmax)));
    const auto target_cat = static_cast<std::size_t>(rng_.integer(0, static_cast<std::int64_t>(c_.categories.size()) - 1));
    std::vector<Object> objs(n);
    for (std::size_t k = 0; k < n; ++k) {
      Object& o = objs[k];
      if (k < same || c_.categories.size() == 1) {
        o.category = target_cat;
      } else {
        auto other = static_cast<std::size_t>(rng_.integer(0, static_cast<std::int64_t>(c_.categories.size()) - 2));
        o.category = other >= target_cat ? other + 1 : other;
      }
      o.color = static_cast<std::size_t>(rng_.integer(0, static_cast<std::int64_t>(c_.colors.size()) - 1));
      o.size = static_cast<std::size_t>(rng_.integer(0, static_cast<std::int64_t>(c_.sizes.size()) - 1));
    }
    std::vector<Object> placed;
    std::vector<Object> rest;
    if (n >= same + 2 && c_.between_layout > 0.0 && rng_.uniform() < c_.between_layout) {
      auto planted = plant_between(objs[0], objs[same], objs[same + 1]);
      if (!planted) return std::nullopt;
      placed = std::move(*planted);
      for (std::size_t k = 1; k < n; ++k)
        if (k != same && k != same + 1) rest.push_back(objs[k]);
    } else {
      rest = std::move(objs);
      keep_out_.reset();
    }
    for (auto& o : rest) {
      if (!place(o, placed, o.category == target_cat)) return std::nullopt;
      placed.push_back(o);
    }
    return placed;
  }

 private:
  std::pair<double, double> extent(const Object& o) {
    const double base = std::min(c_.image_width, c_.image_height);
    const double k = c_.sizes.size() > 1 ? static_cast<double>(o.size) / static_cast<double>(c_.sizes.size() - 1) : 0.0;
    const double lo = 0.08 + 0.14 * k;
    const double side = base * rng_.uniform(lo, lo + 0.06);
    const double aspect = rng_.uniform(0.8, 1.25);
    return {std::round(side * std::sqrt(aspect)), std::round(side / std::sqrt(aspect))};
  }

  static bool clear(const Box& b, const std::vector<Object>& placed) {
    const double gap = 2.0;
    return std::none_of(placed.begin(), placed.end(), [&](const Object& p) {
      return b.x_tl < p.box.x_br + gap && p.box.x_tl < b.x_br + gap && b.y_tl < p.box.y_br + gap &&
             p.box.y_tl < b.y_br + gap;
    });
  }

  // `avoid`: stay outside the planted keep-out disc.
  bool place(Object& o, const std::vector<Object>& placed, bool avoid = false) {
    const auto [w, h] = extent(o);
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double x = std::round(rng_.uniform(0.0, c_.image_width - w));
      const double y = std::round(rng_.uniform(0.0, c_.image_height - h));
      Box b{x, y, x + w, y + h};
      if (avoid && keep_out_ &&
          std::hypot(b.center_x() - keep_out_->x, b.center_y() - keep_out_->y) < keep_out_->radius)
        continue;
      if (clear(b, placed)) {
        o.box = b;
        return true;
      }
    }
    return false;
  }

  // Places a and b apart, then t near their midpoint. Returns {t, a, b}.
  std::optional<std::vector<Object>> plant_between(Object t, Object a, Object b) {
    const double base = std::min(c_.image_width, c_.image_height);
    for (int attempt = 0; attempt < 50; ++attempt) {
      std::vector<Object> trial;
      if (!place(a, trial)) continue;
      trial.push_back(a);
      if (!place(b, trial)) continue;
      trial.push_back(b);
      const double r = 0.5 * std::hypot(a.box.center_x() - b.box.center_x(), a.box.center_y() - b.box.center_y());
      if (r < 0.15 * base || r > 0.3 * base) continue;
      const double angle = rng_.uniform(0.0, 2.0 * std::acos(-1.0));
      const double rho = 0.4 * r * std::sqrt(rng_.uniform());
      const double cx = 0.5 * (a.box.center_x() + b.box.center_x()) + rho * std::cos(angle);
      const double cy = 0.5 * (a.box.center_y() + b.box.center_y()) + rho * std::sin(angle);
      if (!place_at(t, cx, cy, trial)) continue;
      keep_out_ = KeepOut{0.5 * (a.box.center_x() + b.box.center_x()), 0.5 * (a.box.center_y() + b.box.center_y()),
                          1.3 * r};
      return std::vector<Object>{t, a, b};
    }
    return std::nullopt;
  }

  bool place_at(Object& o, double cx, double cy, const std::vector<Object>& placed) {
    const auto [w, h] = extent(o);
    const double x = std::round(cx - 0.5 * w), y = std::round(cy - 0.5 * h);
    if (x < 0 || y < 0 || x + w > c_.image_width || y + h > c_.image_height) return false;
    Box b{x, y, x + w, y + h};
    if (!clear(b, placed)) return false;
    o.box = b;
    return true;
  }

  struct KeepOut {
    double x, y, radius;
  };

  const SynthConfig& c_;
  Rng& rng_;
  std::optional<KeepOut> keep_out_;
};

// Generator-side uniqueness checks over ground-truth object attributes.
class Describer {
 public:
  Describer(const SynthConfig& c, const std::vector<Object>& objs) : c_(c), objs_(objs) {}

  std::optional<std::vector<std::string>> describe(std::size_t target, Template t, Rng& rng) const {
    switch (t) {
      case Template::kAttribute: return attribute(target, rng);
      case Template::kRelation: return relation(target, rng);
      case Template::kSuperlative: return superlative(target, rng);
      case Template::kBetween: return between(target, rng);
    }
    return std::nullopt;
  }

 private:
  std::optional<std::vector<std::string>> attribute(std::size_t t, Rng& rng) const {
    const Object& o = objs_[t];
    const bool color_first = rng.uniform() < 0.5;
    for (int pass = 0; pass < 2; ++pass) {
      const bool use_color = (pass == 0) == color_first;
      std::size_t matches = 0;
      for (const auto& p : objs_)
        if (p.category == o.category && (use_color ? p.color == o.color : p.size == o.size)) ++matches;
      if (matches == 1)
        return std::vector<std::string>{"the", use_color ? c_.colors[o.color] : c_.sizes[o.size],
                                        c_.categories[o.category]};
    }
    return std::nullopt;
  }

  bool landmark_unique(std::size_t l) const {
    std::size_t matches = 0;
    for (const auto& p : objs_)
      if (p.category == objs_[l].category && p.color == objs_[l].color) ++matches;
    return matches == 1;
  }

  // Signed offset of `o` from the landmark along the relation axis; positive
  // means the relation holds.
  double offset(Relation r, const Object& o, const Object& l) const {
    switch (r) {
      case Relation::kLeftOf: return l.box.center_x() - o.box.center_x();
      case Relation::kRightOf: return o.box.center_x() - l.box.center_x();
      case Relation::kAbove: return l.box.center_y() - o.box.center_y();
      case Relation::kBelow: return o.box.center_y() - l.box.center_y();
      default: return 0.0;
    }
  }

  std::optional<std::vector<std::string>> relation(std::size_t t, Rng& rng) const {
    std::vector<Relation> rels;
    for (auto r : c_.relations)
      if (is_spatial(r)) rels.push_back(r);
    if (rels.empty()) return std::nullopt;
    std::vector<std::size_t> landmarks;
    for (std::size_t l = 0; l < objs_.size(); ++l)
      if (l != t && landmark_unique(l)) landmarks.push_back(l);
    rng.shuffle(rels);
    rng.shuffle(landmarks);
    const Object& o = objs_[t];
    for (std::size_t l : landmarks) {
      for (Relation r : rels) {
        const double margin = 0.04 * (r == Relation::kLeftOf || r == Relation::kRightOf ? c_.image_width : c_.image_height);
        bool ok = true;
        std::size_t holds = 0;
        for (std::size_t k = 0; k < objs_.size() && ok; ++k) {
          if (k == l || objs_[k].category != o.category) continue;
          const double d = offset(r, objs_[k], objs_[l]);
          if (std::abs(d) <= margin) ok = false;
          if (d > margin) ++holds;
        }
        if (ok && holds == 1 && offset(r, o, objs_[l]) > margin) {
          std::vector<std::string> words{"the", c_.categories[o.category]};
          for (auto& w : relation_words(r)) words.push_back(w);
          words.push_back("the");
          words.push_back(c_.colors[objs_[l].color]);
          words.push_back(c_.categories[objs_[l].category]);
          return words;
        }
      }
    }
    return std::nullopt;
  }

  std::optional<std::vector<std::string>> superlative(std::size_t t, Rng& rng) const {
    std::vector<Relation> rels;
    for (auto r : c_.relations)
      if (r == Relation::kLargest || r == Relation::kSmallest) rels.push_back(r);
    rng.shuffle(rels);
    const Object& o = objs_[t];
    for (Relation r : rels) {
      bool ok = false;
      bool beaten = false;
      for (std::size_t k = 0; k < objs_.size(); ++k) {
        if (k == t || objs_[k].category != o.category) continue;
        ok = true;
        const double a = o.box.area(), b = objs_[k].box.area();
        if (r == Relation::kLargest ? a < kSuperlativeRatio * b : kSuperlativeRatio * a > b) beaten = true;
      }
      if (ok && !beaten) return std::vector<std::string>{"the", relation_words(r)[0], c_.categories[o.category]};
    }
    return std::nullopt;
  }

  // Inside the circle whose diameter joins the two landmark centers, with
  // every other object of the category well outside it. No other object may
  // pair a landmark color with a landmark category.
  std::optional<std::vector<std::string>> between(std::size_t t, Rng& rng) const {
    if (std::find(c_.relations.begin(), c_.relations.end(), Relation::kBetween) == c_.relations.end())
      return std::nullopt;
    const Object& o = objs_[t];
    std::vector<std::size_t> landmarks;
    for (std::size_t l = 0; l < objs_.size(); ++l)
      if (objs_[l].category != o.category) landmarks.push_back(l);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t a = 0; a < landmarks.size(); ++a)
      for (std::size_t b = a + 1; b < landmarks.size(); ++b) pairs.emplace_back(landmarks[a], landmarks[b]);
    rng.shuffle(pairs);
    const double min_radius = 0.1 * std::min(c_.image_width, c_.image_height);
    for (auto [a, b] : pairs) {
      const auto& la = objs_[a];
      const auto& lb = objs_[b];
      const bool crossed = std::any_of(objs_.begin(), objs_.end(), [&](const Object& k) {
        if (&k == &la || &k == &lb) return false;
        return (k.category == la.category || k.category == lb.category) && (k.color == la.color || k.color == lb.color);
      });
      if (crossed || (la.category == lb.category && la.color == lb.color)) continue;
      const double mx = 0.5 * (objs_[a].box.center_x() + objs_[b].box.center_x());
      const double my = 0.5 * (objs_[a].box.center_y() + objs_[b].box.center_y());
      const double r = 0.5 * std::hypot(objs_[a].box.center_x() - objs_[b].box.center_x(),
                                        objs_[a].box.center_y() - objs_[b].box.center_y());
      if (r < min_radius) continue;
      auto dist = [&](const Object& k) { return std::hypot(k.box.center_x() - mx, k.box.center_y() - my); };
      if (dist(o) > kBetweenInner * r) continue;
      bool ok = true;
      for (std::size_t k = 0; k < objs_.size() && ok; ++k)
        if (k != t && objs_[k].category == o.category && dist(objs_[k]) < kBetweenOuter * r) ok = false;
      if (!ok) continue;
      if (rng.uniform() < 0.5) std::swap(a, b);
      return std::vector<std::string>{"the", c_.categories[o.category], "between", "the",
                                      c_.colors[objs_[a].color],    c_.categories[objs_[a].category],
                                      "and",                         "the",
                                      c_.colors[objs_[b].color],    c_.categories[objs_[b].category]};
    }
    return std::nullopt;
  }

  const SynthConfig& c_;
  const std::vector<Object>& objs_;
};

// Weighted sampling without replacement; a plain shuffle when unweighted.
std::vector<Template> template_order(const SynthConfig& c, Rng& rng) {
  auto pool = c.templates;
  if (c.template_weights.empty()) {
    rng.shuffle(pool);
    return pool;
  }
  auto w = c.template_weights;
  std::vector<Template> out;
  while (!pool.empty()) {
    double u = rng.uniform() * std::accumulate(w.begin(), w.end(), 0.0);
    std::size_t k = 0;
    while (k + 1 < w.size() && u >= w[k]) u -= w[k++];
    out.push_back(pool[k]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
    w.erase(w.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return out;
}

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (const auto& w : words) s += (s.empty() ? "" : " ") + w;
  return s;
}

}  // namespace

SynthResult synth_world(const SynthConfig& c) {
  c.validate();
  Rng rng(c.seed);
  SynthResult result;
  Dataset& ds = result.dataset;
  ds.alphabets = {c.categories, c.colors, c.sizes};
  ds.visual_dim = c.visual_dim;
  ds.use_visdif = c.use_visdif;

  const std::size_t total = c.train_scenes + c.val_scenes + c.test_scenes;
  std::int64_t next_expr = 0;
  for (std::size_t s = 0; s < total; ++s) {
    const char* split = s < c.train_scenes ? "train" : s < c.train_scenes + c.val_scenes ? "val" : "test";
    for (int attempt = 0;; ++attempt) {
      if (attempt >= 1000) throw ConfigError("synth: templates cannot produce a unique referent for this config");
      SceneBuilder builder(c, rng);
      auto objs = builder.objects();
      if (!objs) continue;
      // Region order is random so the referent position carries no signal.
      std::vector<std::size_t> order(objs->size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.shuffle(order);
      std::vector<Object> shuffled;
      for (auto i : order) shuffled.push_back((*objs)[i]);

      const std::size_t target_cat = (*objs)[0].category;
      std::vector<std::size_t> candidates;
      for (std::size_t i = 0; i < shuffled.size(); ++i)
        if (shuffled[i].category == target_cat) candidates.push_back(i);

      Describer describer(c, shuffled);
      std::vector<std::pair<std::size_t, std::vector<std::string>>> chosen;
      std::set<std::string> seen;
      for (std::size_t e = 0; e < c.expressions_per_scene; ++e) {
        bool found = false;
        for (auto tpl : template_order(c, rng)) {
          auto targets = candidates;
          rng.shuffle(targets);
          for (auto t : targets) {
            auto words = describer.describe(t, tpl, rng);
            if (words && seen.insert(join(*words)).second) {
              chosen.emplace_back(t, std::move(*words));
              found = true;
              break;
            }
          }
          if (found) break;
        }
        if (!found) break;
      }
      if (chosen.empty()) {
        ++result.skipped;
        continue;
      }

      Scene scene;
      scene.id = static_cast<std::int64_t>(s);
      scene.width = c.image_width;
      scene.height = c.image_height;
      for (std::size_t i = 0; i < shuffled.size(); ++i) {
        const Object& o = shuffled[i];
        Region r;
        r.id = static_cast<std::int64_t>(i);
        r.box = o.box;
        r.category = c.categories[o.category];
        r.attributes = {{"color", c.colors[o.color]}, {"size", c.sizes[o.size]}};
        r.feature.visual = attribute_code(ds.alphabets, c.visual_dim, r.category, r.attributes);
        for (auto& v : r.feature.visual) v = static_cast<double>(static_cast<float>(v + c.noise_std * rng.normal()));
        scene.regions.push_back(std::move(r));
      }
      finalize_features(scene, c.use_visdif);
      for (auto& [t, words] : chosen) {
        ExpressionRecord rec;
        rec.id = next_expr++;
        rec.scene_id = scene.id;
        rec.raw = join(words);
        rec.tokens = std::move(words);
        rec.referent = t;
        ds.splits[split].push_back(rec.id);
        ds.expressions.push_back(std::move(rec));
      }
      ds.scenes.push_back(std::move(scene));
      break;
    }
  }
  ds.reindex();
  return result;
}

}  // namespace vc::data
