#include "vc/evaluation/compare.hpp"

#include <cstdio>
#include <set>

#include "vc/data/annotations.hpp"

namespace vc::evaluation {

std::vector<ComparisonRow> compare_heads(const data::Dataset& ds, const std::string& split,
                                         std::span<const HeadUnderTest> heads, double threshold) {
  const auto hash = data::dataset_hash(ds);
  for (const auto& h : heads) {
    if (!h.model) throw ConfigError("head '" + h.name + "' has no model");
    if (h.dataset_hash != hash)
      throw ConfigError("head '" + h.name + "' was trained on dataset " + std::to_string(h.dataset_hash) +
                        ", comparison dataset is " + std::to_string(hash));
  }
  std::set<std::size_t> counts;
  for (const auto* e : ds.split(split))
    if (e->referent) counts.insert(ds.scene_of(*e).regions.size());

  std::vector<ComparisonRow> rows;
  for (const auto& h : heads) {
    const auto r = grounding_accuracy(*h.model, ds, split, threshold);
    rows.push_back({h.name, "all", r.samples, r.correct});
    for (auto n : counts) {
      auto it = r.buckets.find(n);
      ComparisonRow row{h.name, std::to_string(n), 0, 0};
      if (it != r.buckets.end()) {
        row.count = it->second.count;
        row.correct = it->second.correct;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

void write_comparison_csv(std::ostream& os, std::span<const ComparisonRow> rows) {
  os << "head,bucket,count,correct,accuracy\n";
  char buf[32];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.6f", r.accuracy());
    os << r.head << ',' << r.bucket << ',' << r.count << ',' << r.correct << ',' << buf << '\n';
  }
}

}  // namespace vc::evaluation
