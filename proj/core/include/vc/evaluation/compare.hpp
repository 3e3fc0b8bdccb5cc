#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vc/evaluation/metrics.hpp"

namespace vc::evaluation {

struct HeadUnderTest {
  std::string name;
  const Model* model = nullptr;
  std::uint64_t dataset_hash = 0;  // hash of the data the head was trained on
};

struct ComparisonRow {
  std::string head;
  std::string bucket;  // "all" or a region count
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

// Accuracy per head per bucket; buckets are "all" followed by every region
// count present in the split, so there are heads x buckets rows. Throws
// ConfigError when a head was trained on a dataset with a different hash.
std::vector<ComparisonRow> compare_heads(const data::Dataset& ds, const std::string& split,
                                         std::span<const HeadUnderTest> heads, double threshold = 0.5);

void write_comparison_csv(std::ostream& os, std::span<const ComparisonRow> rows);

}  // namespace vc::evaluation
