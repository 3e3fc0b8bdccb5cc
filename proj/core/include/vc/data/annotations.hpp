#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vc/data/dataset.hpp"

namespace vc::data {

// Binary feature matrix: "VCF1", u32 count, u32 dim, count*dim float32,
// all little-endian, row-major.
struct FeatureMatrix {
  std::uint32_t count = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;
};

void write_feature_matrix(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feature_matrix(const std::filesystem::path& path);

// Sidecar row index: one "image_id region_id" line per matrix row.
using FeatureIndex = std::vector<std::pair<std::int64_t, std::int64_t>>;
void write_feature_index(const std::filesystem::path& path, const FeatureIndex& index);
FeatureIndex read_feature_index(const std::filesystem::path& path);

struct LoadOptions {
  // Every expression must name its referent.
  bool require_referents = false;
};

// Parses and validates an annotation file. Visual features come from the
// companion matrix named in the file's "features" block, or are synthesized
// from region attribute codes when the block is absent. Throws
// ValidationError listing every offending record.
Dataset load_annotations(const std::filesystem::path& path, const LoadOptions& opts = {});
Dataset parse_annotations(const std::string& json_text, const std::filesystem::path& base_dir,
                          const LoadOptions& opts = {});

// Writes `<stem>.json` plus `<stem>.vcf` / `<stem>.idx` beside it.
void save_annotations(const Dataset& dataset, const std::filesystem::path& json_path);

// Canonical annotation JSON (without the features block) for hashing and
// round-trip comparison.
std::string annotations_json(const Dataset& dataset);

// FNV-1a over the canonical annotation text and the float32 visual features.
std::uint64_t dataset_hash(const Dataset& dataset);

}  // namespace vc::data
