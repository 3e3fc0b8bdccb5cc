#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vc/model.hpp"

namespace vc::training {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TrainerSnapshot {
  std::uint64_t iteration = 0;
  double baseline = 0.0;
  std::map<std::string, compute::Tensor> momentum;
};

struct NamedTensor {
  std::string name;
  compute::Tensor value;
};

struct CheckpointData {
  std::uint32_t version = kCheckpointVersion;
  std::vector<NamedTensor> parameters;
  TrainerSnapshot state;
};

// Binary layout (little endian):
//   "VCK1", u32 version,
//   u32 block count, blocks of (u32 name length, name, u32 rank, u32 extents[rank], f32 data),
//   u64 iteration, f64 baseline, u32 block count, momentum blocks.
// Values are stored as float32.
void write_checkpoint(const std::filesystem::path& path, const compute::ParameterSet& params,
                      const TrainerSnapshot& state);
CheckpointData read_checkpoint(const std::filesystem::path& path);

// Copies checkpoint blocks into `params`. Throws DimensionError naming the
// first block whose shape differs and ConfigError on missing or unknown
// blocks. Momentum buffers are validated the same way.
void apply_checkpoint(compute::ParameterSet& params, const CheckpointData& data);

// Rounds every parameter to the float32 storage precision, so an in-memory
// model scores exactly like its reloaded checkpoint.
void round_to_storage(compute::ParameterSet& params);

// Model configuration plus run metadata, saved as "<checkpoint>.cfg".
struct RunMetadata {
  std::string objective = "supervised";  // or "unsupervised"
  std::uint64_t dataset_hash = 0;
  std::uint64_t seed = 0;
};

std::string model_config_text(const ModelConfig& cfg, const RunMetadata& meta);
std::pair<ModelConfig, RunMetadata> parse_model_config(const std::string& text, const std::string& origin);

struct LoadedModel {
  std::unique_ptr<Model> model;
  TrainerSnapshot state;
  RunMetadata meta;
};

// Writes the checkpoint, "<path>.cfg" and "<path>.vocab".
void save_model(const std::filesystem::path& path, const Model& model, const TrainerSnapshot& state,
                const RunMetadata& meta);
LoadedModel load_model(const std::filesystem::path& path);

// Throws DimensionError naming the parameter block that cannot accept the
// region features of `ds`.
void check_compatible(const Model& model, const data::Dataset& ds);

}  // namespace vc::training
