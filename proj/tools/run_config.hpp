#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vc/data/synth.hpp"
#include "vc/model.hpp"
#include "vc/training/trainer.hpp"

namespace vc::cli {

// Line-based configuration:
//
//   # comment
//   seed = 7
//   [synth]
//   train_scenes = 2000
//   [model]
//   head = vc
//   [train]
//   iterations = 20000
//
// Keys before the first section header belong to [run].
struct RunConfig {
  std::uint64_t seed = 1;
  data::SynthConfig synth;
  ModelConfig model;
  training::TrainConfig train;
  std::string eval_split = "test";
  double threshold = 0.5;
  std::optional<std::filesystem::path> embeddings;  // optional GloVe-style file

  // Cross-field checks (mutually exclusive modes and the like).
  void validate() const;
};

// Parses the text; errors name "origin:line". VC_SEED in the environment, when
// set, overrides the seed after parsing.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

// Documented keys, rendered as a commented default config.
std::string default_config_text();

}  // namespace vc::cli
