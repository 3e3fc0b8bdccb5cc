#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace vc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kIo = 2, kNumerical = 3 };

struct Options {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> data;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> out;
  std::optional<std::string> split;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> iterations;
  std::optional<std::string> head;
  std::optional<double> threshold;
  bool unsupervised = false;
  bool with_gen = false;
  bool with_gen_pg = false;
  bool wo_reg = false;
  bool wo_alpha = false;
  bool exclude_self = false;
  bool self_check = false;  // generate: score the references against themselves
  std::string suite;        // oracle
};

// Each command reports progress on `out` and diagnostics on `err`, and maps
// library errors onto the exit codes above.
int cmd_synth(const Options& o, std::ostream& out, std::ostream& err);
int cmd_train(const Options& o, std::ostream& out, std::ostream& err);
int cmd_eval(const Options& o, std::ostream& out, std::ostream& err);
int cmd_generate(const Options& o, std::ostream& out, std::ostream& err);
int cmd_oracle(const Options& o, std::ostream& out, std::ostream& err);
// Prints the documented default configuration.
int cmd_config(const Options& o, std::ostream& out, std::ostream& err);

}  // namespace vc::cli
