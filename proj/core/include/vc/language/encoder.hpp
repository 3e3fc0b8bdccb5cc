#pragma once

#include <array>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vc/compute/lstm.hpp"
#include "vc/language/vocabulary.hpp"

namespace vc::language {

using compute::Graph;
using compute::Var;

// Cue-specific language features: context single/pairwise (c1, c2),
// referent single/pairwise (r1, r2) and generic (g).
enum class Cue : std::size_t { kC1 = 0, kC2, kR1, kR2, kG };
inline constexpr std::size_t kCueCount = 5;
inline constexpr std::array<Cue, kCueCount> kAllCues{Cue::kC1, Cue::kC2, Cue::kR1, Cue::kR2, Cue::kG};
const char* cue_name(Cue c);

struct EncoderConfig {
  std::size_t embed_dim = 64;
  // Per direction; per-token hidden vectors are 4x this (2 layers x 2 directions).
  std::size_t hidden = 64;
  // Ablation: attention weights fixed to the uniform distribution over tokens.
  bool uniform_attention = false;
};

struct CueFeatures {
  std::array<Var, kCueCount> y;
  std::array<Var, kCueCount> alpha;  // over the (padded) token positions
  std::size_t length = 0;            // non-pad tokens

  Var operator[](Cue c) const { return y[static_cast<std::size_t>(c)]; }
  Var attention(Cue c) const { return alpha[static_cast<std::size_t>(c)]; }
};

// Word embeddings, 2-layer bidirectional LSTM, and five attention heads.
// The embedding table is the W_e shared with the decoder.
class LanguageEncoder {
 public:
  LanguageEncoder() = default;
  // Creates parameters under "language/".
  static LanguageEncoder create(compute::ParameterSet& params, const EncoderConfig& cfg, std::size_t vocab_size,
                                Rng& rng);
  static LanguageEncoder bind(compute::ParameterSet& params, const EncoderConfig& cfg, std::size_t vocab_size);

  const EncoderConfig& config() const { return cfg_; }
  std::size_t hidden_dim() const { return 4 * cfg_.hidden; }
  compute::Parameter& embedding() const { return *embedding_; }

  std::vector<Var> embed(Graph& g, std::span<const std::size_t> tokens) const;
  // One output row per input row: [fwd1, bwd1, fwd2, bwd2].
  std::vector<Var> encode(Graph& g, std::span<const Var> embedded) const;
  // alpha_j = softmax_j(fc_cue(h_j)) over unmasked j; y = sum_j alpha_j w_j.
  std::pair<Var, Var> attend(Graph& g, std::span<const Var> hidden, std::span<const Var> embedded, Cue cue,
                             const compute::Mask& mask) const;
  // Tokens may carry trailing pads; pads get zero hidden states and zero
  // attention. Throws DomainError when every token is a pad.
  CueFeatures build_cues(Graph& g, std::span<const std::size_t> tokens) const;

 private:
  EncoderConfig cfg_;
  compute::Parameter* embedding_ = nullptr;
  std::array<compute::LstmCell, 4> lstm_{};  // l1 fwd, l1 bwd, l2 fwd, l2 bwd
  std::array<compute::Parameter*, kCueCount> cue_w_{};
  std::array<compute::Parameter*, kCueCount> cue_b_{};
};

// Overwrites embedding rows from a "word v1 ... vD" text file. Returns the
// number of vocabulary words found.
std::size_t load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, compute::Parameter& embedding);

// CSV rows "expression_id,cue,token,weight" for non-pad positions.
void write_attention_csv_header(std::ostream& os);
void write_attention_csv(std::ostream& os, std::int64_t expression_id, std::span<const std::string> words,
                         const std::array<std::vector<double>, kCueCount>& weights);

}  // namespace vc::language
