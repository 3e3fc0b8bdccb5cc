#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "vc/compute/lstm.hpp"
#include "vc/language/vocabulary.hpp"

namespace vc::generation {

using compute::Graph;
using compute::Parameter;
using compute::ParameterSet;
using compute::Var;
using language::Vocabulary;

struct DecoderConfig {
  std::size_t region_dim = 0;
  std::size_t embed_dim = 64;  // must match the shared word embedding
  std::size_t hidden = 128;
  double dropout = 0.3;
  // Output steps including the stop word.
  std::size_t max_steps = 20;
};

// A teacher-forcing pair. inputs[t] are comprehension-vocabulary ids fed at
// step t (inputs[0] is the start word); targets[t] are generation-vocabulary
// ids predicted at step t (the last one is the stop word).
struct TokenSequence {
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> targets;
};

// At most max_steps - 1 words are kept so the stop word always fits.
TokenSequence make_sequence(std::span<const std::string> words, const Vocabulary& comprehension,
                            const Vocabulary& generation, std::size_t max_steps = 20);

// LSTM speaker conditioned on the referent, its joint-attention context and
// the global image feature. Word inputs share the comprehension embedding.
class ExpressionDecoder {
 public:
  ExpressionDecoder() = default;
  // Creates parameters under "generation/".
  static ExpressionDecoder create(ParameterSet& params, const DecoderConfig& cfg, Parameter& embedding,
                                  std::size_t vocab_size, Rng& rng);
  static ExpressionDecoder bind(ParameterSet& params, const DecoderConfig& cfg, Parameter& embedding,
                                std::size_t vocab_size);

  const DecoderConfig& config() const { return cfg_; }
  std::size_t vocab_size() const { return vocab_size_; }

  // gamma_j = softmax_j(fc([x_i, x_j])), phi = l2norm(beta * gamma),
  // z_hat = sum_j phi_j x_j. Returns (phi, z_hat).
  std::pair<Var, Var> joint_attention(Graph& g, std::size_t i, std::span<const Var> x, Var beta) const;

  // Per-step log distributions over the generation vocabulary, teacher forced
  // on seq.inputs. pad and start are masked out. Dropout is applied to the
  // hidden state when `dropout_rng` is given.
  std::vector<Var> step_log_probs(Graph& g, Var x_i, Var z_hat, Var image, const TokenSequence& seq,
                                  Rng* dropout_rng = nullptr) const;
  // log s_psi = sum_t log p_t[target_t].
  Var log_likelihood(Graph& g, Var x_i, Var z_hat, Var image, const TokenSequence& seq,
                     Rng* dropout_rng = nullptr) const;
  // L_c = -log s_psi.
  Var ce_loss(Graph& g, Var x_i, Var z_hat, Var image, const TokenSequence& seq, Rng* dropout_rng = nullptr) const;

  // Greedy decoding from the start word. Returns generation ids without the
  // stop word; at most max_steps ids.
  std::vector<std::size_t> generate(Graph& g, Var x_i, Var z_hat, Var image, const Vocabulary& comprehension,
                                    const Vocabulary& generation) const;

 private:
  compute::LstmState initial_state(Graph& g, Var x_i, Var z_hat, Var image) const;
  Var step_logits(Graph& g, Var h, Rng* dropout_rng) const;

  DecoderConfig cfg_;
  std::size_t vocab_size_ = 0;
  Parameter* embedding_ = nullptr;
  Parameter *gamma_w_ = nullptr, *gamma_b_ = nullptr;
  Parameter *init_w_ = nullptr, *init_b_ = nullptr;
  Parameter *out_w_ = nullptr, *out_b_ = nullptr;
  compute::LstmCell lstm_;
};

void write_generation_csv_header(std::ostream& os);
void write_generation_row(std::ostream& os, std::int64_t expression_id, std::int64_t region_id,
                          const std::string& text, double log_likelihood);

}  // namespace vc::generation
