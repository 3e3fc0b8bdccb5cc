#include "vc/generation/decoder.hpp"

#include <cstdio>

namespace vc::generation {

using compute::Init;
using compute::Mask;
using compute::Vector;

TokenSequence make_sequence(std::span<const std::string> words, const Vocabulary& comprehension,
                            const Vocabulary& generation, std::size_t max_steps) {
  if (max_steps == 0) throw ConfigError("max_steps must be positive");
  const std::size_t n = std::min(words.size(), max_steps - 1);
  TokenSequence seq;
  seq.inputs.push_back(Vocabulary::kStart);
  for (std::size_t t = 0; t < n; ++t) {
    seq.inputs.push_back(comprehension.id(words[t]));
    seq.targets.push_back(generation.id(words[t]));
  }
  seq.targets.push_back(Vocabulary::kStop);
  return seq;
}

ExpressionDecoder ExpressionDecoder::create(ParameterSet& params, const DecoderConfig& cfg, Parameter& embedding,
                                            std::size_t vocab_size, Rng& rng) {
  params.add("generation/gamma/w", {1, 2 * cfg.region_dim}, Init::kXavier, rng);
  params.add("generation/gamma/b", {1}, Init::kZero, rng, true);
  params.add("generation/init/w", {cfg.embed_dim, 3 * cfg.region_dim}, Init::kXavier, rng);
  params.add("generation/init/b", {cfg.embed_dim}, Init::kZero, rng, true);
  compute::LstmCell::create(params, "generation/lstm", cfg.embed_dim, cfg.hidden, rng);
  params.add("generation/out/w", {vocab_size, cfg.hidden}, Init::kXavier, rng);
  params.add("generation/out/b", {vocab_size}, Init::kZero, rng, true);
  return bind(params, cfg, embedding, vocab_size);
}

ExpressionDecoder ExpressionDecoder::bind(ParameterSet& params, const DecoderConfig& cfg, Parameter& embedding,
                                          std::size_t vocab_size) {
  ExpressionDecoder d;
  d.cfg_ = cfg;
  d.vocab_size_ = vocab_size;
  d.embedding_ = &embedding;
  if (embedding.value.cols() != cfg.embed_dim)
    throw DimensionError("decoder embed_dim " + std::to_string(cfg.embed_dim) + " does not match the word embedding (" +
                         std::to_string(embedding.value.cols()) + ")");
  if (vocab_size < Vocabulary::kReserved) throw ConfigError("generation vocabulary lacks the reserved entries");
  d.gamma_w_ = &params.at("generation/gamma/w");
  d.gamma_b_ = &params.at("generation/gamma/b");
  d.init_w_ = &params.at("generation/init/w");
  d.init_b_ = &params.at("generation/init/b");
  d.out_w_ = &params.at("generation/out/w");
  d.out_b_ = &params.at("generation/out/b");
  if (d.out_w_->value.shape() != compute::Shape{vocab_size, cfg.hidden})
    throw DimensionError("generation/out/w has shape " + compute::shape_string(d.out_w_->value.shape()) +
                         ", expected [" + std::to_string(vocab_size) + ", " + std::to_string(cfg.hidden) + "]");
  if (d.init_w_->value.shape() != compute::Shape{cfg.embed_dim, 3 * cfg.region_dim})
    throw DimensionError("generation/init/w has shape " + compute::shape_string(d.init_w_->value.shape()));
  d.lstm_ = compute::LstmCell::bind(params, "generation/lstm", cfg.embed_dim, cfg.hidden);
  return d;
}

std::pair<Var, Var> ExpressionDecoder::joint_attention(Graph& g, std::size_t i, std::span<const Var> x,
                                                       Var beta) const {
  const std::size_t n = x.size();
  if (n == 0 || i >= n) throw DomainError("joint_attention: region index out of range");
  if (g.dim(beta) != n) throw DimensionError("joint_attention: beta has the wrong length");
  Var left = g.affine_block(*gamma_w_, *gamma_b_, 0, x[i]);
  std::vector<Var> logits(n);
  for (std::size_t j = 0; j < n; ++j) logits[j] = g.add(left, g.linear_block(*gamma_w_, cfg_.region_dim, x[j]));
  Var gamma = g.softmax(g.concat(logits));
  Var phi = g.l2norm(g.mul(beta, gamma));
  return {phi, g.weighted_sum(phi, x)};
}

compute::LstmState ExpressionDecoder::initial_state(Graph& g, Var x_i, Var z_hat, Var image) const {
  Var w_minus1 = g.affine(*init_w_, *init_b_, g.concat({x_i, z_hat, image}));
  return compute::lstm_step(g, lstm_, w_minus1, compute::lstm_zero_state(g, cfg_.hidden));
}

Var ExpressionDecoder::step_logits(Graph& g, Var h, Rng* dropout_rng) const {
  if (dropout_rng && cfg_.dropout > 0.0) {
    const double keep = 1.0 - cfg_.dropout;
    Vector mask(static_cast<Eigen::Index>(cfg_.hidden));
    for (Eigen::Index k = 0; k < mask.size(); ++k) mask[k] = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
    h = g.mul(h, g.constant(std::move(mask)));
  }
  return g.affine(*out_w_, *out_b_, h);
}

namespace {
Mask output_mask(std::size_t v) {
  Mask m(v, true);
  m[Vocabulary::kPad] = false;
  m[Vocabulary::kStart] = false;
  return m;
}
}  // namespace

std::vector<Var> ExpressionDecoder::step_log_probs(Graph& g, Var x_i, Var z_hat, Var image, const TokenSequence& seq,
                                                   Rng* dropout_rng) const {
  if (seq.inputs.size() != seq.targets.size() || seq.inputs.empty())
    throw DimensionError("token sequence inputs and targets must have equal, positive length");
  if (seq.inputs.size() > cfg_.max_steps)
    throw DomainError("token sequence longer than " + std::to_string(cfg_.max_steps) + " steps");
  const Mask mask = output_mask(vocab_size_);
  auto state = initial_state(g, x_i, z_hat, image);
  std::vector<Var> out;
  out.reserve(seq.inputs.size());
  for (std::size_t t = 0; t < seq.inputs.size(); ++t) {
    if (seq.inputs[t] >= embedding_->value.rows()) throw DomainError("decoder input id outside vocabulary");
    state = compute::lstm_step(g, lstm_, g.row(*embedding_, seq.inputs[t]), state);
    out.push_back(g.log_softmax(step_logits(g, state.h, dropout_rng), &mask));
  }
  return out;
}

Var ExpressionDecoder::log_likelihood(Graph& g, Var x_i, Var z_hat, Var image, const TokenSequence& seq,
                                      Rng* dropout_rng) const {
  const auto steps = step_log_probs(g, x_i, z_hat, image, seq, dropout_rng);
  std::vector<Var> terms;
  terms.reserve(steps.size());
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const auto target = seq.targets[t];
    if (target >= vocab_size_ || target == Vocabulary::kPad || target == Vocabulary::kStart)
      throw DomainError("decoder target id " + std::to_string(target) + " cannot be emitted");
    terms.push_back(g.pick(steps[t], target));
  }
  return g.sum(g.concat(terms));
}

Var ExpressionDecoder::ce_loss(Graph& g, Var x_i, Var z_hat, Var image, const TokenSequence& seq,
                               Rng* dropout_rng) const {
  return g.neg(log_likelihood(g, x_i, z_hat, image, seq, dropout_rng));
}

std::vector<std::size_t> ExpressionDecoder::generate(Graph& g, Var x_i, Var z_hat, Var image,
                                                     const Vocabulary& comprehension,
                                                     const Vocabulary& generation) const {
  if (generation.size() != vocab_size_) throw DimensionError("generation vocabulary size does not match decoder");
  auto state = initial_state(g, x_i, z_hat, image);
  std::vector<std::size_t> out;
  std::size_t input = Vocabulary::kStart;
  for (std::size_t t = 0; t < cfg_.max_steps; ++t) {
    state = compute::lstm_step(g, lstm_, g.row(*embedding_, input), state);
    const Vector& logits = g.value(step_logits(g, state.h, nullptr));
    std::size_t best = Vocabulary::kUnk;
    for (std::size_t k = 0; k < vocab_size_; ++k) {
      if (k == Vocabulary::kPad || k == Vocabulary::kStart) continue;
      if (logits[static_cast<Eigen::Index>(k)] > logits[static_cast<Eigen::Index>(best)]) best = k;
    }
    if (best == Vocabulary::kStop) break;
    out.push_back(best);
    input = comprehension.id(generation.word(best));
  }
  return out;
}

void write_generation_csv_header(std::ostream& os) { os << "expression_id,region_id,generated_text,log_likelihood\n"; }

void write_generation_row(std::ostream& os, std::int64_t expression_id, std::int64_t region_id,
                          const std::string& text, double log_likelihood) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", log_likelihood);
  std::string field = text;
  if (field.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char c : field) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    field = q + "\"";
  }
  os << expression_id << ',' << region_id << ',' << field << ',' << buf << '\n';
}

}  // namespace vc::generation
