#include "vc/language/encoder.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace vc::language {

using compute::Mask;
using compute::Vector;

const char* cue_name(Cue c) {
  switch (c) {
    case Cue::kC1: return "c1";
    case Cue::kC2: return "c2";
    case Cue::kR1: return "r1";
    case Cue::kR2: return "r2";
    case Cue::kG: return "g";
  }
  return "?";
}

namespace {
const char* kLstmNames[4] = {"language/blstm/l1_fwd", "language/blstm/l1_bwd", "language/blstm/l2_fwd",
                             "language/blstm/l2_bwd"};
}

LanguageEncoder LanguageEncoder::create(compute::ParameterSet& params, const EncoderConfig& cfg,
                                        std::size_t vocab_size, Rng& rng) {
  params.add("language/embedding", {vocab_size, cfg.embed_dim}, compute::Init::kXavier, rng);
  for (int k = 0; k < 4; ++k)
    compute::LstmCell::create(params, kLstmNames[k], k < 2 ? cfg.embed_dim : 2 * cfg.hidden, cfg.hidden, rng);
  for (auto c : kAllCues) {
    const std::string p = std::string("language/cue_") + cue_name(c);
    params.add(p + "/w", {1, 4 * cfg.hidden}, compute::Init::kXavier, rng);
    params.add(p + "/b", {1}, compute::Init::kZero, rng, true);
  }
  return bind(params, cfg, vocab_size);
}

LanguageEncoder LanguageEncoder::bind(compute::ParameterSet& params, const EncoderConfig& cfg, std::size_t vocab_size) {
  LanguageEncoder enc;
  enc.cfg_ = cfg;
  enc.embedding_ = &params.at("language/embedding");
  if (enc.embedding_->value.rows() != vocab_size)
    throw DimensionError("language/embedding has " + std::to_string(enc.embedding_->value.rows()) +
                         " rows for a vocabulary of " + std::to_string(vocab_size));
  for (int k = 0; k < 4; ++k)
    enc.lstm_[static_cast<std::size_t>(k)] =
        compute::LstmCell::bind(params, kLstmNames[k], k < 2 ? cfg.embed_dim : 2 * cfg.hidden, cfg.hidden);
  for (auto c : kAllCues) {
    const std::string p = std::string("language/cue_") + cue_name(c);
    enc.cue_w_[static_cast<std::size_t>(c)] = &params.at(p + "/w");
    enc.cue_b_[static_cast<std::size_t>(c)] = &params.at(p + "/b");
  }
  return enc;
}

std::vector<Var> LanguageEncoder::embed(Graph& g, std::span<const std::size_t> tokens) const {
  std::vector<Var> rows;
  rows.reserve(tokens.size());
  for (auto t : tokens) {
    if (t >= embedding_->value.rows()) throw DomainError("token id " + std::to_string(t) + " outside vocabulary");
    rows.push_back(g.row(*embedding_, t));
  }
  return rows;
}

std::vector<Var> LanguageEncoder::encode(Graph& g, std::span<const Var> embedded) const {
  const std::size_t n = embedded.size();
  if (n == 0) throw DomainError("blstm_encode: empty sequence");
  auto run = [&](const compute::LstmCell& cell, std::span<const Var> in, bool reverse) {
    std::vector<Var> out(n);
    auto state = compute::lstm_zero_state(g, cfg_.hidden);
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = reverse ? n - 1 - k : k;
      state = compute::lstm_step(g, cell, in[t], state);
      out[t] = state.h;
    }
    return out;
  };
  const auto f1 = run(lstm_[0], embedded, false);
  const auto b1 = run(lstm_[1], embedded, true);
  std::vector<Var> layer1(n);
  for (std::size_t t = 0; t < n; ++t) layer1[t] = g.concat({f1[t], b1[t]});
  const auto f2 = run(lstm_[2], layer1, false);
  const auto b2 = run(lstm_[3], layer1, true);
  std::vector<Var> out(n);
  for (std::size_t t = 0; t < n; ++t) out[t] = g.concat({f1[t], b1[t], f2[t], b2[t]});
  return out;
}

std::pair<Var, Var> LanguageEncoder::attend(Graph& g, std::span<const Var> hidden, std::span<const Var> embedded,
                                            Cue cue, const Mask& mask) const {
  const std::size_t n = embedded.size();
  if (hidden.size() != n || mask.size() != n) throw DimensionError("cue_attention: ragged inputs");
  Var alpha;
  if (cfg_.uniform_attention) {
    std::size_t live = 0;
    for (bool m : mask) live += m;
    if (live == 0) throw DomainError("cue_attention: every token is padding");
    Vector a = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j)
      if (mask[j]) a[static_cast<Eigen::Index>(j)] = 1.0 / static_cast<double>(live);
    alpha = g.constant(std::move(a));
  } else {
    const auto c = static_cast<std::size_t>(cue);
    std::vector<Var> logits(n);
    for (std::size_t j = 0; j < n; ++j) logits[j] = g.affine(*cue_w_[c], *cue_b_[c], hidden[j]);
    alpha = g.softmax(g.concat(logits), &mask);
  }
  return {alpha, g.weighted_sum(alpha, embedded)};
}

CueFeatures LanguageEncoder::build_cues(Graph& g, std::span<const std::size_t> tokens) const {
  std::size_t length = 0;
  while (length < tokens.size() && tokens[length] != Vocabulary::kPad) ++length;
  for (std::size_t k = length; k < tokens.size(); ++k)
    if (tokens[k] != Vocabulary::kPad) throw DomainError("padding must be trailing");
  if (length == 0) throw DomainError("cue_attention: every token is padding");

  const auto embedded = embed(g, tokens);
  Mask mask(tokens.size(), false);
  for (std::size_t k = 0; k < length; ++k) mask[k] = true;

  std::vector<Var> hidden(tokens.size());
  if (!cfg_.uniform_attention) {
    const auto live = encode(g, std::span<const Var>(embedded.data(), length));
    for (std::size_t k = 0; k < length; ++k) hidden[k] = live[k];
    for (std::size_t k = length; k < tokens.size(); ++k)
      hidden[k] = g.constant(Vector::Zero(static_cast<Eigen::Index>(hidden_dim())));
  } else {
    for (auto& h : hidden) h = embedded[0];  // unused by uniform attention
  }

  CueFeatures out;
  out.length = length;
  for (auto c : kAllCues) {
    auto [alpha, y] = attend(g, hidden, embedded, c, mask);
    out.alpha[static_cast<std::size_t>(c)] = alpha;
    out.y[static_cast<std::size_t>(c)] = y;
  }
  return out;
}

std::size_t load_embeddings(const std::filesystem::path& path, const Vocabulary& vocab, compute::Parameter& embedding) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::size_t found = 0, lineno = 0;
  const std::size_t dim = embedding.value.cols();
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word) || !vocab.contains(word)) continue;
    std::vector<double> v;
    for (double x; ls >> x;) v.push_back(x);
    if (v.size() != dim)
      throw DimensionError(path.string() + ":" + std::to_string(lineno) + ": vector of dimension " +
                           std::to_string(v.size()) + ", expected " + std::to_string(dim));
    const auto row = vocab.id(word);
    for (std::size_t k = 0; k < dim; ++k) embedding.value[row * dim + k] = v[k];
    ++found;
  }
  return found;
}

void write_attention_csv_header(std::ostream& os) { os << "expression_id,cue,token,weight\n"; }

void write_attention_csv(std::ostream& os, std::int64_t expression_id, std::span<const std::string> words,
                         const std::array<std::vector<double>, kCueCount>& weights) {
  char buf[64];
  for (auto c : kAllCues) {
    const auto& w = weights[static_cast<std::size_t>(c)];
    for (std::size_t j = 0; j < words.size() && j < w.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.6f", w[j]);
      os << expression_id << ',' << cue_name(c) << ',' << words[j] << ',' << buf << '\n';
    }
  }
}

}  // namespace vc::language
