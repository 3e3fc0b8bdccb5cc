#include "vc/model.hpp"

namespace vc {

using comprehension::ScoreMode;
using language::Cue;

const char* head_name(HeadKind h) {
  switch (h) {
    case HeadKind::kVc: return "vc";
    case HeadKind::kMilMaxPool: return "mil-maxpool";
    case HeadKind::kMilNoisyOr: return "mil-noisyor";
  }
  return "?";
}

HeadKind parse_head(const std::string& s) {
  if (s == "vc") return HeadKind::kVc;
  if (s == "mil-maxpool" || s == "maxpool") return HeadKind::kMilMaxPool;
  if (s == "mil-noisyor" || s == "noisyor") return HeadKind::kMilNoisyOr;
  throw ConfigError("unknown head '" + s + "' (expected vc, mil-maxpool or mil-noisyor)");
}

const char* gen_mode_name(GenMode m) {
  switch (m) {
    case GenMode::kNone: return "plain";
    case GenMode::kJoint: return "with_generation";
    case GenMode::kPolicyGradient: return "with_generation_pg";
  }
  return "?";
}

GenMode parse_gen_mode(const std::string& s) {
  if (s == "plain" || s == "none") return GenMode::kNone;
  if (s == "with_generation" || s == "joint") return GenMode::kJoint;
  if (s == "with_generation_pg" || s == "pg") return GenMode::kPolicyGradient;
  throw ConfigError("unknown generation mode '" + s + "' (expected plain, with_generation or with_generation_pg)");
}

void ModelConfig::validate() const {
  if (region_dim == 0) throw ConfigError("region_dim must be positive");
  if (encoder.embed_dim == 0 || encoder.hidden == 0) throw ConfigError("encoder dimensions must be positive");
  if (has_decoder() && decoder_hidden == 0) throw ConfigError("decoder_hidden must be positive");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  if (head != HeadKind::kVc && has_decoder())
    throw ConfigError("generation needs the context distribution of the vc head");
  if (head != HeadKind::kVc && wo_reg) throw ConfigError("wo_reg applies to the vc head only");
  if (wo_reg && gen == GenMode::kJoint)
    throw ConfigError("wo_reg cannot be combined with with_generation (S' is built from the regularization terms)");
}

std::unique_ptr<Model> Model::create(const ModelConfig& cfg, Vocabulary comprehension, Vocabulary generation,
                                     std::uint64_t seed) {
  cfg.validate();
  std::unique_ptr<Model> m(new Model);
  m->cfg_ = cfg;
  m->comp_vocab_ = std::move(comprehension);
  m->gen_vocab_ = std::move(generation);
  Rng rng(seed);
  auto& p = m->params_;
  language::LanguageEncoder::create(p, cfg.encoder, m->comp_vocab_.size(), rng);
  if (cfg.head == HeadKind::kVc) {
    comprehension::GroundingHead::create(
        p, {cfg.region_dim, cfg.encoder.embed_dim, cfg.exclude_self, cfg.gen == GenMode::kJoint}, rng);
  } else {
    comprehension::AssociationScorer::create(p, "comprehension/phi", cfg.region_dim, cfg.encoder.embed_dim, rng);
  }
  if (cfg.has_decoder())
    generation::ExpressionDecoder::create(p, {cfg.region_dim, cfg.encoder.embed_dim, cfg.decoder_hidden, cfg.dropout},
                                          p.at("language/embedding"), m->gen_vocab_.size(), rng);
  m->wire();
  return m;
}

std::unique_ptr<Model> Model::bind(const ModelConfig& cfg, Vocabulary comprehension, Vocabulary generation,
                                   compute::ParameterSet params) {
  cfg.validate();
  std::unique_ptr<Model> m(new Model);
  m->cfg_ = cfg;
  m->comp_vocab_ = std::move(comprehension);
  m->gen_vocab_ = std::move(generation);
  m->params_ = std::move(params);
  m->wire();
  return m;
}

void Model::wire() {
  auto& p = params_;
  encoder_ = language::LanguageEncoder::bind(p, cfg_.encoder, comp_vocab_.size());
  if (cfg_.head == HeadKind::kVc)
    head_ = comprehension::GroundingHead::bind(
        p, {cfg_.region_dim, cfg_.encoder.embed_dim, cfg_.exclude_self, cfg_.gen == GenMode::kJoint});
  else
    mil_phi_ = comprehension::AssociationScorer::bind(p, "comprehension/phi", cfg_.region_dim, cfg_.encoder.embed_dim);
  if (cfg_.has_decoder())
    decoder_ = generation::ExpressionDecoder::bind(
        p, {cfg_.region_dim, cfg_.encoder.embed_dim, cfg_.decoder_hidden, cfg_.dropout}, p.at("language/embedding"),
        gen_vocab_.size());
}

std::vector<std::size_t> Model::encode(const std::vector<std::string>& words) const {
  return comp_vocab_.encode(words, data::kMaxTokens);
}

std::vector<Var> Model::region_inputs(Graph& g, const data::Scene& scene) const {
  if (scene.regions.empty()) throw DomainError("scene " + std::to_string(scene.id) + " has no regions");
  std::vector<Var> x;
  x.reserve(scene.regions.size());
  for (const auto& r : scene.regions) {
    const auto v = r.feature.concat();
    if (v.size() != cfg_.region_dim)
      throw DimensionError("scene " + std::to_string(scene.id) + " region " + std::to_string(r.id) +
                           ": feature extent " + std::to_string(v.size()) + ", model expects " +
                           std::to_string(cfg_.region_dim));
    x.push_back(g.constant(std::span<const double>(v)));
  }
  return x;
}

generation::TokenSequence Model::sequence(const data::ExpressionRecord& expr) const {
  return generation::make_sequence(expr.tokens, comp_vocab_, gen_vocab_, decoder_->config().max_steps);
}

Var Model::z_hat(Graph& g, const Forward& f, std::size_t k) const {
  if (!decoder_) throw ConfigError("model has no generation decoder");
  if (k >= f.x.size()) throw DomainError("region index out of range");
  return decoder_->joint_attention(g, k, f.x, f.vars.beta[k]).second;
}

Forward Model::forward(Graph& g, const data::Scene& scene, const data::ExpressionRecord& expr, bool with_psi) const {
  Forward f;
  const auto ids = encode(expr.tokens);
  if (ids.empty()) throw DomainError("expression " + std::to_string(expr.id) + " has no tokens");
  f.cues = encoder_.build_cues(g, ids);
  f.x = region_inputs(g, scene);
  if (scene.global_feature.size() != cfg_.region_dim)
    throw DimensionError("scene " + std::to_string(scene.id) + ": global feature has the wrong extent");
  f.image = g.constant(std::span<const double>(scene.global_feature));
  const std::size_t n = f.x.size();

  if (cfg_.head == HeadKind::kVc) {
    f.vars = head_.forward(g, f.x, f.cues);
    f.pair = f.vars.pair;
    if (cfg_.wo_reg) {
      f.total = head_.total_score(g, f.vars, ScoreMode::kWoReg);
    } else if (cfg_.gen == GenMode::kJoint) {
      if (with_psi) {
        const auto seq = sequence(expr);
        std::vector<Var> psi(n);
        for (std::size_t i = 0; i < n; ++i)
          psi[i] = decoder_->log_likelihood(g, f.x[i], z_hat(g, f, i), f.image, seq, nullptr);
        f.s_psi = g.exp(g.concat(psi));  // the likelihood itself, not its log
        f.total = head_.total_score(g, f.vars, ScoreMode::kWithGeneration, f.s_psi);
      } else {
        f.total = g.add(g.sub(f.vars.s_theta, f.vars.s_phi), f.vars.s_omega_prime);
      }
    } else {
      f.total = head_.total_score(g, f.vars, ScoreMode::kPlain);
    }
  } else {
    f.pair = mil_phi_.all_pairs(g, f.x, f.cues[Cue::kC1], f.cues[Cue::kC2]);
    std::vector<Var> score(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Var> row;
      for (std::size_t j = 0; j < n; ++j)
        if (!(cfg_.exclude_self && n > 1 && j == i)) row.push_back(f.pair[i][j]);
      Var s = g.concat(row);
      score[i] = cfg_.head == HeadKind::kMilMaxPool ? g.log_sigmoid(g.max(s)) : g.noisy_or_log(g.sigmoid(s), kLogFloor);
    }
    f.total = g.concat(score);
  }
  f.log_posterior = g.log_softmax(f.total);
  f.posterior = g.softmax(f.total);
  return f;
}

Var Model::generation_loss(Graph& g, const Forward& f, std::size_t k, const data::ExpressionRecord& expr,
                           Rng* dropout_rng) const {
  if (!decoder_) throw ConfigError("model has no generation decoder");
  return decoder_->ce_loss(g, f.x[k], z_hat(g, f, k), f.image, sequence(expr), dropout_rng);
}

std::vector<std::string> Model::generate(const data::Scene& scene, std::size_t k,
                                         const data::ExpressionRecord& expr) const {
  if (!decoder_) throw ConfigError("model has no generation decoder");
  Graph g;
  const auto f = forward(g, scene, expr);
  const auto ids = decoder_->generate(g, f.x[k], z_hat(g, f, k), f.image, comp_vocab_, gen_vocab_);
  std::vector<std::string> words;
  for (auto id : ids) words.push_back(gen_vocab_.word(id));
  return words;
}

Prediction predict(const Model& model, const data::Scene& scene, const data::ExpressionRecord& expr) {
  Graph g;
  const auto f = model.forward(g, scene, expr);
  Prediction p;
  p.scores = comprehension::extract_scores(g, f.vars, f.total, f.s_psi, f.posterior);
  for (auto c : language::kAllCues) {
    const auto& a = g.value(f.cues.attention(c));
    p.attention[static_cast<std::size_t>(c)].assign(a.data(), a.data() + a.size());
  }
  return p;
}

std::pair<Vocabulary, Vocabulary> build_vocabularies(const std::vector<const data::ExpressionRecord*>& expressions,
                                                     std::size_t gen_min_count) {
  std::vector<std::vector<std::string>> sentences;
  sentences.reserve(expressions.size());
  for (const auto* e : expressions) sentences.push_back(e->tokens);
  return {Vocabulary::build(sentences, 1), Vocabulary::build(sentences, gen_min_count)};
}

}  // namespace vc
