#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vc/comprehension/grounding.hpp"
#include "vc/data/dataset.hpp"
#include "vc/generation/decoder.hpp"
#include "vc/language/encoder.hpp"

namespace vc {

using compute::Graph;
using compute::Var;
using language::Vocabulary;

// Aggregation placed on top of the pairwise context scores.
enum class HeadKind { kVc, kMilMaxPool, kMilNoisyOr };
enum class GenMode { kNone, kJoint, kPolicyGradient };

const char* head_name(HeadKind h);
HeadKind parse_head(const std::string& s);
const char* gen_mode_name(GenMode m);
GenMode parse_gen_mode(const std::string& s);

struct ModelConfig {
  language::EncoderConfig encoder;  // uniform_attention is the w/o alpha ablation
  std::size_t region_dim = 0;
  bool exclude_self = false;
  bool wo_reg = false;
  HeadKind head = HeadKind::kVc;
  GenMode gen = GenMode::kNone;
  std::size_t decoder_hidden = 128;
  double dropout = 0.3;
  std::size_t gen_min_count = 5;

  // Rejects combinations the model cannot wire (throws ConfigError).
  void validate() const;
  bool has_decoder() const { return gen != GenMode::kNone; }
};

// Floor used for noisy-or and other log computations.
inline constexpr double kLogFloor = 1e-12;

// Graph outputs for one (scene, expression) pair.
struct Forward {
  language::CueFeatures cues;
  std::vector<Var> x;
  Var image;
  comprehension::GroundingVars vars;         // VC head only
  std::vector<std::vector<Var>> pair;        // pairwise context scores (all heads)
  std::optional<Var> s_psi;                  // per-region s_psi in [0, 1], S' only
  Var total;
  Var log_posterior;
  Var posterior;
};

class Model {
 public:
  // Builds fresh parameters; the initialization stream is seeded by `seed`.
  static std::unique_ptr<Model> create(const ModelConfig& cfg, Vocabulary comprehension, Vocabulary generation,
                                       std::uint64_t seed);
  // Takes ownership of existing parameters (e.g. loaded from a checkpoint).
  static std::unique_ptr<Model> bind(const ModelConfig& cfg, Vocabulary comprehension, Vocabulary generation,
                                     compute::ParameterSet params);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const { return cfg_; }
  compute::ParameterSet& parameters() { return params_; }
  const compute::ParameterSet& parameters() const { return params_; }
  const Vocabulary& comprehension_vocab() const { return comp_vocab_; }
  const Vocabulary& generation_vocab() const { return gen_vocab_; }
  const language::LanguageEncoder& encoder() const { return encoder_; }
  const comprehension::GroundingHead& head() const { return head_; }
  const generation::ExpressionDecoder* decoder() const { return decoder_ ? &*decoder_ : nullptr; }

  // Comprehension ids, truncated to the maximum sentence length.
  std::vector<std::size_t> encode(const std::vector<std::string>& words) const;

  // Region features and global feature as graph constants.
  std::vector<Var> region_inputs(Graph& g, const data::Scene& scene) const;

  // Builds every score for the pair. With `with_psi` a joint-generation model
  // scores with S' (teacher-forced, no dropout); otherwise it uses the
  // comprehension-only rule s_theta - s_phi + s_omega'.
  Forward forward(Graph& g, const data::Scene& scene, const data::ExpressionRecord& expr, bool with_psi = false) const;

  // L_c for region k with its joint-attention context.
  Var generation_loss(Graph& g, const Forward& f, std::size_t k, const data::ExpressionRecord& expr,
                      Rng* dropout_rng) const;

  // Greedy expression for region k of the scene.
  std::vector<std::string> generate(const data::Scene& scene, std::size_t k, const data::ExpressionRecord& expr) const;

 private:
  Model() = default;
  void wire();
  generation::TokenSequence sequence(const data::ExpressionRecord& expr) const;
  // z_hat for region k from the context distribution of the forward pass.
  Var z_hat(Graph& g, const Forward& f, std::size_t k) const;

  ModelConfig cfg_;
  compute::ParameterSet params_;
  Vocabulary comp_vocab_, gen_vocab_;
  language::LanguageEncoder encoder_;
  comprehension::GroundingHead head_;
  comprehension::AssociationScorer mil_phi_;
  std::optional<generation::ExpressionDecoder> decoder_;
};

// Plain values of one forward pass, for reports.
struct Prediction {
  comprehension::GroundingScores scores;
  std::array<std::vector<double>, language::kCueCount> attention;
};

Prediction predict(const Model& model, const data::Scene& scene, const data::ExpressionRecord& expr);

// Vocabularies from the words of the given expressions: comprehension keeps
// every word, generation keeps words seen at least `gen_min_count` times.
std::pair<Vocabulary, Vocabulary> build_vocabularies(const std::vector<const data::ExpressionRecord*>& expressions,
                                                     std::size_t gen_min_count);

}  // namespace vc
