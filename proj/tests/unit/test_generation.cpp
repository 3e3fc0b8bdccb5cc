#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "support.hpp"
#include "vc/compute/optimizer.hpp"
#include "vc/generation/decoder.hpp"

using namespace vc;
using namespace vc::generation;
using compute::Vector;

namespace {

struct Speaker {
  ParameterSet ps;
  Vocabulary comp = Vocabulary::from_words({"<pad>", "<unk>", "<s>", "</s>", "ball", "left", "red", "the"});
  Vocabulary gen = Vocabulary::from_words({"<pad>", "<unk>", "<s>", "</s>", "ball", "red", "the"});
  ExpressionDecoder dec;

  explicit Speaker(std::size_t region_dim = 3, std::uint64_t seed = 4) {
    Rng rng(seed);
    auto& emb = ps.add("language/embedding", {comp.size(), 5}, compute::Init::kXavier, rng);
    DecoderConfig cfg;
    cfg.region_dim = region_dim;
    cfg.embed_dim = 5;
    cfg.hidden = 8;
    dec = ExpressionDecoder::create(ps, cfg, emb, gen.size(), rng);
  }
  Parameter& embedding() { return ps.at("language/embedding"); }
};

std::vector<std::string> words(std::initializer_list<const char*> w) { return {w.begin(), w.end()}; }

}  // namespace

TEST(Sequence, StartStopAndTwoVocabularies) {
  Speaker s;
  const auto w = words({"the", "left", "ball"});
  const auto seq = make_sequence(w, s.comp, s.gen);
  EXPECT_EQ(seq.inputs, (std::vector<std::size_t>{Vocabulary::kStart, s.comp.id("the"), s.comp.id("left"), s.comp.id("ball")}));
  EXPECT_EQ(seq.targets, (std::vector<std::size_t>{s.gen.id("the"), Vocabulary::kUnk, s.gen.id("ball"), Vocabulary::kStop}));
}

TEST(Sequence, TruncatesSoStopFits) {
  Speaker s;
  std::vector<std::string> w(30, "ball");
  const auto seq = make_sequence(w, s.comp, s.gen, 20);
  EXPECT_EQ(seq.targets.size(), 20u);
  EXPECT_EQ(seq.targets.back(), Vocabulary::kStop);
  EXPECT_THROW(make_sequence(w, s.comp, s.gen, 0), ConfigError);
}

TEST(JointAttention, UniformGammaNormalizesBeta) {
  Speaker s(2);
  for (const char* n : {"generation/gamma/w", "generation/gamma/b"}) s.ps.at(n).value.fill(0.0);
  Graph g;
  std::vector<Var> x{g.constant(test::vec({1, 0})), g.constant(test::vec({0, 1}))};
  const auto [phi, z] = s.dec.joint_attention(g, 0, x, g.constant(test::vec({0.5, 0.5})));
  // beta * gamma = [1/4, 1/4]; l2norm divides by its norm plus 1e-8.
  const double h = 0.25 / (std::sqrt(0.125) + 1e-8);
  EXPECT_NEAR(g.value(phi)[0], h, 1e-15);
  EXPECT_NEAR(g.value(phi)[1], h, 1e-15);
  EXPECT_NEAR(g.value(z)[0], h, 1e-15);
  EXPECT_NEAR(g.value(z)[1], h, 1e-15);

  const auto [phi1, z1] = s.dec.joint_attention(g, 1, x, g.constant(test::vec({1.0, 0.0})));
  const double one = 0.5 / (0.5 + 1e-8);
  EXPECT_NEAR(g.value(phi1)[0], one, 1e-15);
  EXPECT_EQ(g.value(phi1)[1], 0.0);
  EXPECT_NEAR(g.value(z1)[0], one, 1e-15);
}

TEST(JointAttention, UnitNormAndMatchingReference) {
  Speaker s(3, 9);
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.integer(1, 6));
    Graph g;
    std::vector<Var> x;
    std::vector<Vector> xs;
    for (std::size_t j = 0; j < n; ++j) {
      xs.push_back(test::vec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}));
      x.push_back(g.constant(xs.back()));
    }
    Vector beta(static_cast<Eigen::Index>(n));
    for (auto& b : beta) b = rng.uniform(0.01, 1.0);
    beta /= beta.sum();
    const std::size_t i = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(n) - 1));
    const auto [phi, z] = s.dec.joint_attention(g, i, x, g.constant(beta));

    const auto& w = s.ps.at("generation/gamma/w").value.values();
    const double b = s.ps.at("generation/gamma/b").value[0];
    Vector gamma(static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
      double l = b;
      for (Eigen::Index d = 0; d < 3; ++d) l += w[static_cast<std::size_t>(d)] * xs[i][d] + w[3 + static_cast<std::size_t>(d)] * xs[j][d];
      gamma[static_cast<Eigen::Index>(j)] = std::exp(l);
    }
    gamma /= gamma.sum();
    Vector p = beta.cwiseProduct(gamma);
    const double pn = p.norm();
    p /= pn + 1e-8;
    EXPECT_NEAR(g.value(phi).norm(), pn / (pn + 1e-8), 1e-12);
    EXPECT_LT((g.value(phi) - p).norm(), 1e-12);
    Vector zr = Vector::Zero(3);
    for (std::size_t j = 0; j < n; ++j) zr += p[static_cast<Eigen::Index>(j)] * xs[j];
    EXPECT_LT((g.value(z) - zr).norm(), 1e-12);
  }
}

TEST(Decoder, ZeroOutputLayerIsUniform) {
  Speaker s;
  s.ps.at("generation/out/w").value.fill(0.0);
  s.ps.at("generation/out/b").value.fill(0.0);
  Graph g;
  const Var x = g.constant(test::vec({1, 2, 3}));
  const auto seq = make_sequence(words({"the", "red", "ball"}), s.comp, s.gen);
  const double emit = static_cast<double>(s.gen.size() - 2);  // pad and start are never emitted
  EXPECT_NEAR(g.scalar(s.dec.log_likelihood(g, x, x, x, seq)), -4.0 * std::log(emit), 1e-12);
  const auto steps = s.dec.step_log_probs(g, x, x, x, seq);
  for (const auto& st : steps) {
    EXPECT_EQ(g.value(st)[Vocabulary::kPad], 0.0);
    EXPECT_EQ(g.value(st)[Vocabulary::kStart], 0.0);
  }
}

TEST(Decoder, LikelihoodIsAtMostOneAndLossIsItsNegation) {
  Speaker s;
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    Graph g;
    const Var x = g.constant(test::vec({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)}));
    const auto seq = make_sequence(words({"the", "red", "ball"}), s.comp, s.gen);
    const double ll = g.scalar(s.dec.log_likelihood(g, x, x, x, seq));
    EXPECT_LE(ll, 0.0);
    EXPECT_NEAR(g.scalar(s.dec.ce_loss(g, x, x, x, seq)), -ll, 1e-15);
  }
}

TEST(Decoder, RejectsBadSequencesAndTargets) {
  Speaker s;
  Graph g;
  const Var x = g.constant(test::vec({1, 2, 3}));
  TokenSequence bad{{Vocabulary::kStart}, {}};
  EXPECT_THROW(s.dec.log_likelihood(g, x, x, x, bad), DimensionError);
  TokenSequence pad{{Vocabulary::kStart}, {Vocabulary::kPad}};
  EXPECT_THROW(s.dec.log_likelihood(g, x, x, x, pad), DomainError);
  TokenSequence longer{std::vector<std::size_t>(21, 4), std::vector<std::size_t>(21, 4)};
  EXPECT_THROW(s.dec.log_likelihood(g, x, x, x, longer), DomainError);
}

TEST(Decoder, WordInputsShareTheComprehensionEmbedding) {
  Speaker s;
  Graph g;
  const Var x = g.constant(test::vec({1, 2, 3}));
  const auto seq = make_sequence(words({"the", "red"}), s.comp, s.gen);
  g.backward(s.dec.ce_loss(g, x, x, x, seq));
  const auto& grad = s.embedding().grad.values();
  auto row_norm = [&](std::size_t r) {
    double n = 0;
    for (std::size_t k = 0; k < 5; ++k) n += std::abs(grad[r * 5 + k]);
    return n;
  };
  EXPECT_GT(row_norm(Vocabulary::kStart), 0.0);
  EXPECT_GT(row_norm(s.comp.id("red")), 0.0);
  EXPECT_EQ(row_norm(s.comp.id("ball")), 0.0);
  EXPECT_EQ(s.ps.find("generation/embedding"), nullptr);
}

TEST(Decoder, GreedyOutputIsBoundedAndClean) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Speaker s(3, seed);
    // Bias the stop word away so decoding runs to the step limit.
    s.ps.at("generation/out/b").value[Vocabulary::kStop] = -50.0;
    s.ps.at("generation/out/b").value[Vocabulary::kPad] = 50.0;
    Graph g;
    const Var x = g.constant(test::vec({0.3, -0.2, 0.9}));
    const auto out = s.dec.generate(g, x, x, x, s.comp, s.gen);
    EXPECT_EQ(out.size(), 20u);
    for (auto id : out) {
      EXPECT_NE(id, Vocabulary::kPad);
      EXPECT_NE(id, Vocabulary::kStart);
      EXPECT_NE(id, Vocabulary::kStop);
    }
  }
}

TEST(Decoder, OverfitsASingleExpression) {
  Speaker s(3, 2);
  const auto target = words({"the", "red", "ball"});
  const auto seq = make_sequence(target, s.comp, s.gen);
  compute::SgdMomentum opt;
  const auto params = s.ps.all();
  const Vector xv = test::vec({0.5, -0.5, 0.25});
  double loss = 0;
  for (int it = 0; it < 400; ++it) {
    s.ps.zero_grad();
    Graph g;
    const Var x = g.constant(xv);
    Var l = s.dec.ce_loss(g, x, x, x, seq);
    loss = g.scalar(l);
    g.backward(l);
    opt.step(params, {0.05, 0.9, 0.0});
  }
  EXPECT_LT(loss, 0.05);
  Graph g;
  const Var x = g.constant(xv);
  EXPECT_EQ(s.gen.decode(s.dec.generate(g, x, x, x, s.comp, s.gen)), target);
}

TEST(GenerationCsv, QuotesAndSixDecimals) {
  std::ostringstream os;
  write_generation_csv_header(os);
  write_generation_row(os, 3, 1, "the red ball", -1.5);
  write_generation_row(os, 4, 2, "a, \"b\"", -0.1234567);
  EXPECT_EQ(os.str(),
            "expression_id,region_id,generated_text,log_likelihood\n"
            "3,1,the red ball,-1.500000\n"
            "4,2,\"a, \"\"b\"\"\",-0.123457\n");
}

TEST(Model, JointModelGenerationLossReachesSharedEmbedding) {
  Rng rng(1);
  data::Scene scene = test::toy_scene(0, 4, 5, rng);
  data::ExpressionRecord e;
  e.id = 0;
  e.tokens = words({"the", "red", "ball"});
  e.referent = 2;
  const std::vector<const data::ExpressionRecord*> all{&e};
  auto [cv, gv] = build_vocabularies(all, 1);
  auto cfg = test::tiny_config(scene.regions[0].feature.concat().size());
  cfg.gen = GenMode::kJoint;
  auto model = Model::create(cfg, cv, gv, 7);
  ASSERT_NE(model->decoder(), nullptr);
  Graph g;
  const auto f = model->forward(g, scene, e, true);
  ASSERT_TRUE(f.s_psi.has_value());
  for (Eigen::Index k = 0; k < 4; ++k) {
    EXPECT_GT(g.value(*f.s_psi)[k], 0.0);
    EXPECT_LE(g.value(*f.s_psi)[k], 1.0);
  }
  g.backward(model->generation_loss(g, f, 2, e, nullptr));
  double n = 0;
  for (double v : model->parameters().at("language/embedding").grad.values()) n += std::abs(v);
  EXPECT_GT(n, 0.0);
  const auto out = model->generate(scene, 2, e);
  EXPECT_LE(out.size(), 20u);
}
