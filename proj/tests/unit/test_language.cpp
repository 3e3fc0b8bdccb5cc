#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "support.hpp"
#include "vc/language/encoder.hpp"

using namespace vc;
using namespace vc::language;
using compute::Graph;

namespace {

struct Fixture {
  compute::ParameterSet params;
  LanguageEncoder enc;
  Vocabulary vocab = Vocabulary::from_words({"<pad>", "<unk>", "<s>", "</s>", "ball", "left", "of", "red", "the"});

  explicit Fixture(EncoderConfig cfg = {6, 4, false}, std::uint64_t seed = 11) {
    Rng rng(seed);
    enc = LanguageEncoder::create(params, cfg, vocab.size(), rng);
  }
};

std::vector<double> values(const Graph& g, Var v) { return test::to_std(g.value(v)); }

}  // namespace

TEST(Vocabulary, ReservedIdsComeFirst) {
  Vocabulary v;
  ASSERT_EQ(v.size(), Vocabulary::kReserved);
  EXPECT_EQ(v.id("anything"), Vocabulary::kUnk);
  EXPECT_NE(v.word(Vocabulary::kPad), v.word(Vocabulary::kUnk));
}

TEST(Vocabulary, BuildHonoursMinCountAndOrder) {
  const std::vector<std::vector<std::string>> s{{"the", "red", "ball"}, {"the", "cube"}, {"red", "the"}};
  const auto v = Vocabulary::build(s, 2);
  EXPECT_EQ(v.size(), Vocabulary::kReserved + 2);
  EXPECT_EQ(v.word(Vocabulary::kReserved), "red");
  EXPECT_EQ(v.word(Vocabulary::kReserved + 1), "the");
  EXPECT_EQ(v.id("ball"), Vocabulary::kUnk);
  EXPECT_EQ(Vocabulary::build(s, 1).size(), Vocabulary::kReserved + 4);
}

TEST(Vocabulary, EncodeTruncatesPadsAndDecodes) {
  const auto v = Vocabulary::build(std::vector<std::vector<std::string>>{{"a", "b", "c"}}, 1);
  const std::vector<std::string> words{"a", "zzz", "c", "b"};
  const auto ids = v.encode(words, 3, 5);
  ASSERT_EQ(ids.size(), 5u);
  EXPECT_EQ(ids[1], Vocabulary::kUnk);
  EXPECT_EQ(ids[3], Vocabulary::kPad);
  EXPECT_EQ(ids[4], Vocabulary::kPad);
  const std::vector<std::size_t> head(ids.begin(), ids.begin() + 3);
  EXPECT_EQ(v.decode(head)[0], "a");
  EXPECT_EQ(v.decode(head)[2], "c");
}

TEST(Vocabulary, SidecarRoundTrip) {
  test::TempDir dir("vocab");
  const auto a = Vocabulary::build(std::vector<std::vector<std::string>>{{"x", "y"}}, 1);
  const auto b = Vocabulary::build(std::vector<std::vector<std::string>>{{"p"}}, 1);
  save_vocabularies(dir / "m.vocab", a, b);
  const auto [ra, rb] = load_vocabularies(dir / "m.vocab");
  EXPECT_TRUE(ra == a);
  EXPECT_TRUE(rb == b);
  EXPECT_THROW(load_vocabularies(dir / "missing.vocab"), IoError);
}

TEST(Encoder, AttentionIsADistributionOverRealTokens) {
  Fixture f;
  Graph g;
  const std::vector<std::size_t> toks{8, 4, 5, 6, 8, 7, 4, 0, 0};
  const auto cues = f.enc.build_cues(g, toks);
  EXPECT_EQ(cues.length, 7u);
  for (auto c : kAllCues) {
    const auto a = values(g, cues.attention(c));
    ASSERT_EQ(a.size(), toks.size());
    double total = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      EXPECT_GE(a[j], 0.0);
      if (toks[j] == Vocabulary::kPad) {
        EXPECT_EQ(a[j], 0.0);
      }
      total += a[j];
    }
    EXPECT_NEAR(total, 1.0, 1e-12) << cue_name(c);
  }
}

TEST(Encoder, SingleTokenGetsAllTheWeight) {
  Fixture f;
  Graph g;
  const std::vector<std::size_t> toks{4};
  const auto cues = f.enc.build_cues(g, toks);
  const auto w = f.enc.embedding().value.values();
  const std::size_t d = f.enc.config().embed_dim;
  for (auto c : kAllCues) {
    EXPECT_DOUBLE_EQ(values(g, cues.attention(c))[0], 1.0);
    const auto y = values(g, cues[c]);
    for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(y[k], w[4 * d + k], 1e-12);
  }
}

TEST(Encoder, UniformAblationFixesWeights) {
  Fixture f({6, 4, true});
  Graph g;
  const std::vector<std::size_t> toks{8, 7, 4, 0};
  const auto cues = f.enc.build_cues(g, toks);
  for (auto c : kAllCues) {
    const auto a = values(g, cues.attention(c));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(a[j], 1.0 / 3.0, 1e-12);
    EXPECT_EQ(a[3], 0.0);
  }
}

TEST(Encoder, CueIsTheAttendedMixOfWordEmbeddings) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    Fixture f({5, 3, false}, 100 + static_cast<std::uint64_t>(trial));
    const std::size_t len = static_cast<std::size_t>(rng.integer(1, 10));
    std::vector<std::size_t> toks(len);
    for (auto& t : toks) t = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(f.vocab.size()) - 1));
    Graph g;
    const auto cues = f.enc.build_cues(g, toks);
    const auto& w = f.enc.embedding().value.values();
    const std::size_t d = 5;
    for (auto c : kAllCues) {
      const auto a = values(g, cues.attention(c));
      const auto y = values(g, cues[c]);
      for (std::size_t k = 0; k < d; ++k) {
        double mix = 0, lo = 1e300, hi = -1e300;
        for (std::size_t j = 0; j < len; ++j) {
          const double wj = w[toks[j] * d + k];
          mix += a[j] * wj;
          lo = std::min(lo, wj);
          hi = std::max(hi, wj);
        }
        EXPECT_NEAR(y[k], mix, 1e-12);
        EXPECT_GE(y[k], lo - 1e-12);
        EXPECT_LE(y[k], hi + 1e-12);
      }
    }
  }
}

TEST(Encoder, TrailingPadsDoNotChangeCues) {
  Fixture f;
  Graph g1, g2;
  const std::vector<std::size_t> bare{8, 7, 4};
  const std::vector<std::size_t> padded{8, 7, 4, 0, 0, 0};
  const auto a = f.enc.build_cues(g1, bare);
  const auto b = f.enc.build_cues(g2, padded);
  for (auto c : kAllCues) {
    const auto ya = values(g1, a[c]);
    const auto yb = values(g2, b[c]);
    for (std::size_t k = 0; k < ya.size(); ++k) EXPECT_NEAR(ya[k], yb[k], 1e-12);
  }
}

TEST(Encoder, HiddenWidthAndAllPadInput) {
  Fixture f;
  EXPECT_EQ(f.enc.hidden_dim(), 16u);
  Graph g;
  const std::vector<std::size_t> toks{4, 5};
  const auto emb = f.enc.embed(g, toks);
  const auto h = f.enc.encode(g, emb);
  ASSERT_EQ(h.size(), 2u);
  EXPECT_EQ(g.dim(h[0]), 16u);
  const std::vector<std::size_t> pads{0, 0};
  EXPECT_THROW(f.enc.build_cues(g, pads), DomainError);
}

TEST(Encoder, GradientReachesEmbeddings) {
  Fixture f;
  Graph g;
  const std::vector<std::size_t> toks{8, 4};
  const auto cues = f.enc.build_cues(g, toks);
  g.backward(g.sum(cues[Cue::kR1]));
  const auto& grad = f.enc.embedding().grad.values();
  const std::size_t d = f.enc.config().embed_dim;
  double used = 0, unused = 0;
  for (std::size_t k = 0; k < d; ++k) {
    used += std::abs(grad[4 * d + k]);
    unused += std::abs(grad[5 * d + k]);
  }
  EXPECT_GT(used, 0.0);
  EXPECT_EQ(unused, 0.0);
}

TEST(AttentionCsv, SixDecimalsAndNoPads) {
  std::ostringstream os;
  write_attention_csv_header(os);
  std::array<std::vector<double>, kCueCount> w;
  for (auto& v : w) v = {0.25, 0.75, 0.0};
  const std::vector<std::string> words{"red", "ball"};
  write_attention_csv(os, 7, words, w);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "expression_id,cue,token,weight");
  std::getline(in, line);
  EXPECT_EQ(line, std::string("7,") + cue_name(Cue::kC1) + ",red,0.250000");
  std::size_t rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, kCueCount * words.size());
}

TEST(Embeddings, LoadsKnownWordsAndChecksWidth) {
  Fixture f;
  test::TempDir dir("emb");
  {
    std::ofstream out(dir / "e.txt");
    out << "ball 1 2 3 4 5 6\nzebra 0 0 0 0 0 0\nred 6 5 4 3 2 1\n";
  }
  EXPECT_EQ(load_embeddings(dir / "e.txt", f.vocab, f.enc.embedding()), 2u);
  const auto& w = f.enc.embedding().value.values();
  EXPECT_EQ(w[4 * 6 + 0], 1.0);
  EXPECT_EQ(w[7 * 6 + 5], 1.0);
  {
    std::ofstream out(dir / "bad.txt");
    out << "ball 1 2 3\n";
  }
  EXPECT_THROW(load_embeddings(dir / "bad.txt", f.vocab, f.enc.embedding()), DimensionError);
  EXPECT_THROW(load_embeddings(dir / "none.txt", f.vocab, f.enc.embedding()), IoError);
}
