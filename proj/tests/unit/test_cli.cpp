#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "run_config.hpp"
#include "support.hpp"
#include "vc/data/annotations.hpp"
#include "vc/training/checkpoint.hpp"

using namespace vc;
using namespace vc::cli;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text, "t.cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const char* kSmallRun = R"(seed = 4
[synth]
train_scenes = 12
test_scenes = 6
visual_dim = 12
[model]
embed_dim = 8
hidden = 4
decoder_hidden = 8
gen_min_count = 1
[train]
iterations = 20
log_every = 5
)";

struct Workspace {
  test::TempDir dir{"cli"};
  std::filesystem::path cfg = dir / "run.cfg";
  std::filesystem::path data = dir / "world.json";
  std::ostringstream out, err;

  Workspace() {
    std::ofstream(cfg) << kSmallRun;
    Options o;
    o.config = cfg;
    o.out = data;
    EXPECT_EQ(cmd_synth(o, out, err), kOk) << err.str();
  }
  Options base() const {
    Options o;
    o.config = cfg;
    o.data = data;
    return o;
  }
};

}  // namespace

TEST(RunConfig, DefaultTextParsesAndValidates) {
  const auto cfg = parse_run_config(default_config_text(), "default");
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.seed, 1u);
  EXPECT_EQ(cfg.synth.train_scenes, 200u);
  EXPECT_EQ(cfg.model.head, HeadKind::kVc);
  EXPECT_EQ(cfg.train.schedule.lr, 0.01);
}

TEST(RunConfig, SectionsCommentsAndListValues) {
  const auto cfg = parse_run_config(
      "seed = 9  # trailing\n[synth]\ncolors = red , blue\ntemplates = attribute, between\n[train]\nlr = 0.5\n");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.synth.seed, 9u);
  EXPECT_EQ(cfg.train.seed, 9u);
  EXPECT_EQ(cfg.synth.colors, (std::vector<std::string>{"red", "blue"}));
  EXPECT_EQ(cfg.synth.templates.size(), 2u);
  EXPECT_EQ(cfg.train.schedule.lr, 0.5);
}

TEST(RunConfig, ErrorsNameTheLine) {
  EXPECT_NE(error_of("seed = 1\n[nowhere]\n").find("t.cfg:2"), std::string::npos);
  EXPECT_NE(error_of("[model]\nsize = 3\n").find("unknown key 'size'"), std::string::npos);
  EXPECT_NE(error_of("[train]\n\niterations = many\n").find("t.cfg:3"), std::string::npos);
  EXPECT_NE(error_of("[synth\n").find("unterminated"), std::string::npos);
  EXPECT_NE(error_of("seed\n").find("key = value"), std::string::npos);
  EXPECT_FALSE(error_of("[model]\nhead = tree\n").empty());
  EXPECT_FALSE(error_of("[synth]\nuse_visdif = maybe\n").empty());
  EXPECT_FALSE(error_of("seed = -3\n").empty());
}

TEST(RunConfig, ValidateRejectsBadRanges) {
  auto cfg = parse_run_config("threshold = 1.0\n");
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = parse_run_config("[train]\nlr = 0\n");
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = parse_run_config("[model]\ndropout = 1\n");
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(RunConfig, EnvironmentSeedOverrides) {
  ::setenv("VC_SEED", "77", 1);
  const auto cfg = parse_run_config("seed = 3\n");
  ::setenv("VC_SEED", "x", 1);
  EXPECT_THROW(parse_run_config(""), ConfigError);
  ::unsetenv("VC_SEED");
  EXPECT_EQ(cfg.seed, 77u);
  EXPECT_EQ(cfg.train.seed, 77u);
  EXPECT_EQ(parse_run_config("seed = 3\n").seed, 3u);
}

TEST(Commands, ConfigPrintsDefaults) {
  std::ostringstream out, err;
  EXPECT_EQ(cmd_config({}, out, err), kOk);
  EXPECT_EQ(out.str(), default_config_text());
}

TEST(Commands, UsageAndIoExitCodes) {
  std::ostringstream out, err;
  Options o;
  EXPECT_EQ(cmd_synth(o, out, err), kUsage);  // no --out
  o.config = "/nonexistent/run.cfg";
  o.out = "/tmp/never.json";
  EXPECT_EQ(cmd_synth(o, out, err), kIo);

  Options t;
  t.data = "/nonexistent/data.json";
  t.out = "/tmp/never.ckpt";
  EXPECT_EQ(cmd_train(t, out, err), kIo);
  t.with_gen = t.with_gen_pg = true;
  EXPECT_EQ(cmd_train(t, out, err), kUsage);

  Options s;
  s.suite = "nope";
  EXPECT_EQ(cmd_oracle(s, out, err), kUsage);
  s.suite = "mil";
  EXPECT_EQ(cmd_oracle(s, out, err), kOk);
  EXPECT_NE(out.str().find("oracle mil: PASS"), std::string::npos);
}

TEST(Commands, SynthTrainEvalGenerateAndResume) {
  Workspace w;
  EXPECT_TRUE(std::filesystem::exists(w.data));
  EXPECT_NE(w.out.str().find("scenes 18"), std::string::npos) << w.out.str();

  auto t = w.base();
  t.out = w.dir / "m.ckpt";
  t.with_gen = true;
  t.iterations = 10;
  ASSERT_EQ(cmd_train(t, w.out, w.err), kOk) << w.err.str();
  EXPECT_EQ(training::load_model(w.dir / "m.ckpt").state.iteration, 10u);

  // Resume continues the iteration count and appends metrics.
  auto r = w.base();
  r.out = w.dir / "m.ckpt";
  r.checkpoint = w.dir / "m.ckpt";
  r.iterations = 20;
  ASSERT_EQ(cmd_train(r, w.out, w.err), kOk) << w.err.str();
  EXPECT_EQ(training::load_model(w.dir / "m.ckpt").state.iteration, 20u);
  std::ifstream metrics(w.dir / "m.ckpt.metrics.csv");
  std::string line;
  std::size_t header = 0, rows = 0;
  while (std::getline(metrics, line)) (line.rfind("iteration,", 0) == 0 ? header : rows) += 1;
  EXPECT_EQ(header, 1u);
  EXPECT_EQ(rows, 4u);
  // Finished checkpoints refuse to train further without more iterations.
  r.iterations = 20;
  EXPECT_EQ(cmd_train(r, w.out, w.err), kUsage);
  // And cannot switch modes.
  r.iterations = 30;
  r.with_gen_pg = true;
  EXPECT_EQ(cmd_train(r, w.out, w.err), kUsage);

  auto e = w.base();
  e.checkpoint = w.dir / "m.ckpt";
  e.out = w.dir / "eval";
  ASSERT_EQ(cmd_eval(e, w.out, w.err), kOk) << w.err.str();
  for (const char* f : {"report.csv", "grounding.csv", "context.csv", "attention.csv"})
    EXPECT_TRUE(std::filesystem::exists(w.dir / "eval" / f)) << f;

  auto g = w.base();
  g.checkpoint = w.dir / "m.ckpt";
  g.out = w.dir / "gen.csv";
  ASSERT_EQ(cmd_generate(g, w.out, w.err), kOk) << w.err.str();
  std::ifstream gen(w.dir / "gen.csv");
  std::getline(gen, line);
  EXPECT_EQ(line, "expression_id,region_id,generated_text,log_likelihood");

  auto self = w.base();
  self.self_check = true;
  self.out = w.dir / "self.csv";
  std::ostringstream sout;
  ASSERT_EQ(cmd_generate(self, sout, w.err), kOk) << w.err.str();
  EXPECT_NE(sout.str().find("BLEU-1 1.0000"), std::string::npos) << sout.str();
}

TEST(Commands, CheckpointProblemsMapToExitCodes) {
  Workspace w;
  auto e = w.base();
  e.checkpoint = w.dir / "missing.ckpt";
  EXPECT_EQ(cmd_eval(e, w.out, w.err), kIo);

  {
    std::ofstream(w.dir / "junk.ckpt", std::ios::binary) << "garbage!";
  }
  e.checkpoint = w.dir / "junk.ckpt";
  EXPECT_EQ(cmd_eval(e, w.out, w.err), kIo);

  // A plain model has no decoder; generate refuses it.
  auto t = w.base();
  t.out = w.dir / "plain.ckpt";
  t.iterations = 2;
  ASSERT_EQ(cmd_train(t, w.out, w.err), kOk) << w.err.str();
  auto g = w.base();
  g.checkpoint = w.dir / "plain.ckpt";
  EXPECT_EQ(cmd_generate(g, w.out, w.err), kUsage);

  // Evaluating on features of another width names the offending block.
  {
    std::ofstream(w.dir / "wide.cfg") << "[synth]\ntrain_scenes = 2\ntest_scenes = 2\nvisual_dim = 20\n";
  }
  Options s;
  s.config = w.dir / "wide.cfg";
  s.out = w.dir / "wide.json";
  ASSERT_EQ(cmd_synth(s, w.out, w.err), kOk);
  e.checkpoint = w.dir / "plain.ckpt";
  e.data = w.dir / "wide.json";
  std::ostringstream err;
  EXPECT_EQ(cmd_eval(e, w.out, err), kUsage);
  EXPECT_NE(err.str().find("comprehension/"), std::string::npos) << err.str();
}

TEST(Commands, DivergentTrainingExitsNumerical) {
  Workspace w;
  {
    std::ofstream(w.dir / "hot.cfg") << kSmallRun << "lr = 1e300\nclip_norm = 0\n";
  }
  auto t = w.base();
  t.config = w.dir / "hot.cfg";
  t.out = w.dir / "hot.ckpt";
  std::ostringstream err;
  EXPECT_EQ(cmd_train(t, w.out, err), kNumerical);
  EXPECT_NE(err.str().find("numerical failure"), std::string::npos) << err.str();
  EXPECT_TRUE(std::filesystem::exists(w.dir / "hot.ckpt"));
}
