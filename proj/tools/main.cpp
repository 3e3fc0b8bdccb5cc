#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  using namespace vc::cli;
  CLI::App app{"Variational context grounding: synthesize, train, evaluate, generate, verify"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", o.config, "key = value run configuration");
    c->add_option("--seed", o.seed, "overrides the config seed and VC_SEED");
  };
  auto modes = [&](CLI::App* c) {
    c->add_flag("--unsupervised", o.unsupervised, "train without referent annotations");
    c->add_flag("--with-gen", o.with_gen, "joint training with the generation decoder");
    c->add_flag("--with-gen-pg", o.with_gen_pg, "generation with sampled referents (policy gradient)");
    c->add_flag("--wo-reg", o.wo_reg, "score with s_theta alone");
    c->add_flag("--wo-alpha", o.wo_alpha, "uniform word attention");
    c->add_flag("--exclude-self", o.exclude_self, "drop the referent from its own context");
    c->add_option("--head", o.head, "vc, mil-maxpool or mil-noisyor");
    c->add_option("--iterations", o.iterations, "total training iterations");
  };

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset");
  common(synth);
  synth->add_option("--out", o.out, "annotation JSON path")->required();

  auto* train = app.add_subcommand("train", "train a model");
  common(train);
  modes(train);
  train->add_option("--data", o.data, "annotation JSON")->required();
  train->add_option("--out", o.out, "checkpoint path")->required();
  train->add_option("--checkpoint", o.checkpoint, "resume from this checkpoint");
  train->add_option("--split", o.split, "training split");

  auto* eval = app.add_subcommand("eval", "grounding accuracy and reports");
  common(eval);
  eval->add_option("--checkpoint", o.checkpoint, "trained checkpoint")->required();
  eval->add_option("--data", o.data, "annotation JSON")->required();
  eval->add_option("--split", o.split, "evaluation split (default test)");
  eval->add_option("--out", o.out, "report directory (default <checkpoint>.eval)");
  eval->add_option("--threshold", o.threshold, "IoU threshold (default 0.5)");

  auto* gen = app.add_subcommand("generate", "greedy expressions and BLEU");
  common(gen);
  gen->add_option("--checkpoint", o.checkpoint, "checkpoint trained with generation");
  gen->add_option("--data", o.data, "annotation JSON")->required();
  gen->add_option("--split", o.split, "split (default test)");
  gen->add_option("--out", o.out, "generation CSV path");
  gen->add_flag("--self-check", o.self_check, "score references against themselves");

  auto* oracle = app.add_subcommand("oracle", "run a property suite");
  common(oracle);
  oracle->add_option("suite", o.suite, "elbo, gradcheck, reinforce or mil")->required();

  auto* config = app.add_subcommand("config", "print the default configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (gen->parsed() && !o.self_check && !o.checkpoint) {
    std::cerr << "generate: --checkpoint is required unless --self-check is given\n";
    return kUsage;
  }
  if (synth->parsed()) return cmd_synth(o, std::cout, std::cerr);
  if (train->parsed()) return cmd_train(o, std::cout, std::cerr);
  if (eval->parsed()) return cmd_eval(o, std::cout, std::cerr);
  if (gen->parsed()) return cmd_generate(o, std::cout, std::cerr);
  if (oracle->parsed()) return cmd_oracle(o, std::cout, std::cerr);
  if (config->parsed()) return cmd_config(o, std::cout, std::cerr);
  return kUsage;
}
