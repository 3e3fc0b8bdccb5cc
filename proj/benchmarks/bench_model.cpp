#include <benchmark/benchmark.h>

#include "vc/data/synth.hpp"
#include "vc/model.hpp"
#include "vc/training/losses.hpp"
#include "vc/training/trainer.hpp"

using namespace vc;

namespace {

struct World {
  data::Dataset ds;
  std::unique_ptr<Model> model;

  World(std::size_t objects, GenMode gen) {
    data::SynthConfig sc;
    sc.train_scenes = 20;
    sc.test_scenes = 0;
    sc.min_objects = sc.max_objects = objects;
    sc.min_distractors = sc.max_distractors = std::min<std::size_t>(2, objects - 1);
    ds = data::synth_world(sc).dataset;
    ModelConfig cfg;
    cfg.gen = gen;
    cfg.gen_min_count = 1;
    cfg.region_dim = ds.scenes.at(0).regions.at(0).feature.concat().size();
    auto [comp, genv] = build_vocabularies(ds.split("train"), 1);
    model = Model::create(cfg, std::move(comp), std::move(genv), 1);
  }
};

void BM_PairScores(benchmark::State& state) {
  World w(static_cast<std::size_t>(state.range(0)), GenMode::kNone);
  const auto& e = w.ds.expressions.at(0);
  const auto& scene = w.ds.scene_of(e);
  for (auto _ : state) {
    Graph g;
    const auto x = w.model->region_inputs(g, scene);
    const auto cues = w.model->encoder().build_cues(g, w.model->encode(e.tokens));
    benchmark::DoNotOptimize(w.model->head().pair_scores(g, x, cues));
  }
}
BENCHMARK(BM_PairScores)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_Forward(benchmark::State& state) {
  World w(static_cast<std::size_t>(state.range(0)), GenMode::kNone);
  const auto& e = w.ds.expressions.at(0);
  for (auto _ : state) {
    Graph g;
    benchmark::DoNotOptimize(w.model->forward(g, w.ds.scene_of(e), e).total);
  }
}
BENCHMARK(BM_Forward)->Arg(4)->Arg(8);

void BM_ForwardBackward(benchmark::State& state) {
  World w(static_cast<std::size_t>(state.range(0)), GenMode::kNone);
  const auto& e = w.ds.expressions.at(0);
  for (auto _ : state) {
    Graph g;
    const auto f = w.model->forward(g, w.ds.scene_of(e), e);
    const auto loss = training::supervised_loss(g, f.log_posterior, *e.referent);
    g.backward(loss);
    w.model->parameters().zero_grad();
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(4)->Arg(8);

void BM_TrainStep(benchmark::State& state) {
  World w(6, state.range(0) ? GenMode::kJoint : GenMode::kNone);
  training::TrainConfig tc;
  training::Trainer trainer(*w.model, w.ds, tc);
  std::uint64_t it = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(trainer.step(trainer.expression_at(it), it));
    ++it;
  }
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1);

}  // namespace
BENCHMARK_MAIN();
