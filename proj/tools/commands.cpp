#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "run_config.hpp"
#include "vc/data/annotations.hpp"
#include "vc/data/synth.hpp"
#include "vc/errors.hpp"
#include "vc/evaluation/metrics.hpp"
#include "vc/evaluation/oracles.hpp"
#include "vc/language/encoder.hpp"
#include "vc/model.hpp"
#include "vc/training/checkpoint.hpp"
#include "vc/training/trainer.hpp"

namespace vc::cli {

namespace fs = std::filesystem;

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    for (const auto& issue : e.issues()) err << "error: " << issue << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const DimensionError& e) {
    err << "dimension error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

const fs::path& need(const std::optional<fs::path>& p, const char* flag) {
  if (!p) throw ConfigError(std::string("missing required flag ") + flag);
  return *p;
}

RunConfig resolve(const Options& o) {
  RunConfig cfg = o.config ? load_run_config(*o.config) : parse_run_config("", "<defaults>");
  if (o.seed) cfg.seed = cfg.synth.seed = cfg.train.seed = *o.seed;
  if (o.with_gen && o.with_gen_pg) throw ConfigError("--with-gen and --with-gen-pg are mutually exclusive");
  if (o.unsupervised) cfg.train.objective = training::Objective::kUnsupervised;
  if (o.with_gen) cfg.model.gen = GenMode::kJoint;
  if (o.with_gen_pg) cfg.model.gen = GenMode::kPolicyGradient;
  if (o.wo_reg) cfg.model.wo_reg = true;
  if (o.wo_alpha) cfg.model.encoder.uniform_attention = true;
  if (o.exclude_self) cfg.model.exclude_self = true;
  if (o.head) cfg.model.head = parse_head(*o.head);
  if (o.iterations) cfg.train.iterations = *o.iterations;
  if (o.threshold) cfg.threshold = *o.threshold;
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& p, std::ios::openmode mode = std::ios::out) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream os(p, mode | std::ios::binary);
  if (!os) throw IoError("cannot write " + p.string());
  return os;
}

std::size_t region_dim_of(const data::Dataset& ds) {
  for (const auto& s : ds.scenes)
    for (const auto& r : s.regions) return r.feature.concat().size();
  throw ConfigError("dataset has no regions");
}

std::string fixed(double v, int digits = 4) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

[[noreturn]] void override_error(const char* flag) {
  throw ConfigError(std::string(flag) + " cannot change the mode of a resumed checkpoint");
}

}  // namespace

int cmd_synth(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = resolve(o);
    const auto& path = need(o.out, "--out");
    if (cfg.synth.max_objects <= 1)
      err << "warning: object-count range [" << cfg.synth.min_objects << "," << cfg.synth.max_objects
          << "] has a single region per scene; context is unnecessary\n";
    const auto result = data::synth_world(cfg.synth);
    const auto& ds = result.dataset;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    data::save_annotations(ds, path);

    std::map<std::size_t, std::size_t> sizes;
    for (const auto& s : ds.scenes) ++sizes[s.regions.size()];
    out << "scenes " << ds.scenes.size() << ", expressions " << ds.expressions.size() << ", regenerated "
        << result.skipped << '\n';
    for (const auto& [name, ids] : ds.splits) out << "  split " << name << ": " << ids.size() << " expressions\n";
    for (const auto& [n, count] : sizes) out << "  " << n << " regions: " << count << " scenes\n";
    out << "  region feature dim " << region_dim_of(ds) << ", hash " << hex(data::dataset_hash(ds)) << '\n';
    out << "wrote " << path.string() << '\n';
    return kOk;
  });
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto cfg = resolve(o);
    if (o.split) cfg.train.split = *o.split;
    const auto& data_path = need(o.data, "--data");
    const auto& ckpt = need(o.out, "--out");

    std::unique_ptr<Model> model;
    training::TrainerSnapshot resume;
    training::RunMetadata meta;
    data::Dataset ds;

    if (o.checkpoint) {
      auto loaded = training::load_model(*o.checkpoint);
      const auto& mc = loaded.model->config();
      if (o.with_gen && mc.gen != GenMode::kJoint) override_error("--with-gen");
      if (o.with_gen_pg && mc.gen != GenMode::kPolicyGradient) override_error("--with-gen-pg");
      if (o.wo_reg && !mc.wo_reg) override_error("--wo-reg");
      if (o.wo_alpha && !mc.encoder.uniform_attention) override_error("--wo-alpha");
      cfg.model = mc;
      cfg.train.objective = loaded.meta.objective == "unsupervised" ? training::Objective::kUnsupervised
                                                                    : training::Objective::kSupervised;
      cfg.seed = cfg.train.seed = loaded.meta.seed;
      ds = data::load_annotations(data_path, {cfg.train.objective == training::Objective::kSupervised});
      if (data::dataset_hash(ds) != loaded.meta.dataset_hash)
        throw ConfigError("checkpoint " + o.checkpoint->string() + " was trained on a different dataset");
      training::check_compatible(*loaded.model, ds);
      model = std::move(loaded.model);
      resume = std::move(loaded.state);
      meta = loaded.meta;
    } else {
      ds = data::load_annotations(data_path, {cfg.train.objective == training::Objective::kSupervised});
      cfg.model.region_dim = region_dim_of(ds);
      auto [comp, gen] = build_vocabularies(ds.split(cfg.train.split), cfg.model.gen_min_count);
      model = Model::create(cfg.model, std::move(comp), std::move(gen), cfg.seed);
      if (cfg.embeddings) {
        const auto n = language::load_embeddings(*cfg.embeddings, model->comprehension_vocab(),
                                                 model->encoder().embedding());
        out << "loaded " << n << " pretrained embeddings\n";
      }
      meta.objective = cfg.train.objective == training::Objective::kSupervised ? "supervised" : "unsupervised";
      meta.dataset_hash = data::dataset_hash(ds);
      meta.seed = cfg.seed;
    }

    if (resume.iteration >= cfg.train.iterations)
      throw ConfigError("checkpoint is at iteration " + std::to_string(resume.iteration) +
                        ", nothing left below iterations = " + std::to_string(cfg.train.iterations));

    const auto metrics_path = fs::path(ckpt.string() + ".metrics.csv");
    const bool append = resume.iteration > 0 && fs::exists(metrics_path);
    auto metrics = open_out(metrics_path, append ? std::ios::app : std::ios::trunc);
    if (!append) training::write_metrics_header(metrics);

    out << "training " << training::mode_name(model->config(), cfg.train.objective) << " from iteration "
        << resume.iteration << " to " << cfg.train.iterations << '\n';
    training::Trainer trainer(*model, ds, cfg.train, resume);
    const auto summary = trainer.run(&metrics, [&](const training::TrainerSnapshot& s) {
      training::save_model(ckpt, *model, s, meta);
    });
    metrics.flush();
    training::save_model(ckpt, *model, trainer.snapshot(), meta);
    if (summary.status == training::TrainStatus::kNumericalFailure) {
      err << "numerical failure at iteration " << summary.iteration << ": " << summary.diagnostic << '\n'
          << "saved last good parameters to " << ckpt.string() << '\n';
      return kNumerical;
    }
    out << "done at iteration " << summary.iteration << ", window accuracy " << fixed(summary.window_accuracy)
        << "\nwrote " << ckpt.string() << " and " << metrics_path.string() << '\n';
    return kOk;
  });
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = resolve(o);
    const auto split = o.split.value_or(cfg.eval_split);
    const auto& ckpt = need(o.checkpoint, "--checkpoint");
    const auto loaded = training::load_model(ckpt);
    const auto ds = data::load_annotations(need(o.data, "--data"));
    training::check_compatible(*loaded.model, ds);

    const fs::path dir = o.out ? *o.out : fs::path(ckpt.string() + ".eval");
    fs::create_directories(dir);
    auto grounding = open_out(dir / "grounding.csv");
    auto context = open_out(dir / "context.csv");
    auto attention = open_out(dir / "attention.csv");
    evaluation::write_grounding_header(grounding);
    evaluation::write_context_header(context);
    language::write_attention_csv_header(attention);

    const auto report =
        evaluation::grounding_accuracy(*loaded.model, ds, split, cfg.threshold, {&grounding, &context, &attention});
    auto report_csv = open_out(dir / "report.csv");
    evaluation::write_report_csv(report_csv, report);

    out << "split " << split << ", head " << report.head << ": accuracy " << fixed(report.accuracy()) << " ("
        << report.correct << "/" << report.samples << ")\n";
    for (const auto& [n, b] : report.buckets)
      out << "  " << n << " regions: " << fixed(b.accuracy()) << " (" << b.correct << "/" << b.count << ")\n";
    out << "wrote " << dir.string() << "/{report,grounding,context,attention}.csv\n";
    return kOk;
  });
}

int cmd_generate(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = resolve(o);
    const auto split = o.split.value_or(cfg.eval_split);
    const auto ds = data::load_annotations(need(o.data, "--data"));

    std::unique_ptr<Model> model;
    if (!o.self_check) {
      auto loaded = training::load_model(need(o.checkpoint, "--checkpoint"));
      if (!loaded.model->decoder())
        throw ConfigError("checkpoint " + o.checkpoint->string() + " has no generation decoder parameters");
      training::check_compatible(*loaded.model, ds);
      model = std::move(loaded.model);
    }

    // References: every expression of the split naming the same region.
    std::map<std::pair<std::int64_t, std::size_t>, std::vector<std::vector<std::string>>> refs;
    const auto exprs = ds.split(split);
    for (const auto* e : exprs)
      if (e->referent) refs[{e->scene_id, *e->referent}].push_back(e->tokens);

    const fs::path path = o.out ? *o.out
                          : o.checkpoint ? fs::path(o.checkpoint->string() + ".generation.csv")
                                         : fs::path("generation.csv");
    auto csv = open_out(path);
    generation::write_generation_csv_header(csv);
    evaluation::CorpusBleu bleu(2);
    std::size_t rows = 0;
    for (const auto* e : exprs) {
      const auto& scene = ds.scene_of(*e);
      std::size_t k = 0;
      std::vector<std::string> words;
      double ll = 0.0;
      if (o.self_check) {
        if (!e->referent) continue;
        k = *e->referent;
        words = e->tokens;
      } else {
        k = e->referent ? *e->referent : predict(*model, scene, *e).scores.argmax;
        words = model->generate(scene, k, *e);
        data::ExpressionRecord gen = *e;
        gen.tokens = words;
        Graph g;
        const auto f = model->forward(g, scene, gen);
        ll = -g.scalar(model->generation_loss(g, f, k, gen, nullptr));
      }
      std::string text;
      for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
      generation::write_generation_row(csv, e->id, scene.regions[k].id, text, ll);
      ++rows;
      const auto it = refs.find({e->scene_id, k});
      if (it != refs.end()) bleu.add(words, it->second);
    }
    out << "generated " << rows << " expressions for split " << split;
    if (bleu.size() > 0)
      out << ", BLEU-1 " << fixed(bleu.score(1)) << ", BLEU-2 " << fixed(bleu.score(2)) << " over " << bleu.size()
          << " referenced rows";
    out << "\nwrote " << path.string() << '\n';
    return kOk;
  });
}

int cmd_oracle(const Options& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const std::uint64_t seed = o.seed.value_or(resolve(o).seed);
    const auto result = evaluation::run_oracle(o.suite, seed);
    for (const auto& line : result.lines) out << "  " << line << '\n';
    out << "oracle " << result.suite << ": " << (result.passed ? "PASS" : "FAIL") << '\n';
    return result.passed ? kOk : kNumerical;
  });
}

int cmd_config(const Options&, std::ostream& out, std::ostream&) {
  out << default_config_text();
  return kOk;
}

}  // namespace vc::cli
