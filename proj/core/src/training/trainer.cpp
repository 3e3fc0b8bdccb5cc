#include "vc/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace vc::training {

std::string mode_name(const ModelConfig& model, Objective objective) {
  std::string s = objective == Objective::kSupervised ? "supervised" : "unsupervised";
  s += "/";
  s += gen_mode_name(model.gen);
  if (model.head != HeadKind::kVc) s += std::string("/") + head_name(model.head);
  if (model.wo_reg) s += "/wo_reg";
  if (model.encoder.uniform_attention) s += "/wo_alpha";
  if (model.exclude_self) s += "/exclude_self";
  return s;
}

void write_metrics_header(std::ostream& os) { os << "iteration,mode,loss,loss_ce,baseline,lr,train_acc_window\n"; }

Trainer::Trainer(Model& model, const data::Dataset& ds, TrainConfig cfg, const TrainerSnapshot& resume)
    : model_(model), ds_(ds), cfg_(std::move(cfg)) {
  pool_ = ds_.split(cfg_.split);
  if (pool_.empty()) throw ConfigError("training split '" + cfg_.split + "' has no expressions");
  if (cfg_.objective == Objective::kSupervised)
    for (const auto* e : pool_)
      if (!e->referent)
        throw ConfigError("supervised training needs referent annotations; expression " + std::to_string(e->id) +
                          " has none (use the unsupervised objective)");
  if (cfg_.schedule.lr <= 0.0) throw ConfigError("learning rate must be positive");
  iteration_ = resume.iteration;
  baseline_ = resume.baseline;
  opt_.velocities() = resume.momentum;
}

const data::ExpressionRecord& Trainer::expression_at(std::uint64_t iteration) {
  const std::uint64_t n = pool_.size();
  const std::uint64_t epoch = iteration / n;
  if (epoch != order_epoch_) {
    order_.resize(pool_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng(derive_seed(cfg_.seed, 0, epoch));
    rng.shuffle(order_);
    order_epoch_ = epoch;
  }
  return *pool_[order_[iteration % n]];
}

namespace {
std::size_t sample(const compute::Vector& p, Rng& rng) {
  return rng.categorical(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())));
}

std::size_t argmax(const compute::Vector& v) {
  Eigen::Index k = 0;
  v.maxCoeff(&k);
  return static_cast<std::size_t>(k);
}
}  // namespace

StepResult Trainer::step(const data::ExpressionRecord& e, std::uint64_t iteration) {
  const auto& mc = model_.config();
  const data::Scene& scene = ds_.scene_of(e);
  const bool supervised = cfg_.objective == Objective::kSupervised;
  if (supervised && !e.referent) throw ConfigError("expression " + std::to_string(e.id) + " has no referent");

  auto& params = model_.parameters();
  params.zero_grad();
  Rng rng(derive_seed(cfg_.seed, 1, iteration));
  compute::Graph g;
  const auto f = model_.forward(g, scene, e, mc.gen == GenMode::kJoint);

  Var loss = supervised ? supervised_loss(g, f.log_posterior, *e.referent) : unsupervised_loss(g, f.log_posterior);
  if (cfg_.entropy_weight != 0.0)
    loss = g.sub(loss, g.scale(entropy(g, f.posterior, f.log_posterior), cfg_.entropy_weight));

  StepResult r;
  double next_baseline = baseline_;
  if (mc.gen == GenMode::kJoint) {
    const std::size_t k = supervised ? *e.referent : sample(g.value(f.posterior), rng);
    Var lc = model_.generation_loss(g, f, k, e, &rng);
    r.loss_ce = g.scalar(lc);
    loss = g.add(loss, lc);
  } else if (mc.gen == GenMode::kPolicyGradient) {
    const std::size_t k = sample(g.value(f.posterior), rng);
    Var lc = model_.generation_loss(g, f, k, e, &rng);
    r.loss_ce = g.scalar(lc);
    loss = g.add(loss, reinforce_surrogate(g, f.log_posterior, k, lc, baseline_));
    next_baseline = baseline_update(baseline_, r.loss_ce);
  }
  r.loss = g.scalar(loss);
  if (!std::isfinite(r.loss)) throw NumericalError("non-finite loss at iteration " + std::to_string(iteration));

  g.backward(loss);
  const auto all = params.all();
  if (cfg_.clip_norm > 0.0) clip_grad_norm(all, cfg_.clip_norm);
  opt_.step(all, {lr_at(iteration, cfg_.schedule), cfg_.momentum, cfg_.weight_decay});
  baseline_ = next_baseline;

  if (e.referent) {
    r.has_referent = true;
    r.correct = argmax(g.value(f.total)) == *e.referent;
  }
  return r;
}

TrainSummary Trainer::run(std::ostream* metrics, const std::function<void(const TrainerSnapshot&)>& on_checkpoint) {
  TrainSummary s;
  const std::string mode = mode_name(model_.config(), cfg_.objective);
  double loss_sum = 0.0, ce_sum = 0.0;
  std::size_t interval = 0;
  auto window_accuracy = [&] {
    if (window_.empty()) return 0.0;
    return static_cast<double>(std::count(window_.begin(), window_.end(), true)) / static_cast<double>(window_.size());
  };
  while (iteration_ < cfg_.iterations) {
    const auto& e = expression_at(iteration_);
    StepResult r;
    try {
      r = step(e, iteration_);
    } catch (const NumericalError& err) {
      s.status = TrainStatus::kNumericalFailure;
      s.diagnostic = "iteration " + std::to_string(iteration_) + ", expression " + std::to_string(e.id) + ": " +
                     err.what();
      break;
    }
    if (r.has_referent) {
      window_.push_back(r.correct);
      if (window_.size() > cfg_.accuracy_window) window_.pop_front();
    }
    loss_sum += r.loss;
    ce_sum += r.loss_ce;
    ++interval;
    const std::uint64_t done = ++iteration_;
    if (metrics && cfg_.log_every > 0 && (done % cfg_.log_every == 0 || done == cfg_.iterations)) {
      char buf[256];
      std::snprintf(buf, sizeof buf, "%llu,%s,%.6f,%.6f,%.6f,%.6g,%.4f\n", static_cast<unsigned long long>(done),
                    mode.c_str(), loss_sum / static_cast<double>(interval), ce_sum / static_cast<double>(interval),
                    baseline_, lr_at(done - 1, cfg_.schedule), window_accuracy());
      *metrics << buf;
      loss_sum = ce_sum = 0.0;
      interval = 0;
    }
    if (on_checkpoint && cfg_.checkpoint_every > 0 && done % cfg_.checkpoint_every == 0) on_checkpoint(snapshot());
  }
  s.iteration = iteration_;
  s.window_accuracy = window_accuracy();
  return s;
}

TrainerSnapshot Trainer::snapshot() const {
  TrainerSnapshot s;
  s.iteration = iteration_;
  s.baseline = baseline_;
  s.momentum = opt_.velocities();
  return s;
}

}  // namespace vc::training
