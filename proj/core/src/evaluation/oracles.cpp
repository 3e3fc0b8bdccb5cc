#include "vc/evaluation/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "vc/compute/grad_check.hpp"
#include "vc/compute/lstm.hpp"
#include "vc/evaluation/elbo.hpp"
#include "vc/evaluation/mil.hpp"
#include "vc/model.hpp"
#include "vc/training/losses.hpp"

namespace vc::evaluation {

using compute::Graph;
using compute::Parameter;
using compute::ParameterSet;
using compute::Var;
using compute::Vector;

namespace {
std::string fmt(const char* f, double a, double b = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}
}  // namespace

void SuiteResult::check(bool ok, const std::string& line) {
  passed = passed && ok;
  lines.push_back(std::string(ok ? "PASS " : "FAIL ") + line);
}

// ---------------------------------------------------------------- elbo

SuiteResult run_elbo_suite(std::uint64_t seed, std::size_t toys) {
  SuiteResult r{"elbo", true, {}};
  Rng rng(seed);
  double worst_bound = -INFINITY, worst_kl = INFINITY, worst_gap = 0.0;
  std::size_t cases = 0;
  for (std::size_t t = 0; t < toys; ++t) {
    auto toy = random_toy(rng);
    for (std::size_t x = 0; x < toy.n; ++x) {
      const auto e = elbo_oracle(toy, x);
      if (std::isfinite(e.elbo)) worst_bound = std::max(worst_bound, e.elbo - e.log_marginal);
      worst_kl = std::min(worst_kl, e.kl);
      ++cases;
    }
    toy.set_exact_posterior();
    for (std::size_t x = 0; x < toy.n; ++x) {
      const auto e = elbo_oracle(toy, x);
      if (std::isfinite(e.log_marginal)) worst_gap = std::max(worst_gap, std::fabs(e.elbo - e.log_marginal));
    }
  }
  r.check(worst_bound <= kElboTolerance,
          fmt("elbo <= log marginal over %.0f referent cases; worst elbo - log marginal = %.3e", double(cases),
              worst_bound));
  r.check(worst_kl >= -kElboTolerance, fmt("kl >= 0; smallest kl = %.3e", worst_kl));
  r.check(worst_gap <= kElboTolerance, fmt("gap at the exact posterior; worst |elbo - log marginal| = %.3e", worst_gap));

  // Point mass on one configuration with the same point-mass proposal.
  double worst_point = 0.0;
  for (std::size_t t = 0; t < 50; ++t) {
    ToyJoint toy;
    toy.n = static_cast<std::size_t>(rng.integer(1, 8));
    toy.m = std::size_t{1} << rng.integer(0, 12);
    toy.p.assign(toy.n * toy.m, 0.0);
    toy.q.assign(toy.n * toy.m, 0.0);
    const auto zs = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(toy.m) - 1));
    double s = 0.0;
    std::vector<double> w(toy.n);
    for (auto& v : w) s += (v = rng.uniform(0.1, 1.0));
    for (std::size_t x = 0; x < toy.n; ++x) {
      toy.p[x * toy.m + zs] = w[x] / s;
      toy.q[x * toy.m + zs] = 1.0;
    }
    for (std::size_t x = 0; x < toy.n; ++x) {
      const auto e = elbo_oracle(toy, x);
      worst_point = std::max(worst_point, std::fabs(e.elbo - std::log(toy.joint(x, zs))));
    }
  }
  r.check(worst_point <= kElboTolerance, fmt("point mass: elbo = log p(x, z*); worst deviation %.3e", worst_point));
  return r;
}

// ---------------------------------------------------------------- gradcheck

namespace {

void randomize(Parameter& p, Rng& rng, bool positive = false) {
  for (auto& v : p.value.values()) v = positive ? rng.uniform(0.2, 2.0) : rng.uniform(-1.0, 1.0);
}

// Projects a vector onto a fixed random direction so any op yields a scalar.
Var project(Graph& g, Var v, std::uint64_t salt) {
  Rng rng(derive_seed(0x5eed, salt));
  Vector r(static_cast<Eigen::Index>(g.dim(v)));
  for (Eigen::Index k = 0; k < r.size(); ++k) r[k] = rng.uniform(-1.0, 1.0);
  return g.dot(g.constant(std::move(r)), v);
}

struct ToyWorld {
  data::Dataset ds;
  std::vector<std::string> words;
};

ToyWorld toy_world(Rng& rng, std::size_t regions, std::size_t visual_dim) {
  ToyWorld w;
  data::Scene s;
  s.id = 1;
  s.width = 100;
  s.height = 100;
  for (std::size_t i = 0; i < regions; ++i) {
    data::Region r;
    r.id = static_cast<std::int64_t>(i + 1);
    const double x0 = 10.0 + 25.0 * static_cast<double>(i);
    r.box = {x0, 10.0 + 5.0 * static_cast<double>(i), x0 + 20.0, 40.0 + 10.0 * static_cast<double>(i)};
    for (std::size_t k = 0; k < visual_dim; ++k) r.feature.visual.push_back(rng.uniform(-1.0, 1.0));
    s.regions.push_back(r);
  }
  data::finalize_features(s, false);
  w.ds.scenes.push_back(s);
  data::ExpressionRecord e;
  e.id = 1;
  e.scene_id = 1;
  e.tokens = {"the", "red", "ball", "left"};
  e.referent = 1;
  w.ds.expressions.push_back(e);
  w.ds.visual_dim = visual_dim;
  w.ds.use_visdif = false;
  w.ds.splits["train"] = {1};
  w.ds.reindex();
  w.words = e.tokens;
  return w;
}

struct CheckOutcome {
  double max_rel = 0.0;
  std::string worst;
};

CheckOutcome check(const compute::LossBuilder& loss, ParameterSet& params) {
  const auto all = params.all();
  compute::GradCheckOptions opts;
  opts.step = 1e-4;
  opts.points = 4;
  const auto rep = compute::grad_check(loss, all, opts);
  return {rep.max_rel_error, rep.worst_parameter};
}

}  // namespace

SuiteResult run_gradcheck_suite(std::uint64_t seed) {
  SuiteResult r{"gradcheck", true, {}};
  Rng rng(seed);
  double worst = 0.0;
  auto report = [&](const std::string& name, const CheckOutcome& c) {
    worst = std::max(worst, c.max_rel);
    r.check(c.max_rel < kGradTolerance, name + fmt(": max rel err %.3e", c.max_rel) +
                                            (c.worst.empty() ? "" : " (" + c.worst + ")"));
  };

  // Elementwise and structural ops on parameter-backed leaves.
  {
    ParameterSet ps;
    auto& a = ps.add("a", {5}, compute::Init::kZero, rng);
    auto& b = ps.add("b", {5}, compute::Init::kZero, rng);
    auto& pos = ps.add("pos", {5}, compute::Init::kZero, rng);
    auto& w = ps.add("w", {3, 5}, compute::Init::kZero, rng);
    auto& bias = ps.add("bias", {3}, compute::Init::kZero, rng, true);
    auto& wide = ps.add("wide", {3, 10}, compute::Init::kZero, rng);
    auto& table = ps.add("table", {6, 5}, compute::Init::kZero, rng);
    auto& weights = ps.add("weights", {3}, compute::Init::kZero, rng);
    for (auto* p : ps.all()) randomize(*p, rng);
    randomize(pos, rng, true);
    // Distinct entries keep max away from ties.
    for (std::size_t k = 0; k < 5; ++k) a.value[k] += 0.5 * static_cast<double>(k);

    using B = std::function<Var(Graph&)>;
    const std::vector<std::pair<std::string, B>> ops = {
        {"linear", [&](Graph& g) { return project(g, g.linear(w, g.parameter(a)), 1); }},
        {"affine", [&](Graph& g) { return project(g, g.affine(w, bias, g.parameter(a)), 2); }},
        {"linear_block", [&](Graph& g) { return project(g, g.linear_block(wide, 5, g.parameter(b)), 3); }},
        {"affine_block", [&](Graph& g) { return project(g, g.affine_block(wide, bias, 0, g.parameter(a)), 4); }},
        {"add", [&](Graph& g) { return project(g, g.add(g.parameter(a), g.parameter(b)), 5); }},
        {"sub", [&](Graph& g) { return project(g, g.sub(g.parameter(a), g.parameter(b)), 6); }},
        {"mul", [&](Graph& g) { return project(g, g.mul(g.parameter(a), g.parameter(b)), 7); }},
        {"scale", [&](Graph& g) { return project(g, g.scale(g.parameter(a), -1.7), 8); }},
        {"sigmoid", [&](Graph& g) { return project(g, g.sigmoid(g.parameter(a)), 9); }},
        {"tanh", [&](Graph& g) { return project(g, g.tanh(g.parameter(b)), 10); }},
        {"exp", [&](Graph& g) { return project(g, g.exp(g.parameter(b)), 21); }},
        {"log", [&](Graph& g) { return project(g, g.log(g.parameter(pos)), 11); }},
        {"log_sigmoid", [&](Graph& g) { return project(g, g.log_sigmoid(g.parameter(a)), 12); }},
        {"concat", [&](Graph& g) { return project(g, g.concat({g.parameter(a), g.parameter(b)}), 13); }},
        {"slice", [&](Graph& g) { return project(g, g.slice(g.concat({g.parameter(a), g.parameter(b)}), 3, 4), 14); }},
        {"pick", [&](Graph& g) { return g.pick(g.mul(g.parameter(a), g.parameter(b)), 2); }},
        {"sum", [&](Graph& g) { return g.sum(g.mul(g.parameter(a), g.parameter(b))); }},
        {"dot", [&](Graph& g) { return g.dot(g.parameter(a), g.parameter(b)); }},
        {"max", [&](Graph& g) { return g.max(g.parameter(a)); }},
        {"row", [&](Graph& g) { return project(g, g.row(table, 4), 15); }},
        {"weighted_sum",
         [&](Graph& g) {
           std::vector<Var> rows{g.parameter(a), g.parameter(b), g.parameter(pos)};
           return project(g, g.weighted_sum(g.parameter(weights), rows), 16);
         }},
        {"l2norm", [&](Graph& g) { return project(g, g.l2norm(g.parameter(a)), 17); }},
        {"softmax", [&](Graph& g) { return project(g, g.softmax(g.parameter(a)), 18); }},
        {"softmax_masked",
         [&](Graph& g) {
           const compute::Mask m{true, false, true, true, false};
           return project(g, g.softmax(g.parameter(a), &m), 19);
         }},
        {"log_softmax", [&](Graph& g) { return project(g, g.log_softmax(g.parameter(b)), 20); }},
        {"log_softmax_masked",
         [&](Graph& g) {
           const compute::Mask m{false, true, true, false, true};
           return project(g, g.log_softmax(g.parameter(b), &m), 21);
         }},
        {"noisy_or_log", [&](Graph& g) { return g.noisy_or_log(g.sigmoid(g.parameter(b)), 1e-12); }},
    };
    for (const auto& [name, build] : ops) report("op " + name, check(build, ps));
  }

  // Three chained LSTM steps.
  {
    ParameterSet ps;
    auto cell = compute::LstmCell::create(ps, "lstm", 3, 4, rng);
    auto& in = ps.add("inputs", {3, 3}, compute::Init::kZero, rng);
    for (auto* p : ps.all()) randomize(*p, rng);
    report("lstm_step x3", check(
                               [&](Graph& g) {
                                 auto s = compute::lstm_zero_state(g, 4);
                                 for (std::size_t t = 0; t < 3; ++t) s = compute::lstm_step(g, cell, g.row(in, t), s);
                                 return g.add(project(g, s.h, 30), project(g, s.c, 31));
                               },
                               ps));
  }

  // Encoder and cue attention on a 4-token toy.
  {
    ParameterSet ps;
    language::EncoderConfig ec{4, 3, false};
    auto enc = language::LanguageEncoder::create(ps, ec, 7, rng);
    for (auto* p : ps.all()) randomize(*p, rng);
    const std::vector<std::size_t> tokens{4, 6, 5, 4, 0, 0};
    report("encoder + cue attention", check(
                                          [&](Graph& g) {
                                            auto cues = enc.build_cues(g, tokens);
                                            Var acc = g.scalar_constant(0.0);
                                            for (auto c : language::kAllCues)
                                              acc = g.add(acc, project(g, cues[c], 40 + static_cast<int>(c)));
                                            return acc;
                                          },
                                          ps));
  }

  // Decoder log-likelihood on a 3-token toy.
  {
    ParameterSet ps;
    auto& emb = ps.add("language/embedding", {7, 4}, compute::Init::kXavier, rng);
    generation::DecoderConfig dc{5, 4, 6, 0.3, 20};
    auto dec = generation::ExpressionDecoder::create(ps, dc, emb, 6, rng);
    auto& xs = ps.add("regions", {3, 5}, compute::Init::kZero, rng);
    for (auto* p : ps.all()) randomize(*p, rng);
    const generation::TokenSequence seq{{2, 4, 5, 6}, {4, 5, 1, 3}};
    report("decoder log-likelihood", check(
                                         [&](Graph& g) {
                                           std::vector<Var> x{g.row(xs, 0), g.row(xs, 1), g.row(xs, 2)};
                                           Var b = g.softmax(g.slice(g.row(xs, 2), 0, 3));
                                           auto [phi, zhat] = dec.joint_attention(g, 1, x, b);
                                           Var img = g.scale(g.add(g.add(x[0], x[1]), x[2]), 1.0 / 3.0);
                                           return dec.log_likelihood(g, x[1], zhat, img, seq);
                                         },
                                         ps));
  }

  // End-to-end losses on a 3-region, 4-token instance.
  {
    auto world = toy_world(rng, 3, 3);
    const auto& scene = world.ds.scenes[0];
    const auto& expr = world.ds.expressions[0];
    const std::vector<const data::ExpressionRecord*> exprs{&expr};
    auto [comp, gen] = build_vocabularies(exprs, 1);

    struct Variant {
      std::string name;
      ModelConfig cfg;
      bool supervised;
    };
    ModelConfig base;
    base.encoder = {4, 3, false};
    base.region_dim = scene.global_feature.size();
    base.decoder_hidden = 5;
    base.gen_min_count = 1;
    std::vector<Variant> variants;
    variants.push_back({"supervised S", base, true});
    variants.push_back({"unsupervised S", base, false});
    auto v = base;
    v.wo_reg = true;
    variants.push_back({"supervised wo_reg", v, true});
    v = base;
    v.encoder.uniform_attention = true;
    variants.push_back({"supervised wo_alpha", v, true});
    v = base;
    v.exclude_self = true;
    variants.push_back({"supervised exclude_self", v, true});
    v = base;
    v.head = HeadKind::kMilMaxPool;
    variants.push_back({"supervised mil-maxpool", v, true});
    v = base;
    v.head = HeadKind::kMilNoisyOr;
    variants.push_back({"supervised mil-noisyor", v, true});
    v = base;
    v.gen = GenMode::kJoint;
    variants.push_back({"supervised S' + L_c", v, true});
    v = base;
    v.gen = GenMode::kPolicyGradient;
    variants.push_back({"supervised S + policy gradient", v, true});

    for (const auto& var : variants) {
      auto model = Model::create(var.cfg, comp, gen, rng.bits());
      for (auto* p : model->parameters().all()) randomize(*p, rng);
      double advantage = 0.0;
      if (var.cfg.gen == GenMode::kPolicyGradient) {
        Graph g;
        const auto f = model->forward(g, scene, expr);
        advantage = g.scalar(model->generation_loss(g, f, 2, expr, nullptr)) - 0.7;
      }
      auto loss = [&](Graph& g) {
        const auto f = model->forward(g, scene, expr, var.cfg.gen == GenMode::kJoint);
        Var l = var.supervised ? training::supervised_loss(g, f.log_posterior, 1)
                               : training::unsupervised_loss(g, f.log_posterior);
        l = g.sub(l, g.scale(training::entropy(g, f.posterior, f.log_posterior), training::kEntropyWeight));
        if (var.cfg.gen == GenMode::kJoint) l = g.add(l, model->generation_loss(g, f, 1, expr, nullptr));
        if (var.cfg.gen == GenMode::kPolicyGradient) {
          // Advantage held at its unperturbed value, as in the estimator.
          Var lc = model->generation_loss(g, f, 2, expr, nullptr);
          l = g.add(l, training::reinforce_surrogate(g, f.log_posterior, 2, lc, g.scalar(lc) - advantage));
        }
        return l;
      };
      report("end-to-end " + var.name, check(loss, model->parameters()));
    }
  }
  r.lines.push_back(fmt("worst relative error %.3e (limit %.0e)", worst, kGradTolerance));
  return r;
}

// ---------------------------------------------------------------- reinforce

ReinforceToy::ReinforceToy(std::uint64_t seed) {
  Rng rng(seed);
  a_ = &params_.add("score", {3}, compute::Init::kZero, rng);
  c_ = &params_.add("generation", {6}, compute::Init::kZero, rng);
  for (auto& v : a_->value.values()) v = rng.uniform(-0.6, 0.6);
  for (auto& v : c_->value.values()) v = rng.uniform(-1.0, 1.0);
  for (int x = 0; x < 2; ++x) {
    Vector f(3), h(6), t(6);
    for (Eigen::Index k = 0; k < 3; ++k) f[k] = rng.uniform(-1.0, 1.0);
    for (Eigen::Index k = 0; k < 6; ++k) {
      h[k] = rng.uniform(-1.0, 1.0);
      t[k] = rng.uniform(-1.0, 1.0);
    }
    f_.push_back(f);
    h_.push_back(h);
    t_.push_back(t);
  }
}

Var ReinforceToy::posterior_logits(Graph& g) {
  Var a = g.parameter(*a_);
  return g.concat({g.dot(a, g.constant(f_[0])), g.dot(a, g.constant(f_[1]))});
}

Var ReinforceToy::loss_of(Graph& g, std::size_t x) {
  Var d = g.sub(g.mul(g.parameter(*c_), g.constant(h_[x])), g.constant(t_[x]));
  return g.add(g.scale(g.dot(d, d), 0.5), g.scalar_constant(1.5));
}

std::vector<double> ReinforceToy::gradient() {
  std::vector<double> out(a_->grad.values());
  out.insert(out.end(), c_->grad.values().begin(), c_->grad.values().end());
  return out;
}

std::vector<double> ReinforceToy::posterior() {
  Graph g;
  const auto& p = g.value(g.softmax(posterior_logits(g)));
  return {p[0], p[1]};
}

std::vector<double> ReinforceToy::losses() {
  Graph g;
  return {g.scalar(loss_of(g, 0)), g.scalar(loss_of(g, 1))};
}

std::vector<double> ReinforceToy::exact_gradient() {
  params_.zero_grad();
  Graph g;
  Var p = g.softmax(posterior_logits(g));
  Var j = g.dot(p, g.concat({loss_of(g, 0), loss_of(g, 1)}));
  g.backward(j);
  return gradient();
}

std::vector<double> ReinforceToy::sample_gradient(std::size_t k, double baseline, double* loss) {
  params_.zero_grad();
  Graph g;
  Var lp = g.log_softmax(posterior_logits(g));
  Var lc = loss_of(g, k);
  if (loss) *loss = g.scalar(lc);
  g.backward(training::reinforce_surrogate(g, lp, k, lc, baseline));
  return gradient();
}

namespace {
struct Moments {
  std::vector<double> sum, sum_sq;
  explicit Moments(std::size_t d) : sum(d, 0.0), sum_sq(d, 0.0) {}
  void add(const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      sum[i] += v[i];
      sum_sq[i] += v[i] * v[i];
    }
  }
  EstimatorStats stats(std::size_t n) const {
    EstimatorStats s;
    const double dn = static_cast<double>(n);
    for (std::size_t i = 0; i < sum.size(); ++i) {
      const double mean = sum[i] / dn;
      const double var = std::max(0.0, (sum_sq[i] - dn * mean * mean) / (dn - 1.0));
      s.mean.push_back(mean);
      s.variance.push_back(var);
      s.standard_error.push_back(std::sqrt(var / dn));
    }
    return s;
  }
};
}  // namespace

ReinforceComparison compare_reinforce(std::uint64_t seed, std::size_t samples, std::size_t warmup) {
  if (samples < 2) throw DomainError("compare_reinforce needs at least two samples");
  ReinforceToy toy(seed);
  Rng rng(derive_seed(seed, 7));
  const auto p = toy.posterior();
  ReinforceComparison out;
  out.exact = toy.exact_gradient();
  double b = 0.0;
  for (std::size_t s = 0; s < warmup; ++s) {
    const auto k = rng.categorical(p);
    b = training::baseline_update(b, toy.losses()[k]);
  }
  Moments with(ReinforceToy::kDim), without(ReinforceToy::kDim);
  for (std::size_t s = 0; s < samples; ++s) {
    const auto k = rng.categorical(p);
    double lc = 0.0;
    with.add(toy.sample_gradient(k, b, &lc));
    without.add(toy.sample_gradient(k, 0.0));
    b = training::baseline_update(b, lc);
  }
  out.with_baseline = with.stats(samples);
  out.without_baseline = without.stats(samples);
  out.final_baseline = b;
  return out;
}

SuiteResult run_reinforce_suite(std::uint64_t seed, std::size_t samples) {
  SuiteResult r{"reinforce", true, {}};
  const auto cmp = compare_reinforce(seed, samples);
  auto unbiased = [&](const EstimatorStats& s, const char* label) {
    double worst = 0.0;
    for (std::size_t i = 0; i < cmp.exact.size(); ++i) {
      const double se = s.standard_error[i];
      const double dev = std::fabs(s.mean[i] - cmp.exact[i]);
      const double z = se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : INFINITY);
      worst = std::max(worst, z);
    }
    r.check(worst <= 3.0, std::string(label) + fmt(": worst |mean - exact| / stderr = %.3f over %.0f samples", worst,
                                                     double(samples)));
  };
  unbiased(cmp.with_baseline, "unbiased with baseline");
  unbiased(cmp.without_baseline, "unbiased without baseline");
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < cmp.exact.size(); ++i) {
    const double v0 = cmp.without_baseline.variance[i];
    const double ratio = v0 > 0.0 ? cmp.with_baseline.variance[i] / v0 : (cmp.with_baseline.variance[i] > 0 ? INFINITY : 0);
    worst_ratio = std::max(worst_ratio, ratio);
  }
  r.check(worst_ratio <= 1.0, fmt("baseline variance / baseline-free variance, worst coordinate = %.4f (b = %.4f)",
                                  worst_ratio, cmp.final_baseline));

  // A fully centered advantage removes the score-function term.
  ReinforceToy toy(seed);
  const auto l = toy.losses();
  const auto centered = toy.sample_gradient(0, l[0]);
  double worst_score = 0.0;
  for (std::size_t i = 0; i < 3; ++i) worst_score = std::max(worst_score, std::fabs(centered[i]));
  r.check(worst_score == 0.0, fmt("b = L_c leaves no score-function gradient; max |grad a| = %.3e", worst_score));
  return r;
}

// ---------------------------------------------------------------- mil

SuiteResult run_mil_suite(std::uint64_t seed) {
  SuiteResult r{"mil", true, {}};
  Rng rng(seed);
  const double one[] = {0.5};
  r.check(std::fabs(mil_noisyor_score(one) - std::log(0.5)) < 1e-15, "noisy-or single p = 0.5 gives log 0.5");
  const double two[] = {0.5, 0.5};
  r.check(std::fabs(mil_noisyor_score(two) - std::log(0.75)) < 1e-15, "noisy-or two p = 0.5 gives log 0.75");
  const double zeros[] = {0.0, 0.0, 0.0};
  r.check(mil_noisyor_score(zeros) == std::log(kMilFloor), "noisy-or all zero floors at log 1e-12");
  const double single[] = {0.3};
  r.check(mil_maxpool_score(single) == std::log(0.3), "max-pool single candidate gives log p");

  double worst_monotone = 0.0, worst_dominant = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto m = static_cast<std::size_t>(rng.integer(1, 12));
    std::vector<double> p(m);
    for (auto& v : p) v = rng.uniform();
    const double before = mil_maxpool_score(p);
    const double nb = mil_noisyor_score(p);
    const auto k = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(m) - 1));
    p[k] = std::min(1.0, p[k] + rng.uniform(0.0, 0.5));
    worst_monotone = std::min({worst_monotone, mil_maxpool_score(p) - before, mil_noisyor_score(p) - nb});
    // One dominant term.
    std::vector<double> d(m, 0.0);
    d[k] = 1.0 - 1e-9 * rng.uniform();
    worst_dominant = std::max(worst_dominant, std::fabs(mil_maxpool_score(d) - mil_noisyor_score(d)));
  }
  r.check(worst_monotone >= 0.0, fmt("raising any p never lowers either score; worst change %.3e", worst_monotone));
  r.check(worst_dominant < 1e-12, fmt("dominant-term limit agreement; worst |maxpool - noisyor| = %.3e", worst_dominant));
  return r;
}

SuiteResult run_oracle(const std::string& suite, std::uint64_t seed) {
  if (suite == "elbo") return run_elbo_suite(seed);
  if (suite == "gradcheck") return run_gradcheck_suite(seed);
  if (suite == "reinforce") return run_reinforce_suite(seed);
  if (suite == "mil") return run_mil_suite(seed);
  throw ConfigError("unknown oracle suite '" + suite + "' (expected elbo, gradcheck, reinforce or mil)");
}

}  // namespace vc::evaluation
