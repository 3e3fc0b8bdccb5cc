#include "vc/comprehension/grounding.hpp"

#include <algorithm>

namespace vc::comprehension {

using compute::Init;
using compute::Mask;
using language::Cue;

AssociationScorer AssociationScorer::create(ParameterSet& params, const std::string& prefix, std::size_t region_dim,
                                            std::size_t embed_dim, Rng& rng) {
  params.add(prefix + "/single/w", {embed_dim, region_dim}, Init::kXavier, rng);
  params.add(prefix + "/single/b", {embed_dim}, Init::kZero, rng, true);
  params.add(prefix + "/pair/w", {embed_dim, 2 * region_dim}, Init::kXavier, rng);
  params.add(prefix + "/pair/b", {embed_dim}, Init::kZero, rng, true);
  params.add(prefix + "/out1/w", {1, embed_dim}, Init::kXavier, rng);
  params.add(prefix + "/out1/b", {1}, Init::kZero, rng, true);
  params.add(prefix + "/out2/w", {1, embed_dim}, Init::kXavier, rng);
  params.add(prefix + "/out2/b", {1}, Init::kZero, rng, true);
  return bind(params, prefix, region_dim, embed_dim);
}

AssociationScorer AssociationScorer::bind(ParameterSet& params, const std::string& prefix, std::size_t region_dim,
                                          std::size_t embed_dim) {
  AssociationScorer s;
  s.single_w_ = &params.at(prefix + "/single/w");
  s.single_b_ = &params.at(prefix + "/single/b");
  s.pair_w_ = &params.at(prefix + "/pair/w");
  s.pair_b_ = &params.at(prefix + "/pair/b");
  s.out1_w_ = &params.at(prefix + "/out1/w");
  s.out1_b_ = &params.at(prefix + "/out1/b");
  s.out2_w_ = &params.at(prefix + "/out2/w");
  s.out2_b_ = &params.at(prefix + "/out2/b");
  s.region_dim_ = region_dim;
  if (s.single_w_->value.shape() != compute::Shape{embed_dim, region_dim} ||
      s.pair_w_->value.shape() != compute::Shape{embed_dim, 2 * region_dim})
    throw DimensionError(prefix + ": parameter shapes do not match region_dim " + std::to_string(region_dim) +
                         " / embed_dim " + std::to_string(embed_dim));
  return s;
}

AssociationScorer::Projection AssociationScorer::project(Graph& g, Var v, bool need_single, bool need_left,
                                                         bool need_right) const {
  if (g.dim(v) != region_dim_)
    throw DimensionError("association score: region feature extent " + std::to_string(g.dim(v)) + ", expected " +
                         std::to_string(region_dim_));
  Projection p;
  if (need_single) p.single = g.affine(*single_w_, *single_b_, v);
  if (need_left) p.left = g.affine_block(*pair_w_, *pair_b_, 0, v);
  if (need_right) p.right = g.linear_block(*pair_w_, region_dim_, v);
  return p;
}

Var AssociationScorer::single_branch(Graph& g, Var single_proj, Var y1) const {
  return g.affine(*out1_w_, *out1_b_, g.l2norm(g.mul(y1, single_proj)));
}

Var AssociationScorer::pair_branch(Graph& g, Var left_proj, Var right_proj, Var y2) const {
  return g.affine(*out2_w_, *out2_b_, g.l2norm(g.mul(y2, g.add(left_proj, right_proj))));
}

std::vector<std::vector<Var>> AssociationScorer::all_pairs(Graph& g, std::span<const Var> x, Var y1, Var y2) const {
  const std::size_t n = x.size();
  std::vector<Projection> proj(n);
  std::vector<Var> single(n);
  for (std::size_t j = 0; j < n; ++j) {
    proj[j] = project(g, x[j]);
    single[j] = single_branch(g, proj[j].single, y1);
  }
  std::vector<std::vector<Var>> out(n, std::vector<Var>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i][j] = g.add(single[j], pair_branch(g, proj[i].left, proj[j].right, y2));
  return out;
}

Var AssociationScorer::score(Graph& g, Var a, Var b, Var y1, Var y2, Single single) const {
  Var single_in = single == Single::kSecond ? b : a;
  Var s1 = single_branch(g, g.affine(*single_w_, *single_b_, single_in), y1);
  Var pair_in = g.concat({a, b});
  Var s2 = g.affine(*out2_w_, *out2_b_, g.l2norm(g.mul(y2, g.affine(*pair_w_, *pair_b_, pair_in))));
  return g.add(s1, s2);
}

UnaryScorer UnaryScorer::create(ParameterSet& params, const std::string& prefix, std::size_t region_dim,
                                std::size_t embed_dim, Rng& rng) {
  params.add(prefix + "/fc/w", {embed_dim, region_dim}, Init::kXavier, rng);
  params.add(prefix + "/fc/b", {embed_dim}, Init::kZero, rng, true);
  params.add(prefix + "/out/w", {1, embed_dim}, Init::kXavier, rng);
  params.add(prefix + "/out/b", {1}, Init::kZero, rng, true);
  return bind(params, prefix, region_dim, embed_dim);
}

UnaryScorer UnaryScorer::bind(ParameterSet& params, const std::string& prefix, std::size_t region_dim,
                              std::size_t embed_dim) {
  UnaryScorer s;
  s.fc_w_ = &params.at(prefix + "/fc/w");
  s.fc_b_ = &params.at(prefix + "/fc/b");
  s.out_w_ = &params.at(prefix + "/out/w");
  s.out_b_ = &params.at(prefix + "/out/b");
  if (s.fc_w_->value.shape() != compute::Shape{embed_dim, region_dim})
    throw DimensionError(prefix + ": parameter shapes do not match region_dim " + std::to_string(region_dim));
  return s;
}

Var UnaryScorer::score(Graph& g, Var z, Var y) const {
  return g.affine(*out_w_, *out_b_, g.l2norm(g.mul(y, g.affine(*fc_w_, *fc_b_, z))));
}

GroundingHead GroundingHead::create(ParameterSet& params, const HeadConfig& cfg, Rng& rng) {
  AssociationScorer::create(params, "comprehension/phi", cfg.region_dim, cfg.embed_dim, rng);
  AssociationScorer::create(params, "comprehension/theta", cfg.region_dim, cfg.embed_dim, rng);
  UnaryScorer::create(params, "comprehension/omega", cfg.region_dim, cfg.embed_dim, rng);
  if (cfg.with_omega_prime)
    UnaryScorer::create(params, "comprehension/omega_prime", cfg.region_dim, cfg.embed_dim, rng);
  return bind(params, cfg);
}

GroundingHead GroundingHead::bind(ParameterSet& params, const HeadConfig& cfg) {
  GroundingHead h;
  h.cfg_ = cfg;
  h.phi_ = AssociationScorer::bind(params, "comprehension/phi", cfg.region_dim, cfg.embed_dim);
  h.theta_ = AssociationScorer::bind(params, "comprehension/theta", cfg.region_dim, cfg.embed_dim);
  h.omega_ = UnaryScorer::bind(params, "comprehension/omega", cfg.region_dim, cfg.embed_dim);
  if (cfg.with_omega_prime)
    h.omega_prime_ = UnaryScorer::bind(params, "comprehension/omega_prime", cfg.region_dim, cfg.embed_dim);
  return h;
}

std::vector<std::vector<Var>> GroundingHead::pair_scores(Graph& g, std::span<const Var> x,
                                                         const language::CueFeatures& cues) const {
  return phi_.all_pairs(g, x, cues[Cue::kC1], cues[Cue::kC2]);
}

std::pair<Var, Var> GroundingHead::estimate_context(Graph& g, std::size_t i, std::span<const Var> x,
                                                    std::span<const Var> pair_row) const {
  if (x.empty()) throw DomainError("estimate_context: no regions");
  Var logits = g.concat(pair_row);
  Var beta;
  if (cfg_.exclude_self && x.size() > 1) {
    Mask mask(x.size(), true);
    mask[i] = false;
    beta = g.softmax(logits, &mask);
  } else {
    beta = g.softmax(logits);
  }
  return {beta, g.weighted_sum(beta, x)};
}

Var GroundingHead::referent_score(Graph& g, Var x_i, Var z_i, Var y_r1, Var y_r2) const {
  const auto pi = theta_.project(g, x_i, true, true, false);
  const auto pz = theta_.project(g, z_i, false, false, true);
  return g.add(theta_.single_branch(g, pi.single, y_r1), theta_.pair_branch(g, pi.left, pz.right, y_r2));
}

Var GroundingHead::context_score_at(Graph& g, Var x_i, Var z_i, Var y_c1, Var y_c2) const {
  const auto pi = phi_.project(g, x_i, false, true, false);
  const auto pz = phi_.project(g, z_i, true, false, true);
  return g.add(phi_.single_branch(g, pz.single, y_c1), phi_.pair_branch(g, pi.left, pz.right, y_c2));
}

Var GroundingHead::regularization_score(Graph& g, Var z_i, Var y_g) const { return omega_.score(g, z_i, y_g); }

Var GroundingHead::regularization_prime_score(Graph& g, Var z_i, Var y_g) const {
  if (!omega_prime_) throw ConfigError("s_omega' requested but the model was built without it");
  return omega_prime_->score(g, z_i, y_g);
}

GroundingVars GroundingHead::forward(Graph& g, std::span<const Var> x, const language::CueFeatures& cues) const {
  const std::size_t n = x.size();
  GroundingVars v;
  v.x.assign(x.begin(), x.end());
  v.pair = pair_scores(g, x, cues);
  std::vector<Var> theta(n), phi(n), omega(n), omega_p(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto [beta, z] = estimate_context(g, i, x, v.pair[i]);
    v.beta.push_back(beta);
    v.z.push_back(z);
    theta[i] = referent_score(g, x[i], z, cues[Cue::kR1], cues[Cue::kR2]);
    phi[i] = context_score_at(g, x[i], z, cues[Cue::kC1], cues[Cue::kC2]);
    omega[i] = regularization_score(g, z, cues[Cue::kG]);
    if (omega_prime_) omega_p[i] = regularization_prime_score(g, z, cues[Cue::kG]);
  }
  v.s_theta = g.concat(theta);
  v.s_phi = g.concat(phi);
  v.s_omega = g.concat(omega);
  if (omega_prime_) v.s_omega_prime = g.concat(omega_p);
  return v;
}

Var GroundingHead::total_score(Graph& g, const GroundingVars& v, ScoreMode mode, std::optional<Var> s_psi) const {
  switch (mode) {
    case ScoreMode::kWoReg:
      return v.s_theta;
    case ScoreMode::kPlain:
      return g.add(g.sub(v.s_theta, v.s_phi), v.s_omega);
    case ScoreMode::kWithGeneration:
      if (!s_psi || !s_psi->valid()) throw ConfigError("S' needs s_psi but no generation module is present");
      if (!v.s_omega_prime.valid()) throw ConfigError("S' needs s_omega' but the model was built without it");
      return g.add(g.add(g.sub(v.s_theta, v.s_phi), v.s_omega_prime), *s_psi);
  }
  throw ConfigError("unknown score mode");
}

namespace {
std::vector<double> to_std(const compute::Vector& v) { return {v.data(), v.data() + v.size()}; }
}  // namespace

GroundingScores extract_scores(const Graph& g, const GroundingVars& v, Var total, std::optional<Var> s_psi,
                               Var posterior) {
  GroundingScores s;
  if (v.s_theta.valid()) s.s_theta = to_std(g.value(v.s_theta));
  if (v.s_phi.valid()) s.s_phi = to_std(g.value(v.s_phi));
  if (v.s_omega.valid()) s.s_omega = to_std(g.value(v.s_omega));
  if (s_psi && s_psi->valid()) s.s_psi = to_std(g.value(*s_psi));
  s.total = to_std(g.value(total));
  s.posterior = to_std(g.value(posterior));
  for (auto b : v.beta) s.beta.push_back(to_std(g.value(b)));
  for (auto z : v.z) s.z.push_back(to_std(g.value(z)));
  s.argmax = static_cast<std::size_t>(std::max_element(s.total.begin(), s.total.end()) - s.total.begin());
  return s;
}

}  // namespace vc::comprehension
