#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vc/compute/graph.hpp"
#include "vc/language/encoder.hpp"

namespace vc::comprehension {

using compute::Graph;
using compute::Parameter;
using compute::ParameterSet;
using compute::Var;

// Two-branch vision-language association score:
//   fc(l2norm(y1 * fc(b))) + fc(l2norm(y2 * fc([a, b])))
// With (a, b) = (x_i, x_j) and the context cues this is the context score
// s_phi; with (x_i, z_i) and the referent cues it is s_theta (whose single
// branch reads a instead of b, see AssociationScorer::Single).
class AssociationScorer {
 public:
  enum class Single { kSecond, kFirst };

  // Reusable per-vector fc outputs; a pair score only adds and normalizes.
  struct Projection {
    Var single;  // fc(v)
    Var left;    // W_pair[:, :D] v + b_pair
    Var right;   // W_pair[:, D:] v
  };

  static AssociationScorer create(ParameterSet& params, const std::string& prefix, std::size_t region_dim,
                                  std::size_t embed_dim, Rng& rng);
  static AssociationScorer bind(ParameterSet& params, const std::string& prefix, std::size_t region_dim,
                                std::size_t embed_dim);

  Projection project(Graph& g, Var v, bool need_single = true, bool need_left = true, bool need_right = true) const;
  // Branch scores, returned separately so the single branch can be shared
  // across every pair with the same second argument.
  Var single_branch(Graph& g, Var single_proj, Var y1) const;
  Var pair_branch(Graph& g, Var left_proj, Var right_proj, Var y2) const;

  // score(x_i, x_j) for every ordered pair, sharing projections.
  std::vector<std::vector<Var>> all_pairs(Graph& g, std::span<const Var> x, Var y1, Var y2) const;

  // Unoptimized reference evaluation.
  Var score(Graph& g, Var a, Var b, Var y1, Var y2, Single single = Single::kSecond) const;

  std::size_t region_dim() const { return region_dim_; }

 private:
  Parameter *single_w_ = nullptr, *single_b_ = nullptr;
  Parameter *pair_w_ = nullptr, *pair_b_ = nullptr;
  Parameter *out1_w_ = nullptr, *out1_b_ = nullptr;
  Parameter *out2_w_ = nullptr, *out2_b_ = nullptr;
  std::size_t region_dim_ = 0;
};

// fc(l2norm(y * fc(z))).
class UnaryScorer {
 public:
  static UnaryScorer create(ParameterSet& params, const std::string& prefix, std::size_t region_dim,
                            std::size_t embed_dim, Rng& rng);
  static UnaryScorer bind(ParameterSet& params, const std::string& prefix, std::size_t region_dim,
                          std::size_t embed_dim);
  Var score(Graph& g, Var z, Var y) const;

 private:
  Parameter *fc_w_ = nullptr, *fc_b_ = nullptr, *out_w_ = nullptr, *out_b_ = nullptr;
};

enum class ScoreMode {
  kPlain,           // S  = s_theta - s_phi + s_omega
  kWithGeneration,  // S' = s_theta - s_phi + s_omega' + s_psi
  kWoReg,           // s_theta
};

struct HeadConfig {
  std::size_t region_dim = 0;
  std::size_t embed_dim = 64;
  bool exclude_self = false;
  // Creates the independent s_omega' scorer used by S'.
  bool with_omega_prime = false;
};

// Graph handles for one scene.
struct GroundingVars {
  std::vector<Var> x;
  std::vector<std::vector<Var>> pair;  // pair[i][j] = s_phi(x_i, x_j, y_c)
  std::vector<Var> beta;               // per i, distribution over j
  std::vector<Var> z;
  Var s_theta, s_phi, s_omega, s_omega_prime;  // N-vectors; s_omega_prime may be invalid
};

class GroundingHead {
 public:
  GroundingHead() = default;
  static GroundingHead create(ParameterSet& params, const HeadConfig& cfg, Rng& rng);
  static GroundingHead bind(ParameterSet& params, const HeadConfig& cfg);

  const HeadConfig& config() const { return cfg_; }
  const AssociationScorer& phi() const { return phi_; }
  const AssociationScorer& theta() const { return theta_; }
  const UnaryScorer& omega() const { return omega_; }

  // s_phi(x_i, x_j) for every ordered pair.
  std::vector<std::vector<Var>> pair_scores(Graph& g, std::span<const Var> x, const language::CueFeatures& cues) const;
  // beta_i = softmax_j(pair[i][j]); z_i = sum_j beta_ij x_j.
  std::pair<Var, Var> estimate_context(Graph& g, std::size_t i, std::span<const Var> x,
                                       std::span<const Var> pair_row) const;
  Var referent_score(Graph& g, Var x_i, Var z_i, Var y_r1, Var y_r2) const;
  Var context_score_at(Graph& g, Var x_i, Var z_i, Var y_c1, Var y_c2) const;
  Var regularization_score(Graph& g, Var z_i, Var y_g) const;
  Var regularization_prime_score(Graph& g, Var z_i, Var y_g) const;

  // All component scores for a scene.
  GroundingVars forward(Graph& g, std::span<const Var> x, const language::CueFeatures& cues) const;

  // Per-region total in the given mode; s_psi (N-vector) is required for
  // kWithGeneration and throws ConfigError when missing.
  Var total_score(Graph& g, const GroundingVars& v, ScoreMode mode, std::optional<Var> s_psi = std::nullopt) const;

 private:
  HeadConfig cfg_;
  AssociationScorer phi_, theta_;
  UnaryScorer omega_;
  std::optional<UnaryScorer> omega_prime_;
};

// Plain values extracted from a forward pass.
struct GroundingScores {
  std::vector<double> s_theta, s_phi, s_omega, s_psi, total, posterior;
  std::vector<std::vector<double>> beta;
  std::vector<std::vector<double>> z;
  std::size_t argmax = 0;
};

GroundingScores extract_scores(const Graph& g, const GroundingVars& v, Var total, std::optional<Var> s_psi,
                               Var posterior);

}  // namespace vc::comprehension
