#pragma once

#include <cstddef>
#include <vector>

#include "vc/random.hpp"

namespace vc::evaluation {

// Explicit joint p(x, z | L) over n referents and m context configurations
// (row-major n x m) and a proposal q(z | x, L) (row-major n x m, one
// distribution per x).
struct ToyJoint {
  std::size_t n = 0, m = 0;
  std::vector<double> p;
  std::vector<double> q;

  double joint(std::size_t x, std::size_t z) const { return p[x * m + z]; }
  double proposal(std::size_t x, std::size_t z) const { return q[x * m + z]; }
  // Throws ValidationError unless p sums to 1 and every q(. | x) sums to 1
  // (within 1e-9) with non-negative entries.
  void validate() const;
  // Replaces q(. | x) with the exact posterior p(z | x, L).
  void set_exact_posterior();
};

struct ElboResult {
  double elbo = 0.0;          // E_q[log p(x | z, L)] - KL(q || p(z | L))
  double log_marginal = 0.0;  // log sum_z p(x, z | L)
  double kl = 0.0;            // KL(q || p(z | L))
};

// Exact enumeration for referent x. Accumulates in long double.
ElboResult elbo_oracle(const ToyJoint& toy, std::size_t x);

struct ToyOptions {
  std::size_t max_regions = 8;
  std::size_t max_log2_configs = 12;  // m = 2^k, k uniform in [0, max]
  double sparsity = 0.2;              // chance that a toy zeros some entries
};

ToyJoint random_toy(Rng& rng, const ToyOptions& opts = {});

}  // namespace vc::evaluation
