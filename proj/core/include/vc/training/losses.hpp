#pragma once

#include <cstddef>

#include "vc/compute/graph.hpp"

namespace vc::training {

using compute::Graph;
using compute::Var;

inline constexpr double kEntropyWeight = 5e-3;
inline constexpr double kBaselineDecay = 0.9;

// -log p(x_gt | L) from the per-region log posterior.
Var supervised_loss(Graph& g, Var log_posterior, std::size_t gt);
// -max_x log p(x | L).
Var unsupervised_loss(Graph& g, Var log_posterior);
// H(p) = -sum p log p.
Var entropy(Graph& g, Var posterior, Var log_posterior);

// Surrogate whose gradient is the K = 1 score-function estimate
//   (L_c - b) grad log p(x_k | L) + grad L_c(x_k, L);
// the advantage L_c - b enters as a constant.
Var reinforce_surrogate(Graph& g, Var log_posterior, std::size_t k, Var ce_loss, double baseline);

// b' = decay * b + (1 - decay) * loss.
double baseline_update(double b, double loss, double decay = kBaselineDecay);

struct Schedule {
  double lr = 0.01;
  double factor = 0.1;
  std::size_t decay_every = 120000;
};

// lr * factor^floor(iteration / decay_every).
double lr_at(std::size_t iteration, const Schedule& s = {});

}  // namespace vc::training
