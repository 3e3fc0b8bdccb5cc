#include "vc/training/losses.hpp"

#include <cmath>
#include <string>

#include "vc/errors.hpp"

namespace vc::training {

Var supervised_loss(Graph& g, Var log_posterior, std::size_t gt) {
  if (gt >= g.dim(log_posterior))
    throw DomainError("ground-truth index " + std::to_string(gt) + " outside " + std::to_string(g.dim(log_posterior)) +
                      " regions");
  return g.neg(g.pick(log_posterior, gt));
}

Var unsupervised_loss(Graph& g, Var log_posterior) { return g.neg(g.max(log_posterior)); }

Var entropy(Graph& g, Var posterior, Var log_posterior) { return g.neg(g.dot(posterior, log_posterior)); }

Var reinforce_surrogate(Graph& g, Var log_posterior, std::size_t k, Var ce_loss, double baseline) {
  const double advantage = g.scalar(ce_loss) - baseline;
  if (!std::isfinite(advantage)) throw NumericalError("non-finite advantage in the policy-gradient term");
  const double logp = g.value(log_posterior)[static_cast<Eigen::Index>(k)];
  if (!std::isfinite(logp)) throw NumericalError("sampled region has zero posterior mass");
  return g.add(g.scale(g.pick(log_posterior, k), advantage), ce_loss);
}

double baseline_update(double b, double loss, double decay) { return decay * b + (1.0 - decay) * loss; }

double lr_at(std::size_t iteration, const Schedule& s) {
  if (s.decay_every == 0) return s.lr;
  return s.lr * std::pow(s.factor, static_cast<double>(iteration / s.decay_every));
}

}  // namespace vc::training
