#include "vc/compute/optimizer.hpp"

#include <cmath>

namespace vc::compute {

void SgdMomentum::step(std::span<Parameter* const> params, const SgdOptions& opts) {
  for (const auto* p : params)
    if (p->trainable && !p->grad.all_finite())
      throw NumericalError("sgd step aborted: non-finite gradient in " + p->name);

  for (auto* p : params) {
    if (!p->trainable) continue;
    auto it = velocity_.find(p->name);
    if (it == velocity_.end()) it = velocity_.emplace(p->name, Tensor(p->value.shape())).first;
    auto v = it->second.flat();
    auto theta = p->value.flat();
    v = opts.momentum * v + p->grad.flat();
    if (p->decay && opts.weight_decay != 0.0) v += opts.weight_decay * theta;
    theta -= opts.lr * v;
  }
}

double global_grad_norm(std::span<Parameter* const> params) {
  double sq = 0.0;
  for (const auto* p : params)
    if (p->trainable) sq += p->grad.flat().squaredNorm();
  return std::sqrt(sq);
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (auto* p : params)
      if (p->trainable) p->grad.flat() *= s;
  }
  return norm;
}

}  // namespace vc::compute
