#pragma once

#include <map>
#include <span>
#include <string>

#include "vc/compute/tensor.hpp"

namespace vc::compute {

struct SgdOptions {
  double lr = 0.01;
  double momentum = 0.95;
  double weight_decay = 5e-4;
};

// SGD with heavy-ball momentum and L2 weight decay:
//   v <- momentum * v + grad + weight_decay * theta   (decay only if Parameter::decay)
//   theta <- theta - lr * v
class SgdMomentum {
 public:
  // Throws NumericalError, leaving every parameter untouched, if any
  // gradient is non-finite.
  void step(std::span<Parameter* const> params, const SgdOptions& opts);

  const std::map<std::string, Tensor>& velocities() const { return velocity_; }
  std::map<std::string, Tensor>& velocities() { return velocity_; }

 private:
  std::map<std::string, Tensor> velocity_;
};

double global_grad_norm(std::span<Parameter* const> params);
// Rescales gradients so their global norm is at most max_norm. Returns the
// norm before clipping.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

}  // namespace vc::compute
