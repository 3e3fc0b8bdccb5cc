#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vc/compute/graph.hpp"

namespace vc::compute {

struct GradReport {
  struct Entry {
    std::string name;
    double max_rel_error = 0.0;
    double max_abs_error = 0.0;
    std::size_t scalars = 0;
  };
  std::vector<Entry> entries;
  double step = 0.0;
  double max_rel_error = 0.0;
  std::string worst_parameter;
};

// Builds the scalar loss on a fresh graph. Must be deterministic.
using LossBuilder = std::function<Var(Graph&)>;

struct GradCheckOptions {
  double step = 1e-5;
  // Relative error is |a - n| / max(|a|, |n|, denominator_floor); the floor
  // stops near-zero gradients from reporting round-off as error.
  double denominator_floor = 1e-6;
  // 2: (f(x+h) - f(x-h)) / 2h.  4: the fourth-order central stencil, which
  // tolerates a larger step and so loses less to round-off.
  int points = 2;
};

// Compares backward() against central finite differences on every scalar of
// every parameter in `params`. Parameter values are restored on exit.
GradReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params, GradCheckOptions opts = {});

double relative_error(double analytic, double numeric, double floor);

}  // namespace vc::compute
