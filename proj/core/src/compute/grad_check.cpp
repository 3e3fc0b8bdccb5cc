#include "vc/compute/grad_check.hpp"

#include <cmath>

namespace vc::compute {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

namespace {

double evaluate(const LossBuilder& loss) {
  Graph g;
  const double v = g.scalar(loss(g));
  if (!std::isfinite(v)) throw NumericalError("grad_check: non-finite loss");
  return v;
}

}  // namespace

GradReport grad_check(const LossBuilder& loss, std::span<Parameter* const> params, GradCheckOptions opts) {
  if (!(opts.step > 0.0)) throw DomainError("grad_check: step must be positive");
  if (opts.points != 2 && opts.points != 4) throw DomainError("grad_check: points must be 2 or 4");
  for (auto* p : params) p->zero_grad();
  std::vector<Tensor> analytic;
  {
    Graph g;
    Var root = loss(g);
    if (!std::isfinite(g.scalar(root))) throw NumericalError("grad_check: non-finite loss");
    g.backward(root);
    for (auto* p : params) analytic.push_back(p->grad);
  }

  GradReport report;
  report.step = opts.step;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    GradReport::Entry e{p.name, 0.0, 0.0, p.value.size()};
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      auto at = [&](double offset) {
        p.value[i] = saved + offset;
        return evaluate(loss);
      };
      const double h = opts.step;
      double numeric = 0.0;
      if (opts.points == 2) {
        numeric = (at(h) - at(-h)) / (2.0 * h);
      } else {
        numeric = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
      }
      p.value[i] = saved;
      const double a = analytic[k][i];
      e.max_abs_error = std::max(e.max_abs_error, std::abs(a - numeric));
      e.max_rel_error = std::max(e.max_rel_error, relative_error(a, numeric, opts.denominator_floor));
    }
    if (e.max_rel_error >= report.max_rel_error) {
      report.max_rel_error = e.max_rel_error;
      report.worst_parameter = p.name;
    }
    report.entries.push_back(std::move(e));
  }
  for (auto* p : params) p->zero_grad();
  return report;
}

}  // namespace vc::compute
