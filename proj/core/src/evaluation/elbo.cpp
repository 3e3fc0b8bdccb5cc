#include "vc/evaluation/elbo.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vc/errors.hpp"

namespace vc::evaluation {

void ToyJoint::validate() const {
  std::vector<std::string> issues;
  if (n == 0 || m == 0) issues.push_back("toy joint needs n > 0 and m > 0");
  if (p.size() != n * m) issues.push_back("p has " + std::to_string(p.size()) + " entries, expected n*m");
  if (q.size() != n * m) issues.push_back("q has " + std::to_string(q.size()) + " entries, expected n*m");
  if (!issues.empty()) throw ValidationError(issues);
  long double total = 0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) issues.push_back("p has a negative or non-finite entry");
    total += v;
  }
  if (std::fabs(static_cast<double>(total) - 1.0) > 1e-9) issues.push_back("p sums to " + std::to_string(static_cast<double>(total)));
  for (std::size_t x = 0; x < n; ++x) {
    long double s = 0;
    for (std::size_t z = 0; z < m; ++z) {
      const double v = proposal(x, z);
      if (!(v >= 0.0) || !std::isfinite(v)) issues.push_back("q(.|" + std::to_string(x) + ") has a negative entry");
      s += v;
    }
    if (std::fabs(static_cast<double>(s) - 1.0) > 1e-9)
      issues.push_back("q(.|" + std::to_string(x) + ") sums to " + std::to_string(static_cast<double>(s)));
  }
  if (!issues.empty()) throw ValidationError(issues);
}

void ToyJoint::set_exact_posterior() {
  for (std::size_t x = 0; x < n; ++x) {
    long double s = 0;
    for (std::size_t z = 0; z < m; ++z) s += joint(x, z);
    for (std::size_t z = 0; z < m; ++z)
      q[x * m + z] = s > 0 ? static_cast<double>(joint(x, z) / s) : 1.0 / static_cast<double>(m);
  }
}

ElboResult elbo_oracle(const ToyJoint& toy, std::size_t x) {
  toy.validate();
  if (x >= toy.n) throw DomainError("elbo_oracle: referent index out of range");
  const std::size_t m = toy.m;
  std::vector<long double> prior(m, 0.0L);
  for (std::size_t r = 0; r < toy.n; ++r)
    for (std::size_t z = 0; z < m; ++z) prior[z] += toy.joint(r, z);

  constexpr long double inf = std::numeric_limits<long double>::infinity();
  long double marginal = 0, expected = 0, kl = 0;
  for (std::size_t z = 0; z < m; ++z) {
    const long double pxz = toy.joint(x, z);
    marginal += pxz;
    const long double qz = toy.proposal(x, z);
    if (qz == 0) continue;
    // log p(x | z) = log p(x, z) - log p(z); p(z) >= p(x, z).
    expected += pxz > 0 ? qz * (std::log(pxz) - std::log(prior[z])) : -inf;
    kl += prior[z] > 0 ? qz * (std::log(qz) - std::log(prior[z])) : inf;
  }
  ElboResult r;
  r.log_marginal = marginal > 0 ? static_cast<double>(std::log(marginal)) : -std::numeric_limits<double>::infinity();
  r.kl = static_cast<double>(kl);
  r.elbo = static_cast<double>(expected - kl);
  return r;
}

ToyJoint random_toy(Rng& rng, const ToyOptions& opts) {
  ToyJoint t;
  t.n = static_cast<std::size_t>(rng.integer(1, static_cast<std::int64_t>(opts.max_regions)));
  t.m = std::size_t{1} << rng.integer(0, static_cast<std::int64_t>(opts.max_log2_configs));
  t.p.resize(t.n * t.m);
  t.q.resize(t.n * t.m);
  const bool sparse = rng.uniform() < opts.sparsity;
  const double scale = rng.uniform(0.1, 3.0);
  long double total = 0;
  for (auto& v : t.p) {
    v = std::exp(scale * rng.normal());
    if (sparse && rng.uniform() < 0.3) v = 0.0;
    total += v;
  }
  if (total == 0) {
    t.p[0] = 1.0;
    total = 1.0;
  }
  for (auto& v : t.p) v = static_cast<double>(v / total);
  for (std::size_t x = 0; x < t.n; ++x) {
    long double s = 0;
    for (std::size_t z = 0; z < t.m; ++z) {
      double v = std::exp(scale * rng.normal());
      // Sparse proposals stay inside the support of p.
      if (sparse && (t.joint(x, z) == 0.0 || rng.uniform() < 0.3)) v = 0.0;
      t.q[x * t.m + z] = v;
      s += v;
    }
    if (s == 0) {
      for (std::size_t z = 0; z < t.m; ++z) t.q[x * t.m + z] = 1.0 / static_cast<double>(t.m);
      continue;
    }
    for (std::size_t z = 0; z < t.m; ++z) t.q[x * t.m + z] = static_cast<double>(t.q[x * t.m + z] / s);
  }
  return t;
}

}  // namespace vc::evaluation
