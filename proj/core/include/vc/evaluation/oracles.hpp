#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "vc/compute/graph.hpp"

namespace vc::evaluation {

struct SuiteResult {
  std::string suite;
  bool passed = true;
  // One human-readable line per check, with its worst-case margin.
  std::vector<std::string> lines;
  void check(bool ok, const std::string& line);
};

inline constexpr double kGradTolerance = 1e-4;
inline constexpr double kElboTolerance = 1e-12;

// 1,000 seeded toys: ELBO <= log marginal, KL >= 0, tight at the posterior,
// point-mass reduction.
SuiteResult run_elbo_suite(std::uint64_t seed, std::size_t toys = 1000);
// Finite-difference checks of every graph operation, the LSTM, encoder,
// decoder and end-to-end losses in every training mode.
SuiteResult run_gradcheck_suite(std::uint64_t seed);
// K = 1 score-function estimator on an enumerable 2-region toy.
SuiteResult run_reinforce_suite(std::uint64_t seed, std::size_t samples = 10000);
// MIL aggregation identities.
SuiteResult run_mil_suite(std::uint64_t seed);

// Dispatches on "elbo", "gradcheck", "reinforce" or "mil"; throws
// ConfigError for anything else.
SuiteResult run_oracle(const std::string& suite, std::uint64_t seed);

// Two-region toy: p(x) = softmax_x(a . f_x), L_c(x) = 1.5 + |c * h_x - t_x|^2 / 2.
// Parameters a (3) and c (6) form the 9 gradient coordinates.
class ReinforceToy {
 public:
  explicit ReinforceToy(std::uint64_t seed);

  static constexpr std::size_t kDim = 9;
  std::vector<double> posterior();
  std::vector<double> losses();
  // grad of sum_x p(x) L_c(x), by enumeration.
  std::vector<double> exact_gradient();
  // Gradient of the surrogate for sampled region k; also returns L_c(k).
  std::vector<double> sample_gradient(std::size_t k, double baseline, double* loss = nullptr);

 private:
  compute::Var posterior_logits(compute::Graph& g);
  compute::Var loss_of(compute::Graph& g, std::size_t x);
  std::vector<double> gradient();

  compute::ParameterSet params_;
  compute::Parameter* a_ = nullptr;
  compute::Parameter* c_ = nullptr;
  std::vector<compute::Vector> f_, h_, t_;
};

struct EstimatorStats {
  std::vector<double> mean, variance, standard_error;
};

struct ReinforceComparison {
  std::vector<double> exact;
  EstimatorStats with_baseline, without_baseline;
  double final_baseline = 0.0;
};

// Common random numbers: both estimators see the same samples. The baseline
// is warmed up for `warmup` draws, then keeps its moving-average update.
ReinforceComparison compare_reinforce(std::uint64_t seed, std::size_t samples, std::size_t warmup = 500);

}  // namespace vc::evaluation
