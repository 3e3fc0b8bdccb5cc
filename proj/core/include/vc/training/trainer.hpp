#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "vc/compute/optimizer.hpp"
#include "vc/model.hpp"
#include "vc/training/checkpoint.hpp"
#include "vc/training/losses.hpp"

namespace vc::training {

enum class Objective { kSupervised, kUnsupervised };

struct TrainConfig {
  std::size_t iterations = 4000;  // total, counted from iteration 0
  Schedule schedule{0.01, 0.1, 3000};
  double momentum = 0.95;
  double weight_decay = 5e-4;
  double entropy_weight = kEntropyWeight;
  double clip_norm = 10.0;  // <= 0 disables clipping
  Objective objective = Objective::kSupervised;
  std::string split = "train";
  std::size_t log_every = 100;
  std::size_t checkpoint_every = 0;  // 0: only the caller's final save
  std::size_t accuracy_window = 100;
  std::uint64_t seed = 1;
};

struct StepResult {
  double loss = 0.0;
  double loss_ce = 0.0;
  bool has_referent = false;
  bool correct = false;
};

enum class TrainStatus { kCompleted, kNumericalFailure };

struct TrainSummary {
  TrainStatus status = TrainStatus::kCompleted;
  std::uint64_t iteration = 0;  // next iteration to run
  double window_accuracy = 0.0;
  std::string diagnostic;
};

// e.g. "supervised/plain", "unsupervised/with_generation_pg/wo_reg".
std::string mode_name(const ModelConfig& model, Objective objective);

void write_metrics_header(std::ostream& os);

// One expression per step, SGD with momentum. The visiting order and every
// random draw (dropout, policy-gradient samples) derive from the seed and
// the iteration number, so resuming from a snapshot replays the same stream.
class Trainer {
 public:
  Trainer(Model& model, const data::Dataset& ds, TrainConfig cfg, const TrainerSnapshot& resume = {});

  // Runs one update on expression `e` as iteration `iteration`. Parameters are
  // left untouched when NumericalError is thrown.
  StepResult step(const data::ExpressionRecord& e, std::uint64_t iteration);

  // Trains until cfg.iterations. Metric rows go to `metrics` (header not
  // included); `on_checkpoint` runs every checkpoint_every iterations.
  TrainSummary run(std::ostream* metrics = nullptr,
                   const std::function<void(const TrainerSnapshot&)>& on_checkpoint = {});

  TrainerSnapshot snapshot() const;
  std::uint64_t iteration() const { return iteration_; }
  double baseline() const { return baseline_; }
  const data::ExpressionRecord& expression_at(std::uint64_t iteration);

 private:
  Model& model_;
  const data::Dataset& ds_;
  TrainConfig cfg_;
  std::vector<const data::ExpressionRecord*> pool_;
  std::vector<std::size_t> order_;
  std::uint64_t order_epoch_ = ~std::uint64_t{0};
  compute::SgdMomentum opt_;
  std::uint64_t iteration_ = 0;
  double baseline_ = 0.0;
  std::deque<bool> window_;
};

}  // namespace vc::training
