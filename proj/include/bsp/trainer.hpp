#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bsp/feedback.hpp"
#include "bsp/model.hpp"
#include "bsp/objectives.hpp"
#include "bsp/sparse_vector.hpp"

namespace bsp {

struct TrainerConfig {
  ObjectiveKind objective = ObjectiveKind::EL;
  double gamma = 1e-2;              ///< constant learning rate
  std::size_t iterations = 1000;    ///< T
  double clip_k = 0.0;              ///< CE only
  double lambda = 0.0;              ///< CE only; update adds (lambda / T) w
  std::uint64_t seed = 1;
  std::size_t epoch_size = 100;     ///< D
  std::size_t eval_every = 0;       ///< 0 means every D iterations
  std::size_t snapshot_count = 64;  ///< (w, γs) reservoir for the Lipschitz estimate
  std::string schedule = "constant";  ///< learning-rate schedule; only "constant" is implemented

  std::size_t eval_interval() const { return eval_every == 0 ? epoch_size : eval_every; }
  /// Throws ConfigError on an invalid combination.
  void validate() const;
};

/// Per-iteration record. Iteration t (1-based) computes s_t at w_{t-1} and
/// produces w_t.
struct StepRecord {
  std::size_t t = 0;
  std::size_t instance = 0;
  double scaled_grad_norm_sq = 0.0;  ///< ||γ s_t||²
  double sampled_loss = 0.0;         ///< Δ(ỹ_t), or the pair feedback for PR
};

struct Checkpoint {
  std::size_t t = 0;
  SparseVector weights;
};

struct DevScore {
  std::size_t t = 0;
  double loss = 0.0;
};

/// Weights at which a gradient was evaluated, with that (scaled) gradient.
struct Snapshot {
  std::size_t t = 0;
  SparseVector weights;      ///< w_{t-1}
  SparseVector scaled_grad;  ///< γ s_t
};

struct Trajectory {
  double gamma = 0.0;
  std::size_t iterations = 0;
  std::vector<Checkpoint> checkpoints;      ///< t = 0 and every eval interval
  std::vector<DevScore> dev_scores;         ///< aligned with checkpoints
  std::vector<StepRecord> steps;            ///< one per iteration
  std::vector<SparseVector> epoch_grads;    ///< γ s_{kD}, k = 1..⌊T/D⌋
  std::vector<Snapshot> snapshots;          ///< evenly spaced over 1..T
  SparseVector final_weights;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Bandit structured prediction: for t = 1..T draw x uniformly (with
/// replacement), sample a structure (or pair), obtain feedback, and step
/// w ← w − γ(s + (λ/T) w) with λ = 0 unless the objective is CE.
/// Observers receive records in iteration order.
Trajectory train(const TrainerConfig& config, const ChainModel& model, std::span<const ChainInstance> train_data,
                 std::span<const ChainInstance> dev_data, const FeedbackOracle& oracle,
                 const SparseVector& initial_weights = {}, const StepObserver& observer = {});

struct Selection {
  std::size_t index = 0;  ///< into Trajectory::checkpoints
  std::size_t t = 0;
  double dev_loss = 0.0;
  SparseVector weights;
};

/// One update: w ← (1 − γλ/T) w − γ s.
void apply_update(SparseVector& w, const SparseVector& s, double gamma, double lambda, std::size_t iterations);

/// Checkpoint with the smallest dev loss; ties go to the earliest.
Selection select_best(const Trajectory& trajectory);

/// Mean task loss of MAP predictions against gold.
double evaluate(const ChainModel& model, const SparseVector& w, std::span<const ChainInstance> data, LossKind loss);

/// Iterations at which snapshots are taken: `count` evenly spaced points in 1..T.
std::vector<std::size_t> snapshot_schedule(std::size_t iterations, std::size_t count);

}  // namespace bsp
