#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsp/objectives.hpp"
#include "bsp/random.hpp"
#include "bsp/sparse_vector.hpp"
#include "bsp/trainer.hpp"

namespace bsp {

/// Convergence estimates of one run. All three are computed on
/// learning-rate-scaled stochastic gradients γ·s.
struct ConvergenceReport {
  double grad_norm_sq_at_T = 0.0;  ///< ||γ s_T||²
  double lipschitz_est = 0.0;      ///< max ||γs_i − γs_j|| / ||w_i − w_j||
  double variance_est = 0.0;       ///< (1/K) Σ ||γs_{kD} − mean||²
  std::size_t T = 0;
  std::size_t D = 0;
  std::size_t K = 0;
  std::uint64_t seed = 0;
  ObjectiveKind objective = ObjectiveKind::EL;
  double gamma = 0.0;
  double clip_k = 0.0;
  double lambda = 0.0;
};

/// ||γ s_t||² from the step record of iteration t.
double grad_norm_sq(const Trajectory& trajectory, std::size_t t);

/// Largest ratio ||s_i − s_j|| / ||w_i − w_j|| over `n_pairs` uniformly drawn
/// pairs of distinct snapshots. Pairs whose weights are closer than 1e-12 are
/// redrawn a bounded number of times and then skipped. When n_pairs covers
/// every unordered pair, all pairs are scanned instead of sampled.
/// Throws NumericError if every snapshot has the same weights.
double lipschitz_estimate(std::span<const Snapshot> snapshots, std::size_t n_pairs, Rng& rng);

/// Mean squared deviation of the epoch-boundary gradients from their mean.
/// Needs K ≥ 2.
double variance_estimate(std::span<const SparseVector> epoch_grads);

inline constexpr std::size_t kDefaultLipschitzPairs = 500;

ConvergenceReport make_convergence_report(const Trajectory& trajectory, const TrainerConfig& config,
                                          std::size_t lipschitz_pairs = kDefaultLipschitzPairs);

struct MetricRanking {
  std::string metric;
  /// (objective, mean over runs), ascending.
  std::vector<std::pair<std::string, double>> ranked;
};

struct RunComparison {
  std::vector<MetricRanking> rankings;
  /// σ²(PR) < σ²(EL) < σ²(CE) on per-objective means; empty unless PR, EL and
  /// CE runs are all present. Every PR variant must sit below EL.
  std::optional<bool> variance_pr_el_ce;
  /// σ²(PR) < σ²(CE) for every seed that has both; empty if no seed does.
  std::optional<bool> variance_pr_below_ce_each_seed;

  std::string summary() const;
};

/// Ranks objectives per metric. Reports must share T, γ and D.
RunComparison compare_runs(std::span<const ConvergenceReport> reports);

}  // namespace bsp
