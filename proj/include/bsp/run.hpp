#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bsp/config.hpp"
#include "bsp/oracle.hpp"
#include "bsp/report.hpp"
#include "bsp/trainer.hpp"

namespace bsp {

struct TrainResult {
  RunReport report;
  Trajectory trajectory;
  Selection selection;
};

/// Reads the datasets, trains, selects the checkpoint with the best dev loss,
/// evaluates it on the test set (when given) and writes the report and the
/// selected checkpoint (when paths are given).
TrainResult run_train(const RunConfig& config, const StepObserver& observer = {});

enum class CheckStatus { Pass, Fail, Skipped };

struct CheckLine {
  std::string property;
  double measured = 0.0;
  double tolerance = 0.0;
  CheckStatus status = CheckStatus::Pass;
  std::string note;
};

struct OracleCheckOptions {
  std::uint64_t seed = 2016;
  std::size_t fixtures = 20;           ///< fixtures for exact-inference and gradient checks
  std::size_t unbiased_weights = 20;   ///< seeded weight vectors per unbiasedness check
  std::size_t convexity_pairs = 100;
  double clip_k = 5e-3;                ///< reported as skipped: clipping biases the estimate
  GradientHook corrupt_gradient;       ///< negative-control hook on stochastic gradients
};

struct OracleCheckResult {
  std::vector<CheckLine> lines;
  bool passed() const;
  std::string format() const;
};

/// Certifies inference, objectives and stochastic gradients against
/// enumeration on seeded fixtures.
OracleCheckResult run_oracle_check(const OracleCheckOptions& options = {});

/// max over coords of |approx − exact| / max(|approx|, |exact|, floor).
double max_relative_error(const SparseVector& approx, const SparseVector& exact,
                          std::span<const FeatureId> coordinates, double floor);

inline constexpr double kRelativeErrorFloor = 1e-2;

}  // namespace bsp
