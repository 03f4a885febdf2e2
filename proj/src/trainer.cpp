#include "bsp/trainer.hpp"

#include <algorithm>
#include <optional>
#include <string>

#include "bsp/errors.hpp"
#include "bsp/inference.hpp"
#include "bsp/random.hpp"

namespace bsp {

void TrainerConfig::validate() const {
  if (!(gamma >= 0.0)) throw ConfigError("gamma must be non-negative");
  if (iterations == 0) throw ConfigError("iterations must be positive");
  if (!(clip_k >= 0.0 && clip_k < 1.0)) throw ConfigError("clip_k must lie in [0, 1)");
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
  if (epoch_size == 0) throw ConfigError("epoch_size must be positive");
  if (schedule != "constant") throw ConfigError("unsupported schedule '" + schedule + "' (only constant is implemented)");
}

std::vector<std::size_t> snapshot_schedule(std::size_t iterations, std::size_t count) {
  std::vector<std::size_t> at;
  if (count == 0 || iterations == 0) return at;
  if (count == 1) return {iterations};
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t t = 1 + (j * (iterations - 1)) / (count - 1);
    if (at.empty() || at.back() != t) at.push_back(t);
  }
  return at;
}

namespace {

struct StepResult {
  SparseVector gradient;
  double sampled_loss = 0.0;
};

StepResult stochastic_gradient(const TrainerConfig& config, const ChainModel& model, const FeatureTable& table,
                               const SparseVector& w, std::size_t index, const FeedbackOracle& oracle, Rng& rng) {
  StepResult step;
  const ChainPosterior posterior(build_lattice(model, table, w));
  switch (config.objective) {
    case ObjectiveKind::EL: {
      const Labeling y = posterior.sample(rng);
      step.sampled_loss = oracle.loss(index, y);
      step.gradient = el_gradient(model, table, posterior, y, step.sampled_loss);
      break;
    }
    case ObjectiveKind::PR_BIN:
    case ObjectiveKind::PR_CONT: {
      const ChainPosterior negative(build_lattice(model, table, w, -1.0));
      const PairSample pair = pr_sample_pair(posterior, negative, rng);
      step.sampled_loss = oracle.pair_loss(index, pair, pair_mode(config.objective));
      step.gradient = pr_gradient(model, table, posterior, negative, pair, step.sampled_loss);
      break;
    }
    case ObjectiveKind::CE: {
      const Labeling y = posterior.sample(rng);
      step.sampled_loss = oracle.loss(index, y);
      step.gradient = ce_gradient(model, table, posterior, y, 1.0 - step.sampled_loss, ClippingConfig(config.clip_k));
      break;
    }
  }
  return step;
}

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& where) {
  const std::string message = where + e.what();
  if (dynamic_cast<const DataError*>(&e)) throw DataError(message);
  if (dynamic_cast<const NumericError*>(&e)) throw NumericError(message);
  if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(message);
  if (dynamic_cast<const BudgetError*>(&e)) throw BudgetError(message);
  throw Error(message);
}

}  // namespace

Trajectory train(const TrainerConfig& config, const ChainModel& model, std::span<const ChainInstance> train_data,
                 std::span<const ChainInstance> dev_data, const FeedbackOracle& oracle,
                 const SparseVector& initial_weights, const StepObserver& observer) {
  config.validate();
  if (train_data.empty()) throw DataError("empty training set");
  if (dev_data.empty()) throw DataError("empty development set");
  if (oracle.size() != train_data.size()) throw DataError("feedback oracle does not cover the training set");

  // Emission ids depend only on tokens; compute them once per instance.
  std::vector<FeatureTable> tables;
  tables.reserve(train_data.size());
  for (const auto& x : train_data) tables.push_back(model.features(x));

  const std::size_t T = config.iterations;
  const double gamma = config.gamma;
  const double lambda = config.objective == ObjectiveKind::CE ? config.lambda : 0.0;
  const std::size_t eval_interval = config.eval_interval();
  const auto snapshot_at = snapshot_schedule(T, config.snapshot_count);
  auto next_snapshot = snapshot_at.begin();

  Trajectory trajectory;
  trajectory.gamma = gamma;
  trajectory.iterations = T;
  trajectory.steps.reserve(T);

  SparseVector w = initial_weights;
  auto record_checkpoint = [&](std::size_t t) {
    trajectory.checkpoints.push_back({t, w});
    trajectory.dev_scores.push_back({t, evaluate(model, w, dev_data, oracle.kind())});
  };
  record_checkpoint(0);

  Rng rng(config.seed);
  for (std::size_t t = 1; t <= T; ++t) {
    const std::size_t index = rng.index(train_data.size());
    StepResult step;
    try {
      step = stochastic_gradient(config, model, tables[index], w, index, oracle, rng);
    } catch (const Error& e) {
      rethrow_with_context(e, "iteration " + std::to_string(t) + ", instance " + std::to_string(index) + ": ");
    }

    const double grad_norm_sq = step.gradient.squared_norm();
    StepRecord record{t, index, gamma * gamma * grad_norm_sq, step.sampled_loss};
    if (t % config.epoch_size == 0) trajectory.epoch_grads.push_back(gamma * step.gradient);
    if (next_snapshot != snapshot_at.end() && *next_snapshot == t) {
      trajectory.snapshots.push_back({t, w, gamma * step.gradient});
      ++next_snapshot;
    }

    apply_update(w, step.gradient, gamma, lambda, T);

    trajectory.steps.push_back(record);
    if (observer) observer(record);
    if (t % eval_interval == 0) record_checkpoint(t);
  }
  trajectory.final_weights = std::move(w);
  return trajectory;
}

void apply_update(SparseVector& w, const SparseVector& s, double gamma, double lambda, std::size_t iterations) {
  if (lambda > 0.0) w *= 1.0 - gamma * lambda / static_cast<double>(iterations);
  w.add_scaled(s, -gamma);
}

Selection select_best(const Trajectory& trajectory) {
  if (trajectory.dev_scores.empty() || trajectory.checkpoints.size() != trajectory.dev_scores.size()) {
    throw DataError("trajectory has no dev evaluations");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < trajectory.dev_scores.size(); ++i) {
    if (trajectory.dev_scores[i].loss < trajectory.dev_scores[best].loss) best = i;
  }
  return {best, trajectory.checkpoints[best].t, trajectory.dev_scores[best].loss, trajectory.checkpoints[best].weights};
}

double evaluate(const ChainModel& model, const SparseVector& w, std::span<const ChainInstance> data, LossKind loss) {
  if (data.empty()) throw DataError("cannot evaluate on an empty dataset");
  std::optional<BioScheme> scheme;
  if (loss == LossKind::ChunkF1) scheme.emplace(model.alphabet());
  double total = 0.0;
  for (const auto& x : data) {
    if (!x.gold) throw DataError("evaluation instance without gold labeling");
    total += task_loss(loss, scheme ? &*scheme : nullptr, *x.gold, map_decode(model, w, x));
  }
  return total / static_cast<double>(data.size());
}

}  // namespace bsp
