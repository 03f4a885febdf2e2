#include "bsp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "bsp/errors.hpp"

namespace bsp {

double grad_norm_sq(const Trajectory& trajectory, std::size_t t) {
  const auto it = std::lower_bound(trajectory.steps.begin(), trajectory.steps.end(), t,
                                   [](const StepRecord& r, std::size_t value) { return r.t < value; });
  if (it == trajectory.steps.end() || it->t != t) {
    throw DataError("no step record for iteration " + std::to_string(t));
  }
  return it->scaled_grad_norm_sq;
}

namespace {

constexpr double kMinWeightDistance = 1e-12;
constexpr int kRedraws = 32;

}  // namespace

double lipschitz_estimate(std::span<const Snapshot> snapshots, std::size_t n_pairs, Rng& rng) {
  const std::size_t m = snapshots.size();
  if (m < 2) throw NumericError("Lipschitz estimate needs at least two snapshots");
  const bool all_identical = std::all_of(snapshots.begin() + 1, snapshots.end(), [&](const Snapshot& s) {
    return s.weights == snapshots.front().weights;
  });
  if (all_identical) throw NumericError("Lipschitz estimate undefined: all snapshot weights are identical");

  double best = 0.0;
  bool any = false;
  auto consider = [&](std::size_t i, std::size_t j) {
    const double dw = distance(snapshots[i].weights, snapshots[j].weights);
    if (dw < kMinWeightDistance) return false;
    best = std::max(best, distance(snapshots[i].scaled_grad, snapshots[j].scaled_grad) / dw);
    any = true;
    return true;
  };

  const std::size_t all_pairs = m * (m - 1) / 2;
  if (n_pairs >= all_pairs) {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i + 1; j < m; ++j) consider(i, j);
    }
  } else {
    for (std::size_t p = 0; p < n_pairs; ++p) {
      for (int attempt = 0; attempt < kRedraws; ++attempt) {
        const std::size_t i = rng.index(m);
        std::size_t j = rng.index(m - 1);
        if (j >= i) ++j;
        if (consider(i, j)) break;
      }
    }
  }
  if (!any) throw NumericError("Lipschitz estimate undefined: no pair with distinct weights was drawn");
  return best;
}

double variance_estimate(std::span<const SparseVector> epoch_grads) {
  const std::size_t K = epoch_grads.size();
  if (K < 2) throw NumericError("variance estimate needs at least two epoch gradients, got " + std::to_string(K));
  SparseVector mean;
  for (const auto& g : epoch_grads) mean += g;
  mean *= 1.0 / static_cast<double>(K);
  double total = 0.0;
  for (const auto& g : epoch_grads) total += squared_distance(g, mean);
  return total / static_cast<double>(K);
}

ConvergenceReport make_convergence_report(const Trajectory& trajectory, const TrainerConfig& config,
                                          std::size_t lipschitz_pairs) {
  ConvergenceReport report;
  report.T = config.iterations;
  report.D = config.epoch_size;
  report.K = config.iterations / config.epoch_size;
  report.seed = config.seed;
  report.objective = config.objective;
  report.gamma = config.gamma;
  report.clip_k = config.clip_k;
  report.lambda = config.lambda;
  report.grad_norm_sq_at_T = grad_norm_sq(trajectory, config.iterations);
  // Separate stream so the estimate does not depend on how training consumed randomness.
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  report.lipschitz_est = lipschitz_estimate(trajectory.snapshots, lipschitz_pairs, rng);
  report.variance_est = variance_estimate(trajectory.epoch_grads);
  return report;
}

namespace {

bool same(double a, double b) { return a == b || std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

RunComparison compare_runs(std::span<const ConvergenceReport> reports) {
  if (reports.empty()) throw DataError("no reports to compare");
  for (const auto& r : reports) {
    if (r.T != reports.front().T || r.D != reports.front().D || !same(r.gamma, reports.front().gamma)) {
      throw DataError("reports do not share the same horizon T, epoch size D and learning rate");
    }
  }

  // Per-objective means, in ObjectiveKind order.
  struct Sums {
    double grad = 0.0, lipschitz = 0.0, variance = 0.0;
    int count = 0;
  };
  std::map<ObjectiveKind, Sums> by_objective;
  for (const auto& r : reports) {
    auto& s = by_objective[r.objective];
    s.grad += r.grad_norm_sq_at_T;
    s.lipschitz += r.lipschitz_est;
    s.variance += r.variance_est;
    ++s.count;
  }

  RunComparison comparison;
  auto rank = [&](std::string metric, double Sums::*field) {
    MetricRanking ranking{std::move(metric), {}};
    for (const auto& [kind, s] : by_objective) ranking.ranked.emplace_back(std::string(to_string(kind)), s.*field / s.count);
    std::stable_sort(ranking.ranked.begin(), ranking.ranked.end(),
                     [](const auto& a, const auto& b) { return a.second < b.second; });
    comparison.rankings.push_back(std::move(ranking));
  };
  rank("grad_norm_sq", &Sums::grad);
  rank("lipschitz", &Sums::lipschitz);
  rank("variance", &Sums::variance);

  auto mean_variance = [&](ObjectiveKind kind) -> std::optional<double> {
    const auto it = by_objective.find(kind);
    if (it == by_objective.end()) return std::nullopt;
    return it->second.variance / it->second.count;
  };
  const auto el = mean_variance(ObjectiveKind::EL);
  const auto ce = mean_variance(ObjectiveKind::CE);
  const auto pr_bin = mean_variance(ObjectiveKind::PR_BIN);
  const auto pr_cont = mean_variance(ObjectiveKind::PR_CONT);
  if (el && ce && (pr_bin || pr_cont)) {
    bool ordered = *el < *ce;
    if (pr_bin) ordered = ordered && *pr_bin < *el;
    if (pr_cont) ordered = ordered && *pr_cont < *el;
    comparison.variance_pr_el_ce = ordered;
  }

  std::map<std::uint64_t, std::vector<const ConvergenceReport*>> by_seed;
  for (const auto& r : reports) by_seed[r.seed].push_back(&r);
  for (const auto& [seed, runs] : by_seed) {
    for (const auto* pr : runs) {
      if (!is_pairwise(pr->objective)) continue;
      for (const auto* c : runs) {
        if (c->objective != ObjectiveKind::CE) continue;
        const bool below = pr->variance_est < c->variance_est;
        comparison.variance_pr_below_ce_each_seed =
            comparison.variance_pr_below_ce_each_seed.value_or(true) && below;
      }
    }
  }
  return comparison;
}

std::string RunComparison::summary() const {
  std::ostringstream out;
  out.precision(6);
  for (const auto& ranking : rankings) {
    out << ranking.metric << ":";
    for (std::size_t i = 0; i < ranking.ranked.size(); ++i) {
      out << (i == 0 ? " " : " < ") << ranking.ranked[i].first << "=" << ranking.ranked[i].second;
    }
    out << "\n";
  }
  auto flag = [](const std::optional<bool>& v) { return v ? (*v ? "yes" : "no") : "n/a"; };
  out << "variance PR < EL < CE: " << flag(variance_pr_el_ce) << "\n";
  out << "variance PR < CE for every seed: " << flag(variance_pr_below_ce_each_seed) << "\n";
  return out.str();
}

}  // namespace bsp
