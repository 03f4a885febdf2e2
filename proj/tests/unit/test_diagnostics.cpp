#include <doctest.h>

#include <algorithm>
#include <map>

#include "bsp/diagnostics.hpp"
#include "bsp/errors.hpp"
#include "bsp/fixtures.hpp"
#include "bsp/synthetic.hpp"

using namespace bsp;

namespace {

double two_pass_variance(const std::vector<SparseVector>& vs) {
  std::map<FeatureId, double> mean;
  for (const auto& v : vs) {
    for (const auto& [id, x] : v) mean[id] += x / static_cast<double>(vs.size());
  }
  double total = 0.0;
  for (const auto& v : vs) {
    for (const auto& [id, m] : mean) {
      const double d = v.get(id) - m;
      total += d * d;
    }
  }
  return total / static_cast<double>(vs.size());
}

SparseVector relabel(const SparseVector& v) {
  SparseVector out;
  for (const auto& [id, x] : v) out.set(id ^ 0x5bd1e995abcdef01ULL, x);
  return out;
}

Trajectory fixture_trajectory(ObjectiveKind kind, double gamma, std::size_t T) {
  const auto f = make_oracle_fixtures(21, 1, 4096).front();
  const FeedbackOracle oracle(f.loss, f.model.alphabet(), f.data);
  TrainerConfig c;
  c.objective = kind;
  c.gamma = gamma;
  c.iterations = T;
  c.epoch_size = 10;
  c.snapshot_count = 16;
  return train(c, f.model, f.data, f.data, oracle);
}

ConvergenceReport report(ObjectiveKind kind, std::uint64_t seed, double variance) {
  ConvergenceReport r;
  r.objective = kind;
  r.seed = seed;
  r.variance_est = variance;
  r.T = 1000;
  r.D = 10;
  r.K = 100;
  r.gamma = 0.01;
  return r;
}

}  // namespace

TEST_CASE("variance estimate") {
  const SparseVector v{{1, 3.0}, {4, -1.0}};
  CHECK(variance_estimate(std::vector<SparseVector>{v, v, v}) == 0.0);
  CHECK(variance_estimate(std::vector<SparseVector>{v, -1.0 * v}) == doctest::Approx(v.squared_norm()));
  CHECK_THROWS_AS(variance_estimate(std::vector<SparseVector>{v}), NumericError);

  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<SparseVector> vs(5);
    for (auto& x : vs) {
      for (int k = 0; k < 6; ++k) x.set(rng.index(10), rng.normal());
    }
    const double est = variance_estimate(vs);
    CHECK(est >= 0.0);
    CHECK(std::abs(est - two_pass_variance(vs)) <= 1e-12);
  }
}

TEST_CASE("lipschitz estimate examples") {
  Rng rng(1);
  const SparseVector s{{1, 1.0}};
  const std::vector<Snapshot> identical{{1, SparseVector{{1, 1.0}}, s}, {2, SparseVector{{1, 2.0}}, s}};
  CHECK(lipschitz_estimate(identical, 500, rng) == 0.0);

  // ||s1 - s2|| = 2 and ||w1 - w2|| = 4.
  const std::vector<Snapshot> two{{1, SparseVector{{1, 0.0}}, SparseVector{{2, 1.0}}},
                                  {2, SparseVector{{1, 4.0}}, SparseVector{{2, -1.0}}}};
  CHECK(lipschitz_estimate(two, 500, rng) == 0.5);
  CHECK(lipschitz_estimate(two, 1, rng) == 0.5);

  const std::vector<Snapshot> same{{1, SparseVector{{1, 1.0}}, s}, {2, SparseVector{{1, 1.0}}, -1.0 * s}};
  CHECK_THROWS_AS(lipschitz_estimate(same, 500, rng), NumericError);
  CHECK_THROWS_AS(lipschitz_estimate(std::span<const Snapshot>(two.data(), 1), 500, rng), NumericError);
}

TEST_CASE("lipschitz estimate skips near-coincident weights") {
  Rng rng(2);
  const std::vector<Snapshot> snaps{{1, SparseVector{{1, 1.0}}, SparseVector{{1, 1.0}}},
                                    {2, SparseVector{{1, 1.0 + 1e-14}}, SparseVector{{1, 5.0}}},
                                    {3, SparseVector{{1, 3.0}}, SparseVector{{1, 2.0}}}};
  // Pairs (1,3) and (2,3) have ratios 0.5 and 1.5; (1,2) is skipped.
  CHECK(lipschitz_estimate(snaps, 500, rng) == doctest::Approx(1.5));
}

TEST_CASE("lipschitz estimate is invariant to snapshot order on fixture trajectories") {
  for (const auto kind : {ObjectiveKind::EL, ObjectiveKind::PR_CONT, ObjectiveKind::CE}) {
    const auto traj = fixture_trajectory(kind, 0.3, 400);
    std::vector<Snapshot> shuffled = traj.snapshots;
    Rng order(3);
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[order.index(i)]);
    std::reverse(shuffled.begin(), shuffled.end());
    Rng a(4), b(5);
    CHECK(lipschitz_estimate(traj.snapshots, 500, a) == lipschitz_estimate(shuffled, 500, b));
  }
}

TEST_CASE("estimators are invariant under feature-id relabeling") {
  const auto traj = fixture_trajectory(ObjectiveKind::EL, 0.3, 400);
  std::vector<Snapshot> snaps;
  for (const auto& s : traj.snapshots) snaps.push_back({s.t, relabel(s.weights), relabel(s.scaled_grad)});
  std::vector<SparseVector> grads;
  for (const auto& g : traj.epoch_grads) grads.push_back(relabel(g));
  Rng a(6), b(6);
  CHECK(lipschitz_estimate(traj.snapshots, 50, a) == doctest::Approx(lipschitz_estimate(snaps, 50, b)).epsilon(1e-14));
  CHECK(variance_estimate(traj.epoch_grads) == doctest::Approx(variance_estimate(grads)).epsilon(1e-14));
}

TEST_CASE("lipschitz estimate scales linearly with the gradient scale") {
  const auto traj = fixture_trajectory(ObjectiveKind::PR_CONT, 0.3, 400);
  std::vector<Snapshot> scaled = traj.snapshots;
  for (auto& s : scaled) s.scaled_grad *= 0.25;
  for (const std::size_t pairs : {std::size_t{30}, std::size_t{500}}) {
    Rng a(7), b(7);
    CHECK(lipschitz_estimate(scaled, pairs, a) ==
          doctest::Approx(0.25 * lipschitz_estimate(traj.snapshots, pairs, b)).epsilon(1e-13));
  }
}

TEST_CASE("squared gradient norm at T") {
  // s_1 is computed at w_0 and does not depend on gamma.
  const auto full = fixture_trajectory(ObjectiveKind::EL, 0.2, 1);
  const auto half = fixture_trajectory(ObjectiveKind::EL, 0.1, 1);
  CHECK(grad_norm_sq(half, 1) == doctest::Approx(0.25 * grad_norm_sq(full, 1)).epsilon(1e-14));

  Trajectory zero;
  zero.iterations = 1;
  zero.steps = {{1, 0, 0.0, 0.0}};
  CHECK(grad_norm_sq(zero, 1) == 0.0);
  CHECK_THROWS(grad_norm_sq(zero, 2));
}

TEST_CASE("squared gradient norm shrinks over a converged run") {
  const auto task = make_synthetic_chunking();
  const ChainModel model(task.alphabet);
  const FeedbackOracle oracle(LossKind::Hamming, task.alphabet, task.train);
  TrainerConfig c;
  c.gamma = 0.03;
  c.iterations = 20000;
  c.epoch_size = 1000;
  const auto traj = train(c, model, task.train, task.dev, oracle);
  CHECK(grad_norm_sq(traj, c.iterations) < grad_norm_sq(traj, 1));

  const auto rep = make_convergence_report(traj, c);
  CHECK(rep.K == 20);
  CHECK(rep.grad_norm_sq_at_T == grad_norm_sq(traj, c.iterations));
  CHECK(rep.variance_est == variance_estimate(traj.epoch_grads));
}

TEST_CASE("compare_runs") {
  const std::vector<ConvergenceReport> single{report(ObjectiveKind::EL, 1, 0.3)};
  const auto trivial = compare_runs(single);
  REQUIRE(trivial.rankings.size() == 3);
  CHECK(trivial.rankings[2].ranked.size() == 1);
  CHECK_FALSE(trivial.variance_pr_el_ce.has_value());

  const std::vector<ConvergenceReport> three{report(ObjectiveKind::CE, 1, 10.0), report(ObjectiveKind::PR_BIN, 1, 1e-5),
                                             report(ObjectiveKind::EL, 1, 1e-3)};
  const auto cmp = compare_runs(three);
  const auto& variance = cmp.rankings[2];
  CHECK(variance.metric == "variance");
  CHECK(variance.ranked[0].first == "pr-bin");
  CHECK(variance.ranked[1].first == "el");
  CHECK(variance.ranked[2].first == "ce");
  CHECK(cmp.variance_pr_el_ce == true);
  CHECK(cmp.variance_pr_below_ce_each_seed == true);
  CHECK(cmp.summary().find("variance: pr-bin=1e-05 < el=0.001 < ce=10") != std::string::npos);

  std::vector<ConvergenceReport> inverted{report(ObjectiveKind::CE, 1, 1e-6), report(ObjectiveKind::PR_CONT, 1, 1e-5),
                                          report(ObjectiveKind::CE, 2, 1.0), report(ObjectiveKind::PR_CONT, 2, 1e-5),
                                          report(ObjectiveKind::EL, 1, 1e-3)};
  const auto mixed = compare_runs(inverted);
  CHECK(mixed.variance_pr_below_ce_each_seed == false);

  auto mismatched = three;
  mismatched[1].T = 2000;
  CHECK_THROWS_AS(compare_runs(mismatched), DataError);
  mismatched = three;
  mismatched[1].gamma = 0.02;
  CHECK_THROWS_AS(compare_runs(mismatched), DataError);
}
