#include "bsp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "bsp/errors.hpp"
#include "bsp/inference.hpp"

namespace bsp {

std::vector<Labeling> enumerate_outputs(const ChainModel& model, const ChainInstance& x, OracleBudget budget) {
  if (budget.max_outputs == 0) throw ConfigError("oracle budget must be positive");
  if (x.tokens.empty()) throw DataError("empty instance");
  const std::size_t num_labels = model.num_labels();
  std::size_t count = 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (count > budget.max_outputs / num_labels) {
      throw BudgetError("output space of " + std::to_string(num_labels) + "^" + std::to_string(x.size()) +
                        " labelings exceeds the oracle budget of " + std::to_string(budget.max_outputs));
    }
    count *= num_labels;
  }

  std::vector<Labeling> outputs;
  outputs.reserve(count);
  Labeling y(x.size(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    outputs.push_back(y);
    // Odometer increment, last position fastest.
    for (std::size_t i = y.size(); i-- > 0;) {
      if (static_cast<std::size_t>(++y[i]) < num_labels) break;
      y[i] = 0;
    }
  }
  return outputs;
}

SparseVector EnumeratedOutputs::expectation() const {
  SparseVector mean;
  for (std::size_t k = 0; k < outputs.size(); ++k) mean.add_scaled(features[k], probs[k]);
  return mean;
}

EnumeratedOutputs enumerate_distribution(const ChainModel& model, const SparseVector& w, const ChainInstance& x,
                                         OracleBudget budget) {
  EnumeratedOutputs e;
  e.outputs = enumerate_outputs(model, x, budget);
  e.features.reserve(e.outputs.size());
  e.scores.reserve(e.outputs.size());
  for (const auto& y : e.outputs) {
    e.features.push_back(extract_features(model, x, y));
    e.scores.push_back(w.dot(e.features.back()));
  }
  e.log_z = log_sum_exp(e.scores);
  e.probs.reserve(e.outputs.size());
  for (const double s : e.scores) e.probs.push_back(std::exp(s - e.log_z));
  return e;
}

std::vector<double> brute_pair_probabilities(const ChainModel& model, const SparseVector& w, const ChainInstance& x,
                                             OracleBudget budget) {
  const auto outputs = enumerate_outputs(model, x, budget);
  std::vector<SparseVector> features;
  features.reserve(outputs.size());
  for (const auto& y : outputs) features.push_back(extract_features(model, x, y));
  const std::size_t m = outputs.size();
  std::vector<double> pair_scores(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) pair_scores[i * m + j] = w.dot(features[i] - features[j]);
  }
  const double log_norm = log_sum_exp(pair_scores);
  for (double& s : pair_scores) s = std::exp(s - log_norm);
  return pair_scores;
}

namespace {

void check_loss(double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw DataError("task loss outside [0, 1]: " + std::to_string(value));
}

struct InstanceTerms {
  double objective = 0.0;
  SparseVector gradient;
};

InstanceTerms expected_loss_terms(const EnumeratedOutputs& e, const std::vector<double>& losses) {
  // J = Σ Δ p;  ∇J = Σ p Δ (φ − E[φ])
  InstanceTerms t;
  const SparseVector mean = e.expectation();
  for (std::size_t k = 0; k < e.outputs.size(); ++k) {
    t.objective += losses[k] * e.probs[k];
    SparseVector centered = e.features[k] - mean;
    t.gradient.add_scaled(centered, e.probs[k] * losses[k]);
  }
  return t;
}

InstanceTerms pairwise_terms(const EnumeratedOutputs& e, const std::vector<double>& losses, PairMode mode) {
  // Pair-Gibbs model over all ordered pairs, from the pair scores themselves.
  const std::size_t m = e.outputs.size();
  std::vector<double> pair_scores(m * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) pair_scores[i * m + j] = e.scores[i] - e.scores[j];
  }
  const double log_norm = log_sum_exp(pair_scores);

  // With P(ij) the pair probability, Δij the pair feedback and ψ_ij = φ_i − φ_j:
  //   J = Σ P Δ,  ∇J = Σ P Δ ψ − J · Σ P ψ.
  // Both sums are expanded by rows and columns so only |Y| vector updates are needed.
  std::vector<double> row_loss(m, 0.0), col_loss(m, 0.0), row_mass(m, 0.0), col_mass(m, 0.0);
  InstanceTerms t;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double p = std::exp(pair_scores[i * m + j] - log_norm);
      const double d = pair_feedback(losses[i], losses[j], mode);
      t.objective += p * d;
      row_loss[i] += p * d;
      col_loss[j] += p * d;
      row_mass[i] += p;
      col_mass[j] += p;
    }
  }
  SparseVector weighted, pair_mean;
  for (std::size_t k = 0; k < m; ++k) {
    weighted.add_scaled(e.features[k], row_loss[k] - col_loss[k]);
    pair_mean.add_scaled(e.features[k], row_mass[k] - col_mass[k]);
  }
  t.gradient = std::move(weighted);
  t.gradient.add_scaled(pair_mean, -t.objective);
  return t;
}

InstanceTerms cross_entropy_terms(const EnumeratedOutputs& e, const std::vector<double>& losses) {
  // J = −Σ g log p;  ∇J = −Σ g φ + α E[φ]
  InstanceTerms t;
  double alpha = 0.0;
  for (std::size_t k = 0; k < e.outputs.size(); ++k) {
    const double gain = 1.0 - losses[k];
    alpha += gain;
    t.objective -= gain * (e.scores[k] - e.log_z);
    t.gradient.add_scaled(e.features[k], -gain);
  }
  t.gradient.add_scaled(e.expectation(), alpha);
  return t;
}

InstanceTerms instance_terms(ObjectiveKind kind, const ChainModel& model, const SparseVector& w,
                             const ChainInstance& x, std::size_t index, const DatasetLoss& loss,
                             OracleBudget budget) {
  const EnumeratedOutputs e = enumerate_distribution(model, w, x, budget);
  std::vector<double> losses;
  losses.reserve(e.outputs.size());
  for (const auto& y : e.outputs) {
    losses.push_back(loss(index, y));
    check_loss(losses.back());
  }
  switch (kind) {
    case ObjectiveKind::EL:
      return expected_loss_terms(e, losses);
    case ObjectiveKind::PR_BIN:
    case ObjectiveKind::PR_CONT:
      return pairwise_terms(e, losses, pair_mode(kind));
    case ObjectiveKind::CE:
      return cross_entropy_terms(e, losses);
  }
  return {};
}

}  // namespace

double brute_objective(ObjectiveKind kind, const ChainModel& model, const SparseVector& w,
                       std::span<const ChainInstance> data, const DatasetLoss& loss, OracleBudget budget) {
  if (data.empty()) throw DataError("empty dataset");
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += instance_terms(kind, model, w, data[i], i, loss, budget).objective;
  }
  return total / static_cast<double>(data.size());
}

SparseVector brute_gradient(ObjectiveKind kind, const ChainModel& model, const SparseVector& w,
                            std::span<const ChainInstance> data, const DatasetLoss& loss, OracleBudget budget) {
  if (data.empty()) throw DataError("empty dataset");
  SparseVector total;
  for (std::size_t i = 0; i < data.size(); ++i) {
    total += instance_terms(kind, model, w, data[i], i, loss, budget).gradient;
  }
  total *= 1.0 / static_cast<double>(data.size());
  return total;
}

SparseVector finite_diff_gradient(const std::function<double(const SparseVector&)>& f, const SparseVector& w,
                                  std::span<const FeatureId> coordinates, double h) {
  if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
  SparseVector grad;
  for (const FeatureId id : coordinates) {
    const double base = w.get(id);
    SparseVector plus = w;
    plus.set(id, base + h);
    SparseVector minus = w;
    minus.set(id, base - h);
    grad.set(id, (f(plus) - f(minus)) / (2.0 * h));
  }
  return grad;
}

std::vector<FeatureId> active_features(const ChainModel& model, std::span<const ChainInstance> data,
                                       OracleBudget budget) {
  std::set<FeatureId> ids;
  for (const auto& x : data) {
    for (const auto& y : enumerate_outputs(model, x, budget)) {
      for (const auto& [id, value] : extract_features(model, x, y)) ids.insert(id);
    }
  }
  return {ids.begin(), ids.end()};
}

double gain_mass(const ChainModel& model, const ChainInstance& x,
                 const std::function<double(std::span<const LabelIndex>)>& loss, OracleBudget budget) {
  double alpha = 0.0;
  for (const auto& y : enumerate_outputs(model, x, budget)) {
    const double delta = loss(y);
    check_loss(delta);
    alpha += 1.0 - delta;
  }
  return alpha;
}

GradientMoments enumerate_stochastic_gradient(ObjectiveKind kind, const ChainModel& model, const SparseVector& w,
                                              std::span<const ChainInstance> data, const DatasetLoss& loss,
                                              ClippingConfig clip, const SparseVector* reference,
                                              const GradientHook& hook, OracleBudget budget) {
  if (data.empty()) throw DataError("empty dataset");
  const double instance_weight = 1.0 / static_cast<double>(data.size());
  const SparseVector negated = -1.0 * w;

  std::vector<std::pair<double, SparseVector>> outcomes;
  for (std::size_t index = 0; index < data.size(); ++index) {
    const ChainInstance& x = data[index];
    const FeatureTable table = model.features(x);
    const ChainPosterior positive(build_lattice(model, table, w, 1.0));
    const SparseVector expectation = positive.expected_features(model, table);
    const EnumeratedOutputs e = enumerate_distribution(model, w, x, budget);
    auto emit = [&](double q, SparseVector s) {
      if (hook) hook(s);
      outcomes.emplace_back(q * instance_weight, std::move(s));
    };
    if (is_pairwise(kind)) {
      const ChainPosterior negative(build_lattice(model, table, w, -1.0));
      const SparseVector pair_mean = pair_expectation(model, table, positive, negative);
      const EnumeratedOutputs neg = enumerate_distribution(model, negated, x, budget);
      for (std::size_t i = 0; i < e.outputs.size(); ++i) {
        for (std::size_t j = 0; j < neg.outputs.size(); ++j) {
          const PairSample pair{e.outputs[i], neg.outputs[j]};
          const double feedback = pair_feedback(loss(index, pair.first), loss(index, pair.second), pair_mode(kind));
          emit(e.probs[i] * neg.probs[j], pr_gradient(model, table, pair_mean, pair, feedback));
        }
      }
    } else {
      for (std::size_t k = 0; k < e.outputs.size(); ++k) {
        const double delta = loss(index, e.outputs[k]);
        SparseVector s = kind == ObjectiveKind::EL
                             ? el_gradient(model, table, expectation, e.outputs[k], delta)
                             : ce_gradient(model, table, positive, expectation, e.outputs[k], 1.0 - delta, clip);
        emit(e.probs[k], std::move(s));
      }
    }
  }

  GradientMoments moments;
  for (const auto& [q, s] : outcomes) {
    moments.mean.add_scaled(s, q);
    if (q > 0.0) moments.max_norm = std::max(moments.max_norm, s.norm());
  }
  const SparseVector& center = reference ? *reference : moments.mean;
  for (const auto& [q, s] : outcomes) moments.deviation_sq += q * squared_distance(s, center);
  return moments;
}

}  // namespace bsp
