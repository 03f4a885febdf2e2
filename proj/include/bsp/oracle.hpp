#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "bsp/feedback.hpp"
#include "bsp/model.hpp"
#include "bsp/objectives.hpp"
#include "bsp/sparse_vector.hpp"

namespace bsp {

/// Cap on |Y(x)| for exhaustive enumeration.
struct OracleBudget {
  std::size_t max_outputs = 4096;
};

/// All L^n labelings of x in lexicographic label-index order. Throws
/// BudgetError (never truncates) when L^n exceeds the budget.
std::vector<Labeling> enumerate_outputs(const ChainModel& model, const ChainInstance& x, OracleBudget budget = {});

/// Y(x) together with features, scores and probabilities, all computed by
/// direct summation (no dynamic programming).
struct EnumeratedOutputs {
  std::vector<Labeling> outputs;
  std::vector<SparseVector> features;
  std::vector<double> scores;  // w·φ(x,y)
  std::vector<double> probs;   // exp(score - log_z)
  double log_z = 0.0;

  SparseVector expectation() const;  // Σ_y p(y) φ(x,y)
};

EnumeratedOutputs enumerate_distribution(const ChainModel& model, const SparseVector& w, const ChainInstance& x,
                                         OracleBudget budget = {});

/// Pair-Gibbs probabilities e^{w·(φ_i−φ_j)} / Σ_pairs, computed directly from
/// the pair definition. Row-major |Y|×|Y| over enumerate_outputs order; the
/// identical pairs ⟨y,y⟩ are included.
std::vector<double> brute_pair_probabilities(const ChainModel& model, const SparseVector& w,
                                             const ChainInstance& x, OracleBudget budget = {});

/// Exact objective with p(x) uniform over `data`:
///   EL:  mean_x Σ_y Δ(y) p_w(y|x)
///   PR:  mean_x Σ_{⟨i,j⟩} Δ(⟨y_i,y_j⟩) p_w(⟨y_i,y_j⟩|x)
///   CE:  mean_x −Σ_y g(y) log p_w(y|x),  g = 1 − Δ (unnormalized)
double brute_objective(ObjectiveKind kind, const ChainModel& model, const SparseVector& w,
                       std::span<const ChainInstance> data, const DatasetLoss& loss, OracleBudget budget = {});

/// Exact gradient of brute_objective by enumeration.
SparseVector brute_gradient(ObjectiveKind kind, const ChainModel& model, const SparseVector& w,
                            std::span<const ChainInstance> data, const DatasetLoss& loss, OracleBudget budget = {});

/// Central differences (f(w + h e_i) − f(w − h e_i)) / 2h over `coordinates`.
SparseVector finite_diff_gradient(const std::function<double(const SparseVector&)>& f, const SparseVector& w,
                                  std::span<const FeatureId> coordinates, double h);

/// Every feature id that fires in some labeling of some instance.
std::vector<FeatureId> active_features(const ChainModel& model, std::span<const ChainInstance> data,
                                       OracleBudget budget = {});

/// α(x) = Σ_y g(y) with g = 1 − Δ.
double gain_mass(const ChainModel& model, const ChainInstance& x,
                 const std::function<double(std::span<const LabelIndex>)>& loss, OracleBudget budget = {});

/// Exact moments of a learner's stochastic gradient s under its own sampling
/// randomness: x uniform over `data`, then ỹ ~ p_w (EL, CE) or the pair
/// ỹ_i ~ p_w, ỹ_j ~ p_{-w} (PR). Outcome probabilities come from enumeration,
/// the gradients from the learner's constructors.
struct GradientMoments {
  SparseVector mean;          ///< E[s]
  double deviation_sq = 0.0;  ///< E||s − reference||², reference = E[s] unless given
  double max_norm = 0.0;      ///< max ||s|| over outcomes with nonzero probability
};

using GradientHook = std::function<void(SparseVector&)>;

GradientMoments enumerate_stochastic_gradient(ObjectiveKind kind, const ChainModel& model, const SparseVector& w,
                                              std::span<const ChainInstance> data, const DatasetLoss& loss,
                                              ClippingConfig clip = {}, const SparseVector* reference = nullptr,
                                              const GradientHook& hook = {}, OracleBudget budget = {});

}  // namespace bsp
