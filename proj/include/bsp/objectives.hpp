#pragma once

#include <span>
#include <string_view>

#include "bsp/inference.hpp"
#include "bsp/model.hpp"
#include "bsp/random.hpp"
#include "bsp/sparse_vector.hpp"

namespace bsp {

/// The four bandit learners: expected loss, pairwise ranking with binary or
/// continuous pair feedback, and cross-entropy.
enum class ObjectiveKind { EL, PR_BIN, PR_CONT, CE };

enum class PairMode { Binary, Continuous };

std::string_view to_string(ObjectiveKind kind);
/// Accepts "el", "pr-bin", "pr-cont", "ce" (case-insensitive, '_' or '-').
ObjectiveKind parse_objective(std::string_view text);
bool is_pairwise(ObjectiveKind kind);
PairMode pair_mode(ObjectiveKind kind);

/// An ordered pair of labelings; `first` is drawn from p_w, `second` from p_{-w}.
struct PairSample {
  Labeling first;
  Labeling second;
};

/// Floor k on the sampling probability in the CE importance weight.
/// k = 0 disables clipping.
class ClippingConfig {
 public:
  ClippingConfig() = default;
  explicit ClippingConfig(double k);
  double k() const { return k_; }
  double clip(double p) const { return p < k_ ? k_ : p; }

 private:
  double k_ = 0.0;
};

/// s = delta · (φ(x,ỹ) − E_{p_w}[φ(x,y)])
SparseVector el_gradient(const ChainModel& model, const SparseVector& w, const ChainInstance& x,
                         std::span<const LabelIndex> y_sampled, double delta);
SparseVector el_gradient(const ChainModel& model, const FeatureTable& table, const ChainPosterior& posterior,
                         std::span<const LabelIndex> y_sampled, double delta);
/// Same, with E_{p_w}[φ] already computed.
SparseVector el_gradient(const ChainModel& model, const FeatureTable& table, const SparseVector& expectation,
                         std::span<const LabelIndex> y_sampled, double delta);

/// Draws ỹ_i ~ p_w and, independently, ỹ_j ~ p_{-w}. The pair-Gibbs model
/// factorizes into exactly this product.
PairSample pr_sample_pair(const ChainModel& model, const SparseVector& w, const ChainInstance& x, Rng& rng);
PairSample pr_sample_pair(const ChainPosterior& positive, const ChainPosterior& negative, Rng& rng);

/// Pair feedback from two pointwise losses. Continuous: delta_i − delta_j when
/// delta_i > delta_j. Binary: 1 when delta_i > delta_j. Otherwise 0.
double pair_feedback(double delta_i, double delta_j, PairMode mode);

/// s = delta_pair · (φ(x,ỹ_i) − φ(x,ỹ_j) − (E_{p_w}[φ] − E_{p_{-w}}[φ]))
SparseVector pr_gradient(const ChainModel& model, const SparseVector& w, const ChainInstance& x,
                         const PairSample& pair, double delta_pair);
SparseVector pr_gradient(const ChainModel& model, const FeatureTable& table, const ChainPosterior& positive,
                         const ChainPosterior& negative, const PairSample& pair, double delta_pair);
/// Same, with the pair expectation E_{p_w}[φ] − E_{p_{-w}}[φ] already computed.
SparseVector pr_gradient(const ChainModel& model, const FeatureTable& table, const SparseVector& pair_expectation,
                         const PairSample& pair, double delta_pair);
/// E_{p_w}[φ] − E_{p_{-w}}[φ], the expected pair feature vector.
SparseVector pair_expectation(const ChainModel& model, const FeatureTable& table, const ChainPosterior& positive,
                              const ChainPosterior& negative);

/// s = (gain / max(p_w(ỹ|x), k)) · (E_{p_w}[φ] − φ(x,ỹ))
SparseVector ce_gradient(const ChainModel& model, const SparseVector& w, const ChainInstance& x,
                         std::span<const LabelIndex> y_sampled, double gain, ClippingConfig clip);
SparseVector ce_gradient(const ChainModel& model, const FeatureTable& table, const ChainPosterior& posterior,
                         std::span<const LabelIndex> y_sampled, double gain, ClippingConfig clip);
SparseVector ce_gradient(const ChainModel& model, const FeatureTable& table, const ChainPosterior& posterior,
                         const SparseVector& expectation, std::span<const LabelIndex> y_sampled, double gain,
                         ClippingConfig clip);

}  // namespace bsp
