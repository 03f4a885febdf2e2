#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bsp/model.hpp"
#include "bsp/random.hpp"
#include "bsp/sparse_vector.hpp"

namespace bsp {

/// Log-space potentials w·φ materialized per node and per edge.
/// node(i, l) is the emission score of label l at position i; edge(i, a, b)
/// is the transition score between label a at i and label b at i+1.
struct ChainLattice {
  std::size_t length = 0;
  std::size_t num_labels = 0;
  std::vector<double> nodes;  // length * num_labels
  std::vector<double> edges;  // (length - 1) * num_labels * num_labels

  double node(std::size_t i, LabelIndex l) const { return nodes[i * num_labels + static_cast<std::size_t>(l)]; }
  double& node(std::size_t i, LabelIndex l) { return nodes[i * num_labels + static_cast<std::size_t>(l)]; }
  double edge(std::size_t i, LabelIndex a, LabelIndex b) const {
    return edges[(i * num_labels + static_cast<std::size_t>(a)) * num_labels + static_cast<std::size_t>(b)];
  }
  double& edge(std::size_t i, LabelIndex a, LabelIndex b) {
    return edges[(i * num_labels + static_cast<std::size_t>(a)) * num_labels + static_cast<std::size_t>(b)];
  }
};

/// Potentials for weights scale·w. scale = -1 gives the lattice of p_{-w}.
ChainLattice build_lattice(const ChainModel& model, const SparseVector& w, const ChainInstance& x, double scale = 1.0);
ChainLattice build_lattice(const ChainModel& model, const FeatureTable& table, const SparseVector& w,
                           double scale = 1.0);

/// Unnormalized log score of a labeling, read off the lattice.
double lattice_score(const ChainLattice& lattice, std::span<const LabelIndex> y);

/// log Z via the forward recursion.
double log_partition(const ChainLattice& lattice);

/// Viterbi; ties go to the lowest label index at every backtrace step.
Labeling viterbi(const ChainLattice& lattice);

/// Forward-backward messages over a lattice. Everything the trainer needs per
/// step (marginals, expectations, sampling, probabilities) comes from one
/// instance of this.
class ChainPosterior {
 public:
  explicit ChainPosterior(ChainLattice lattice);

  const ChainLattice& lattice() const { return lattice_; }
  double log_partition() const { return log_z_; }

  double node_marginal(std::size_t i, LabelIndex l) const;
  double edge_marginal(std::size_t i, LabelIndex a, LabelIndex b) const;

  double log_prob(std::span<const LabelIndex> y) const;
  double prob(std::span<const LabelIndex> y) const;

  /// Exact draw by backward filtering / forward sampling.
  Labeling sample(Rng& rng) const;

  /// E_{p}[φ(x,y)] from node and edge marginals.
  SparseVector expected_features(const ChainModel& model, const FeatureTable& table) const;

 private:
  ChainLattice lattice_;
  std::vector<double> alpha_;
  std::vector<double> beta_;
  double log_z_ = 0.0;
};

SparseVector expected_features(const ChainModel& model, const SparseVector& w, const ChainInstance& x);
Labeling sample(const ChainModel& model, const SparseVector& w, const ChainInstance& x, Rng& rng);
Labeling map_decode(const ChainModel& model, const SparseVector& w, const ChainInstance& x);
double prob(const ChainModel& model, const SparseVector& w, const ChainInstance& x, std::span<const LabelIndex> y);

/// log(sum(exp(values))), stable for any finite input.
double log_sum_exp(std::span<const double> values);

}  // namespace bsp
