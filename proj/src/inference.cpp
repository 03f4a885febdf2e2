#include "bsp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bsp/errors.hpp"

namespace bsp {

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double peak = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (const double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

ChainLattice build_lattice(const ChainModel& model, const SparseVector& w, const ChainInstance& x, double scale) {
  return build_lattice(model, model.features(x), w, scale);
}

ChainLattice build_lattice(const ChainModel& model, const FeatureTable& table, const SparseVector& w, double scale) {
  ChainLattice lattice;
  lattice.length = table.length();
  lattice.num_labels = table.num_labels();
  const std::size_t n = lattice.length;
  const std::size_t num_labels = lattice.num_labels;
  lattice.nodes.assign(n * num_labels, 0.0);
  lattice.edges.assign(n > 0 ? (n - 1) * num_labels * num_labels : 0, 0.0);
  if (w.empty()) return lattice;

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < num_labels; ++l) {
      const auto label = static_cast<LabelIndex>(l);
      double score = 0.0;
      for (const FeatureId id : table.emissions(i, label)) score += w.get(id);
      lattice.node(i, label) = scale * score;
    }
  }
  if (model.has_transitions() && n > 1) {
    // Transition features are position independent; fill position 0 and copy.
    const std::size_t block = num_labels * num_labels;
    for (std::size_t a = 0; a < num_labels; ++a) {
      for (std::size_t b = 0; b < num_labels; ++b) {
        lattice.edges[a * num_labels + b] =
            scale * w.get(model.transition_id(static_cast<LabelIndex>(a), static_cast<LabelIndex>(b)));
      }
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      std::copy_n(lattice.edges.begin(), block, lattice.edges.begin() + static_cast<std::ptrdiff_t>(i * block));
    }
  }
  return lattice;
}

double lattice_score(const ChainLattice& lattice, std::span<const LabelIndex> y) {
  if (y.size() != lattice.length) throw DataError("labeling length does not match lattice length");
  double score = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    score += lattice.node(i, y[i]);
    if (i > 0) score += lattice.edge(i - 1, y[i - 1], y[i]);
  }
  return score;
}

namespace {

// alpha(i, l) = log sum over prefixes ending in l at i.
std::vector<double> forward(const ChainLattice& lattice) {
  const std::size_t n = lattice.length;
  const std::size_t num_labels = lattice.num_labels;
  std::vector<double> alpha(n * num_labels);
  std::vector<double> terms(num_labels);
  for (std::size_t l = 0; l < num_labels; ++l) alpha[l] = lattice.node(0, static_cast<LabelIndex>(l));
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t b = 0; b < num_labels; ++b) {
      for (std::size_t a = 0; a < num_labels; ++a) {
        terms[a] = alpha[(i - 1) * num_labels + a] +
                   lattice.edge(i - 1, static_cast<LabelIndex>(a), static_cast<LabelIndex>(b));
      }
      alpha[i * num_labels + b] = log_sum_exp(terms) + lattice.node(i, static_cast<LabelIndex>(b));
    }
  }
  return alpha;
}

// beta(i, l) = log sum over suffixes after position i given label l at i.
std::vector<double> backward(const ChainLattice& lattice) {
  const std::size_t n = lattice.length;
  const std::size_t num_labels = lattice.num_labels;
  std::vector<double> beta(n * num_labels, 0.0);
  std::vector<double> terms(num_labels);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (std::size_t a = 0; a < num_labels; ++a) {
      for (std::size_t b = 0; b < num_labels; ++b) {
        terms[b] = lattice.edge(i, static_cast<LabelIndex>(a), static_cast<LabelIndex>(b)) +
                   lattice.node(i + 1, static_cast<LabelIndex>(b)) + beta[(i + 1) * num_labels + b];
      }
      beta[i * num_labels + a] = log_sum_exp(terms);
    }
  }
  return beta;
}

void check_lattice(const ChainLattice& lattice) {
  if (lattice.length == 0) throw DataError("empty lattice");
  for (const double v : lattice.nodes) {
    if (!std::isfinite(v)) throw NumericError("non-finite node potential");
  }
  for (const double v : lattice.edges) {
    if (!std::isfinite(v)) throw NumericError("non-finite edge potential");
  }
}

// Draws an index with probability proportional to exp(log_weights[i]).
LabelIndex draw_categorical(std::span<const double> log_weights, Rng& rng) {
  const double peak = *std::max_element(log_weights.begin(), log_weights.end());
  double total = 0.0;
  std::vector<double> weights(log_weights.size());
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    weights[i] = std::exp(log_weights[i] - peak);
    total += weights[i];
  }
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return static_cast<LabelIndex>(i);
    u -= weights[i];
  }
  // Rounding left u just above the last bucket: take the last positive weight.
  for (std::size_t i = weights.size(); i-- > 0;) {
    if (weights[i] > 0.0) return static_cast<LabelIndex>(i);
  }
  return 0;
}

}  // namespace

double log_partition(const ChainLattice& lattice) {
  check_lattice(lattice);
  const auto alpha = forward(lattice);
  return log_sum_exp(std::span(alpha).subspan((lattice.length - 1) * lattice.num_labels, lattice.num_labels));
}

Labeling viterbi(const ChainLattice& lattice) {
  check_lattice(lattice);
  const std::size_t n = lattice.length;
  const std::size_t num_labels = lattice.num_labels;
  std::vector<double> best(n * num_labels);
  std::vector<LabelIndex> back(n * num_labels, 0);
  for (std::size_t l = 0; l < num_labels; ++l) best[l] = lattice.node(0, static_cast<LabelIndex>(l));
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t b = 0; b < num_labels; ++b) {
      double top = -std::numeric_limits<double>::infinity();
      LabelIndex arg = 0;
      for (std::size_t a = 0; a < num_labels; ++a) {
        const double s =
            best[(i - 1) * num_labels + a] + lattice.edge(i - 1, static_cast<LabelIndex>(a), static_cast<LabelIndex>(b));
        if (s > top) {
          top = s;
          arg = static_cast<LabelIndex>(a);
        }
      }
      best[i * num_labels + b] = top + lattice.node(i, static_cast<LabelIndex>(b));
      back[i * num_labels + b] = arg;
    }
  }
  Labeling y(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < num_labels; ++l) {
    if (best[(n - 1) * num_labels + l] > top) {
      top = best[(n - 1) * num_labels + l];
      y[n - 1] = static_cast<LabelIndex>(l);
    }
  }
  for (std::size_t i = n - 1; i > 0; --i) y[i - 1] = back[i * num_labels + static_cast<std::size_t>(y[i])];
  return y;
}

ChainPosterior::ChainPosterior(ChainLattice lattice) : lattice_(std::move(lattice)) {
  check_lattice(lattice_);
  alpha_ = forward(lattice_);
  beta_ = backward(lattice_);
  const std::size_t last = (lattice_.length - 1) * lattice_.num_labels;
  log_z_ = log_sum_exp(std::span(alpha_).subspan(last, lattice_.num_labels));
}

double ChainPosterior::node_marginal(std::size_t i, LabelIndex l) const {
  const std::size_t cell = i * lattice_.num_labels + static_cast<std::size_t>(l);
  return std::exp(alpha_[cell] + beta_[cell] - log_z_);
}

double ChainPosterior::edge_marginal(std::size_t i, LabelIndex a, LabelIndex b) const {
  const std::size_t num_labels = lattice_.num_labels;
  return std::exp(alpha_[i * num_labels + static_cast<std::size_t>(a)] + lattice_.edge(i, a, b) +
                  lattice_.node(i + 1, b) + beta_[(i + 1) * num_labels + static_cast<std::size_t>(b)] - log_z_);
}

double ChainPosterior::log_prob(std::span<const LabelIndex> y) const { return lattice_score(lattice_, y) - log_z_; }

double ChainPosterior::prob(std::span<const LabelIndex> y) const { return std::exp(log_prob(y)); }

Labeling ChainPosterior::sample(Rng& rng) const {
  const std::size_t n = lattice_.length;
  const std::size_t num_labels = lattice_.num_labels;
  Labeling y(n);
  std::vector<double> logits(num_labels);
  for (std::size_t l = 0; l < num_labels; ++l) logits[l] = lattice_.node(0, static_cast<LabelIndex>(l)) + beta_[l];
  y[0] = draw_categorical(logits, rng);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t l = 0; l < num_labels; ++l) {
      const auto label = static_cast<LabelIndex>(l);
      logits[l] = lattice_.edge(i - 1, y[i - 1], label) + lattice_.node(i, label) + beta_[i * num_labels + l];
    }
    y[i] = draw_categorical(logits, rng);
  }
  return y;
}

SparseVector ChainPosterior::expected_features(const ChainModel& model, const FeatureTable& table) const {
  if (table.length() != lattice_.length || table.num_labels() != lattice_.num_labels) {
    throw DataError("feature table does not match lattice shape");
  }
  SparseVector expectation;
  const std::size_t n = lattice_.length;
  const std::size_t num_labels = lattice_.num_labels;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < num_labels; ++l) {
      const auto label = static_cast<LabelIndex>(l);
      const double marginal = node_marginal(i, label);
      for (const FeatureId id : table.emissions(i, label)) expectation.add(id, marginal);
    }
  }
  if (model.has_transitions()) {
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t a = 0; a < num_labels; ++a) {
        for (std::size_t b = 0; b < num_labels; ++b) {
          const auto la = static_cast<LabelIndex>(a);
          const auto lb = static_cast<LabelIndex>(b);
          expectation.add(model.transition_id(la, lb), edge_marginal(i, la, lb));
        }
      }
    }
  }
  return expectation;
}

SparseVector expected_features(const ChainModel& model, const SparseVector& w, const ChainInstance& x) {
  const FeatureTable table = model.features(x);
  return ChainPosterior(build_lattice(model, table, w)).expected_features(model, table);
}

Labeling sample(const ChainModel& model, const SparseVector& w, const ChainInstance& x, Rng& rng) {
  return ChainPosterior(build_lattice(model, w, x)).sample(rng);
}

Labeling map_decode(const ChainModel& model, const SparseVector& w, const ChainInstance& x) {
  return viterbi(build_lattice(model, w, x));
}

double prob(const ChainModel& model, const SparseVector& w, const ChainInstance& x, std::span<const LabelIndex> y) {
  model.validate(x, y);
  return ChainPosterior(build_lattice(model, w, x)).prob(y);
}

}  // namespace bsp
