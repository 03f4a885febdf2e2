#pragma once

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bsp/sparse_vector.hpp"

namespace bsp {

using LabelIndex = int;
using Labeling = std::vector<LabelIndex>;

/// Ordered, duplicate-free set of label symbols (at least two).
class LabelAlphabet {
 public:
  explicit LabelAlphabet(std::vector<std::string> labels);

  std::size_t size() const { return labels_.size(); }
  const std::string& symbol(LabelIndex index) const;
  /// Throws DataError for a symbol outside the alphabet.
  LabelIndex index(std::string_view symbol) const;
  std::optional<LabelIndex> find(std::string_view symbol) const;
  bool contains(LabelIndex index) const { return index >= 0 && static_cast<std::size_t>(index) < labels_.size(); }
  const std::vector<std::string>& symbols() const { return labels_; }

  bool operator==(const LabelAlphabet& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, LabelIndex> lookup_;
};

/// A token sequence. The gold labeling is only for simulating feedback and
/// for dev/test evaluation; learners never see it.
struct ChainInstance {
  std::vector<std::string> tokens;
  std::optional<Labeling> gold;

  std::size_t size() const { return tokens.size(); }
};

/// Feature templates of a first-order chain.
struct TemplateSet {
  int window = 1;           ///< token identity at offsets -window..+window
  bool bias = true;         ///< label-only emission feature
  bool transitions = true;  ///< label-pair feature between neighbours

  bool operator==(const TemplateSet&) const = default;
};

/// Emission feature ids of one instance, per (position, label) cell.
class FeatureTable {
 public:
  std::size_t length() const { return length_; }
  std::size_t num_labels() const { return num_labels_; }
  std::span<const FeatureId> emissions(std::size_t pos, LabelIndex label) const {
    const std::size_t cell = pos * num_labels_ + static_cast<std::size_t>(label);
    return {ids_.data() + cell * per_cell_, per_cell_};
  }

 private:
  friend class ChainModel;
  std::size_t length_ = 0;
  std::size_t num_labels_ = 0;
  std::size_t per_cell_ = 0;
  std::vector<FeatureId> ids_;
};

/// Log-linear chain model p_w(y|x) ∝ exp(w·φ(x,y)) where φ is a sum of
/// per-position emission features and per-edge transition features.
///
/// Feature ids are 64-bit FNV-1a hashes of the feature name
/// ("w[-1]=the|B-NP", "bias|O", "trans|B-NP|I-NP"), so ids are stable
/// across runs and processes. Builds with BSP_FEATURE_COLLISION_CHECK
/// record every name and fail on a collision.
class ChainModel {
 public:
  explicit ChainModel(LabelAlphabet alphabet, TemplateSet templates = {});

  const LabelAlphabet& alphabet() const { return alphabet_; }
  const TemplateSet& templates() const { return templates_; }
  std::size_t num_labels() const { return alphabet_.size(); }
  std::size_t emission_templates() const;
  bool has_transitions() const { return templates_.transitions; }

  FeatureTable features(const ChainInstance& x) const;
  FeatureId transition_id(LabelIndex prev, LabelIndex cur) const;

  /// Observation strings at a position, one per emission template.
  std::vector<std::string> observations(const ChainInstance& x, std::size_t pos) const;

  /// Throws DataError unless x is nonempty and y (if given) is a labeling of x.
  void validate(const ChainInstance& x) const;
  void validate(const ChainInstance& x, std::span<const LabelIndex> y) const;

 private:
  LabelAlphabet alphabet_;
  TemplateSet templates_;
  std::vector<FeatureId> transition_ids_;
};

SparseVector extract_features(const ChainModel& model, const ChainInstance& x, std::span<const LabelIndex> y);
SparseVector extract_features(const ChainModel& model, const FeatureTable& table, std::span<const LabelIndex> y);

/// An upper bound R on ||φ(x,y)|| over a dataset: all features are
/// indicators, so the l2 norm never exceeds the number of firings.
double feature_norm_bound(const ChainModel& model, std::span<const ChainInstance> data);

namespace detail {

/// Streaming 64-bit FNV-1a.
class Fnv1a {
 public:
  Fnv1a& update(std::string_view bytes) {
    for (const char c : bytes) {
      state_ ^= static_cast<unsigned char>(c);
      state_ *= 0x100000001b3ULL;
    }
    return *this;
  }
  std::uint64_t digest() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

/// Name registry used to detect feature-id collisions.
class FeatureNameRegistry {
 public:
  /// Throws DataError if id was already recorded under a different name.
  void record(FeatureId id, std::string_view name);
  std::size_t size() const;
  static FeatureNameRegistry& global();

 private:
  mutable std::mutex mutex_;
  std::unordered_map<FeatureId, std::string> names_;
};

}  // namespace detail

}  // namespace bsp
