#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsp/model.hpp"
#include "bsp/objectives.hpp"

namespace bsp {

enum class LossKind { Hamming, ChunkF1 };

std::string_view to_string(LossKind kind);
LossKind parse_loss(std::string_view text);

/// Fraction of mismatched positions.
double hamming_loss(std::span<const LabelIndex> gold, std::span<const LabelIndex> pred);

/// A chunk [begin, end] (inclusive token positions) of a given type.
struct Chunk {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::string type;

  auto operator<=>(const Chunk&) const = default;
};

/// Chunks of a BIO tag sequence. Tags are "O", "B", "I", "B-<type>" or
/// "I-<type>"; an I tag that does not continue a chunk of its own type opens
/// a new one.
std::vector<Chunk> extract_chunks(std::span<const std::string> tags);

/// BIO view of a label alphabet. Throws DataError for non-BIO labels.
class BioScheme {
 public:
  explicit BioScheme(const LabelAlphabet& alphabet);
  std::vector<Chunk> chunks(std::span<const LabelIndex> y) const;

 private:
  std::vector<std::string> tags_;
};

/// 1 − F1 over exact chunk matches. Both chunk sets empty: loss 0. Exactly one
/// empty: loss 1.
double chunk_f1_loss(const BioScheme& scheme, std::span<const LabelIndex> gold, std::span<const LabelIndex> pred);
double chunk_f1_loss(std::span<const std::string> gold, std::span<const std::string> pred);

/// Task loss Δ(gold, pred) of the requested kind.
double task_loss(LossKind kind, const BioScheme* scheme, std::span<const LabelIndex> gold,
                 std::span<const LabelIndex> pred);

/// Per-instance loss callback, (instance index, labeling) -> Δ in [0, 1].
using DatasetLoss = std::function<double(std::size_t, std::span<const LabelIndex>)>;

/// Simulated bandit feedback. Holds the gold labelings of a dataset and answers
/// only with loss values; there is no way to get a labeling back out.
class FeedbackOracle {
 public:
  FeedbackOracle(LossKind kind, const LabelAlphabet& alphabet, std::span<const ChainInstance> data);

  LossKind kind() const { return kind_; }
  std::size_t size() const { return gold_.size(); }

  /// Δ(ỹ) for the instance at `index`. Throws DataError if it has no gold.
  double loss(std::size_t index, std::span<const LabelIndex> y) const;
  /// Pair feedback built from the two pointwise losses.
  double pair_loss(std::size_t index, const PairSample& pair, PairMode mode) const;

  DatasetLoss as_loss_function() const;

 private:
  LossKind kind_;
  std::optional<BioScheme> scheme_;
  std::vector<std::optional<Labeling>> gold_;
};

}  // namespace bsp
