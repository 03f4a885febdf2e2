#include "bsp/feedback.hpp"

#include <algorithm>
#include <cctype>
#include <iterator>

#include "bsp/errors.hpp"

namespace bsp {

std::string_view to_string(LossKind kind) { return kind == LossKind::Hamming ? "hamming" : "chunk_f1"; }

LossKind parse_loss(std::string_view text) {
  std::string key(text);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (key == "hamming") return LossKind::Hamming;
  if (key == "chunk_f1" || key == "f1") return LossKind::ChunkF1;
  throw ConfigError("unknown loss '" + std::string(text) + "' (expected hamming or chunk_f1)");
}

double hamming_loss(std::span<const LabelIndex> gold, std::span<const LabelIndex> pred) {
  if (gold.size() != pred.size()) throw DataError("hamming loss: length mismatch");
  if (gold.empty()) throw DataError("hamming loss: empty labeling");
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) mismatches += gold[i] != pred[i] ? 1 : 0;
  return static_cast<double>(mismatches) / static_cast<double>(gold.size());
}

namespace {

struct BioTag {
  char prefix;  // 'B', 'I' or 'O'
  std::string type;
};

std::optional<BioTag> parse_tag(std::string_view tag) {
  if (tag == "O") return BioTag{'O', ""};
  if (tag == "B" || tag == "I") return BioTag{tag[0], ""};
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') {
    return BioTag{tag[0], std::string(tag.substr(2))};
  }
  return std::nullopt;
}

}  // namespace

std::vector<Chunk> extract_chunks(std::span<const std::string> tags) {
  std::vector<Chunk> chunks;
  std::optional<Chunk> open;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto tag = parse_tag(tags[i]);
    if (!tag) throw DataError("not a BIO tag: '" + tags[i] + "'");
    const bool continues = tag->prefix == 'I' && open && open->type == tag->type;
    if (continues) {
      open->end = i;
      continue;
    }
    if (open) chunks.push_back(*open);
    open.reset();
    if (tag->prefix != 'O') open = Chunk{i, i, tag->type};
  }
  if (open) chunks.push_back(*open);
  return chunks;
}

BioScheme::BioScheme(const LabelAlphabet& alphabet) : tags_(alphabet.symbols()) {
  for (const auto& tag : tags_) {
    if (!parse_tag(tag)) throw DataError("label '" + tag + "' is not a BIO tag");
  }
}

std::vector<Chunk> BioScheme::chunks(std::span<const LabelIndex> y) const {
  std::vector<std::string> tags;
  tags.reserve(y.size());
  for (const LabelIndex l : y) {
    if (l < 0 || static_cast<std::size_t>(l) >= tags_.size()) throw DataError("label index out of range");
    tags.push_back(tags_[static_cast<std::size_t>(l)]);
  }
  return extract_chunks(tags);
}

namespace {

double f1_loss_from_chunks(std::vector<Chunk> gold, std::vector<Chunk> pred) {
  if (gold.empty() && pred.empty()) return 0.0;
  if (gold.empty() || pred.empty()) return 1.0;
  std::sort(gold.begin(), gold.end());
  std::sort(pred.begin(), pred.end());
  std::vector<Chunk> common;
  std::set_intersection(gold.begin(), gold.end(), pred.begin(), pred.end(), std::back_inserter(common));
  const double matched = static_cast<double>(common.size());
  if (matched == 0.0) return 1.0;
  // F1 = 2PR/(P+R) = 2·matched / (|gold| + |pred|)
  const double f1 = 2.0 * matched / static_cast<double>(gold.size() + pred.size());
  return 1.0 - f1;
}

}  // namespace

double chunk_f1_loss(const BioScheme& scheme, std::span<const LabelIndex> gold, std::span<const LabelIndex> pred) {
  if (gold.size() != pred.size()) throw DataError("chunk F1 loss: length mismatch");
  return f1_loss_from_chunks(scheme.chunks(gold), scheme.chunks(pred));
}

double chunk_f1_loss(std::span<const std::string> gold, std::span<const std::string> pred) {
  if (gold.size() != pred.size()) throw DataError("chunk F1 loss: length mismatch");
  return f1_loss_from_chunks(extract_chunks(gold), extract_chunks(pred));
}

double task_loss(LossKind kind, const BioScheme* scheme, std::span<const LabelIndex> gold,
                 std::span<const LabelIndex> pred) {
  if (kind == LossKind::Hamming) return hamming_loss(gold, pred);
  if (scheme == nullptr) throw ConfigError("chunk F1 loss needs a BIO label alphabet");
  return chunk_f1_loss(*scheme, gold, pred);
}

FeedbackOracle::FeedbackOracle(LossKind kind, const LabelAlphabet& alphabet, std::span<const ChainInstance> data)
    : kind_(kind) {
  if (kind_ == LossKind::ChunkF1) scheme_.emplace(alphabet);
  gold_.reserve(data.size());
  for (const auto& x : data) gold_.push_back(x.gold);
}

double FeedbackOracle::loss(std::size_t index, std::span<const LabelIndex> y) const {
  if (index >= gold_.size()) throw DataError("feedback requested for unknown instance " + std::to_string(index));
  const auto& gold = gold_[index];
  if (!gold) throw DataError("instance " + std::to_string(index) + " has no gold labeling");
  const double value = task_loss(kind_, scheme_ ? &*scheme_ : nullptr, *gold, y);
  if (!(value >= 0.0 && value <= 1.0)) throw NumericError("task loss outside [0, 1]");
  return value;
}

double FeedbackOracle::pair_loss(std::size_t index, const PairSample& pair, PairMode mode) const {
  return pair_feedback(loss(index, pair.first), loss(index, pair.second), mode);
}

DatasetLoss FeedbackOracle::as_loss_function() const {
  return [this](std::size_t index, std::span<const LabelIndex> y) { return loss(index, y); };
}

}  // namespace bsp
