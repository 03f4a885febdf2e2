#include "bsp/model.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "bsp/errors.hpp"

namespace bsp {

LabelAlphabet::LabelAlphabet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw DataError("label alphabet needs at least two labels");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i].empty()) throw DataError("empty label symbol");
    if (!lookup_.emplace(labels_[i], static_cast<LabelIndex>(i)).second) {
      throw DataError("duplicate label '" + labels_[i] + "'");
    }
  }
}

const std::string& LabelAlphabet::symbol(LabelIndex index) const {
  if (!contains(index)) throw DataError("label index " + std::to_string(index) + " out of range");
  return labels_[static_cast<std::size_t>(index)];
}

LabelIndex LabelAlphabet::index(std::string_view symbol) const {
  if (auto found = find(symbol)) return *found;
  throw DataError("unknown label '" + std::string(symbol) + "'");
}

std::optional<LabelIndex> LabelAlphabet::find(std::string_view symbol) const {
  const auto it = lookup_.find(std::string(symbol));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

namespace detail {

void FeatureNameRegistry::record(FeatureId id, std::string_view name) {
  std::lock_guard lock(mutex_);
  auto [it, inserted] = names_.try_emplace(id, name);
  if (!inserted && it->second != name) {
    throw DataError("feature id collision between '" + it->second + "' and '" + std::string(name) + "'");
  }
}

std::size_t FeatureNameRegistry::size() const {
  std::lock_guard lock(mutex_);
  return names_.size();
}

FeatureNameRegistry& FeatureNameRegistry::global() {
  static FeatureNameRegistry registry;
  return registry;
}

}  // namespace detail

namespace {

constexpr std::string_view kBos = "<s>";
constexpr std::string_view kEos = "</s>";

FeatureId hashed(std::string_view prefix, std::string_view suffix) {
  const FeatureId id = detail::Fnv1a().update(prefix).update(suffix).digest();
#ifdef BSP_FEATURE_COLLISION_CHECK
  detail::FeatureNameRegistry::global().record(id, std::string(prefix) + std::string(suffix));
#endif
  return id;
}

}  // namespace

ChainModel::ChainModel(LabelAlphabet alphabet, TemplateSet templates)
    : alphabet_(std::move(alphabet)), templates_(templates) {
  if (templates_.window < 0) throw ConfigError("template window must be non-negative");
  if (templates_.transitions) {
    const std::size_t n = alphabet_.size();
    transition_ids_.resize(n * n);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        transition_ids_[a * n + b] = hashed("trans|" + alphabet_.symbols()[a] + "|", alphabet_.symbols()[b]);
      }
    }
  }
}

std::size_t ChainModel::emission_templates() const {
  return static_cast<std::size_t>(2 * templates_.window + 1) + (templates_.bias ? 1 : 0);
}

FeatureId ChainModel::transition_id(LabelIndex prev, LabelIndex cur) const {
  if (!templates_.transitions) throw ConfigError("model has no transition templates");
  return transition_ids_.at(static_cast<std::size_t>(prev) * alphabet_.size() + static_cast<std::size_t>(cur));
}

std::vector<std::string> ChainModel::observations(const ChainInstance& x, std::size_t pos) const {
  std::vector<std::string> obs;
  obs.reserve(emission_templates());
  const auto n = static_cast<long>(x.size());
  for (int offset = -templates_.window; offset <= templates_.window; ++offset) {
    const long at = static_cast<long>(pos) + offset;
    std::string_view token = at < 0 ? kBos : at >= n ? kEos : std::string_view(x.tokens[static_cast<std::size_t>(at)]);
    obs.push_back("w[" + std::to_string(offset) + "]=" + std::string(token));
  }
  if (templates_.bias) obs.emplace_back("bias");
  return obs;
}

FeatureTable ChainModel::features(const ChainInstance& x) const {
  validate(x);
  FeatureTable table;
  table.length_ = x.size();
  table.num_labels_ = alphabet_.size();
  table.per_cell_ = emission_templates();
  table.ids_.resize(table.length_ * table.num_labels_ * table.per_cell_);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto obs = observations(x, i);
    for (std::size_t t = 0; t < obs.size(); ++t) {
      const std::string prefix = obs[t] + "|";
      for (std::size_t label = 0; label < table.num_labels_; ++label) {
        const std::size_t cell = i * table.num_labels_ + label;
        table.ids_[cell * table.per_cell_ + t] = hashed(prefix, alphabet_.symbols()[label]);
      }
    }
  }
  return table;
}

void ChainModel::validate(const ChainInstance& x) const {
  if (x.tokens.empty()) throw DataError("empty instance");
  if (x.gold) validate(x, *x.gold);
}

void ChainModel::validate(const ChainInstance& x, std::span<const LabelIndex> y) const {
  if (x.tokens.empty()) throw DataError("empty instance");
  if (y.size() != x.size()) {
    throw DataError("labeling length " + std::to_string(y.size()) + " does not match instance length " +
                    std::to_string(x.size()));
  }
  for (const LabelIndex label : y) {
    if (!alphabet_.contains(label)) throw DataError("unknown label index " + std::to_string(label));
  }
}

SparseVector extract_features(const ChainModel& model, const ChainInstance& x, std::span<const LabelIndex> y) {
  model.validate(x, y);
  return extract_features(model, model.features(x), y);
}

SparseVector extract_features(const ChainModel& model, const FeatureTable& table, std::span<const LabelIndex> y) {
  if (y.size() != table.length()) throw DataError("labeling length does not match instance length");
  SparseVector phi;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!model.alphabet().contains(y[i])) throw DataError("unknown label index " + std::to_string(y[i]));
    for (const FeatureId id : table.emissions(i, y[i])) phi.add(id, 1.0);
    if (i > 0 && model.has_transitions()) phi.add(model.transition_id(y[i - 1], y[i]), 1.0);
  }
  return phi;
}

double feature_norm_bound(const ChainModel& model, std::span<const ChainInstance> data) {
  double bound = 0.0;
  for (const auto& x : data) {
    const double n = static_cast<double>(x.size());
    double firings = n * static_cast<double>(model.emission_templates());
    if (model.has_transitions()) firings += n - 1.0;
    bound = std::max(bound, firings);
  }
  return bound;
}

}  // namespace bsp
