#include "bsp/fixtures.hpp"

#include <array>
#include <cmath>
#include <set>

#include "bsp/errors.hpp"

namespace bsp {

LabelAlphabet fixture_alphabet(std::size_t num_labels) {
  switch (num_labels) {
    case 2:
      return LabelAlphabet({"B", "O"});
    case 3:
      return LabelAlphabet({"B", "I", "O"});
    case 4:
      return LabelAlphabet({"B-NP", "I-NP", "B-VP", "O"});
    default:
      throw ConfigError("fixture alphabets have 2 to 4 labels");
  }
}

SparseVector random_weights(const ChainModel& model, std::span<const ChainInstance> data, Rng& rng, double scale) {
  std::set<FeatureId> ids;
  for (const auto& x : data) {
    const FeatureTable table = model.features(x);
    for (std::size_t i = 0; i < table.length(); ++i) {
      for (std::size_t l = 0; l < table.num_labels(); ++l) {
        for (const FeatureId id : table.emissions(i, static_cast<LabelIndex>(l))) ids.insert(id);
      }
    }
  }
  if (model.has_transitions()) {
    for (std::size_t a = 0; a < model.num_labels(); ++a) {
      for (std::size_t b = 0; b < model.num_labels(); ++b) {
        ids.insert(model.transition_id(static_cast<LabelIndex>(a), static_cast<LabelIndex>(b)));
      }
    }
  }
  SparseVector w;
  for (const FeatureId id : ids) w.set(id, scale * rng.normal());
  return w;
}

ChainInstance random_instance(const LabelAlphabet& alphabet, std::size_t length, Rng& rng) {
  static constexpr std::array<const char*, 4> kVocabulary = {"a", "b", "c", "d"};
  ChainInstance x;
  Labeling gold;
  for (std::size_t i = 0; i < length; ++i) {
    x.tokens.emplace_back(kVocabulary[rng.index(kVocabulary.size())]);
    gold.push_back(static_cast<LabelIndex>(rng.index(alphabet.size())));
  }
  x.gold = std::move(gold);
  return x;
}

OracleFixture reference_fixture() {
  Rng rng(20160101);
  ChainModel model(fixture_alphabet(2), TemplateSet{1, true, true});
  std::vector<ChainInstance> data;
  data.push_back({{"a", "b", "a"}, Labeling{0, 1, 1}});
  SparseVector w = random_weights(model, data, rng, 1.0);
  return {"reference-3x2", std::move(model), std::move(data), std::move(w), LossKind::Hamming};
}

std::vector<OracleFixture> make_oracle_fixtures(std::uint64_t seed, std::size_t count, std::size_t max_outputs) {
  Rng rng(seed);
  std::vector<OracleFixture> fixtures;
  fixtures.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t num_labels = 2 + rng.index(3);
    // Longest chain allowed by the budget, capped at 8 positions.
    std::size_t max_len = 0;
    for (std::size_t outputs = num_labels; outputs <= max_outputs && max_len < 8; outputs *= num_labels) ++max_len;
    if (max_len == 0) throw ConfigError("fixture budget below the label count");

    TemplateSet templates;
    templates.window = static_cast<int>(rng.index(2));
    templates.bias = rng.index(2) == 0;
    templates.transitions = rng.index(4) != 0;
    const auto alphabet = fixture_alphabet(num_labels);
    const LossKind loss = rng.index(3) == 0 ? LossKind::ChunkF1 : LossKind::Hamming;

    std::vector<ChainInstance> data;
    const std::size_t instances = 1 + rng.index(3);
    for (std::size_t i = 0; i < instances; ++i) data.push_back(random_instance(alphabet, 1 + rng.index(max_len), rng));

    ChainModel model(alphabet, templates);
    const double scale = 0.5 + rng.uniform();
    SparseVector w = random_weights(model, data, rng, scale);
    fixtures.push_back({"fixture-" + std::to_string(k), std::move(model), std::move(data), std::move(w), loss});
  }
  return fixtures;
}

}  // namespace bsp
