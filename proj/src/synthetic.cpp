#include "bsp/synthetic.hpp"

#include <array>
#include <string_view>

#include "bsp/errors.hpp"
#include "bsp/random.hpp"

namespace bsp {

namespace {

constexpr std::array<std::string_view, 6> kDeterminers = {"the", "a", "this", "that", "every", "some"};
constexpr std::array<std::string_view, 8> kAdjectives = {"big", "small", "red", "old", "new", "happy", "quick", "green"};
constexpr std::array<std::string_view, 12> kNouns = {"dog",  "cat",  "house", "car",  "tree",  "man",
                                                     "woman", "city", "idea",  "book", "river", "table"};
constexpr std::array<std::string_view, 7> kVerbs = {"sees", "likes", "runs", "takes", "finds", "builds", "reads"};
constexpr std::array<std::string_view, 5> kPrepositions = {"in", "on", "with", "near", "under"};

constexpr LabelIndex kB = 0;
constexpr LabelIndex kI = 1;
constexpr LabelIndex kO = 2;

template <std::size_t N>
std::string pick(const std::array<std::string_view, N>& words, Rng& rng) {
  return std::string(words[rng.index(N)]);
}

ChainInstance make_sentence(const SyntheticOptions& options, Rng& rng) {
  const std::size_t target = options.min_length + rng.index(options.max_length - options.min_length + 1);
  ChainInstance x;
  Labeling y;
  auto push = [&](std::string token, LabelIndex label) {
    x.tokens.push_back(std::move(token));
    y.push_back(label);
  };
  bool noun_phrase = rng.uniform() < 0.7;
  while (x.size() < target) {
    if (noun_phrase) {
      bool first = true;
      if (rng.uniform() < 0.7) {
        push(pick(kDeterminers, rng), kB);
        first = false;
      }
      const std::size_t adjectives = rng.index(3);
      for (std::size_t k = 0; k < adjectives; ++k) {
        push(pick(kAdjectives, rng), first ? kB : kI);
        first = false;
      }
      push(pick(kNouns, rng), first ? kB : kI);
      // Occasionally two NPs in a row, which the B/I distinction has to split.
      noun_phrase = rng.uniform() < 0.2;
    } else {
      push(rng.uniform() < 0.6 ? pick(kVerbs, rng) : pick(kPrepositions, rng), kO);
      noun_phrase = rng.uniform() < 0.8;
    }
  }
  x.tokens.resize(target);
  y.resize(target);
  x.gold = std::move(y);
  return x;
}

}  // namespace

SyntheticTask make_synthetic_chunking(const SyntheticOptions& options) {
  if (options.min_length == 0 || options.max_length < options.min_length) {
    throw ConfigError("synthetic task needs 0 < min_length <= max_length");
  }
  SyntheticTask task;
  Rng rng(options.seed);
  auto fill = [&](std::vector<ChainInstance>& out, std::size_t count) {
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(make_sentence(options, rng));
  };
  fill(task.train, options.train_size);
  fill(task.dev, options.dev_size);
  fill(task.test, options.test_size);
  return task;
}

}  // namespace bsp
