#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bsp/model.hpp"

namespace bsp {

struct SyntheticOptions {
  std::uint64_t seed = 7;
  std::size_t train_size = 200;
  std::size_t dev_size = 100;
  std::size_t test_size = 100;
  std::size_t min_length = 3;
  std::size_t max_length = 10;
};

struct SyntheticTask {
  LabelAlphabet alphabet{{"B-NP", "I-NP", "O"}};
  std::vector<ChainInstance> train;
  std::vector<ChainInstance> dev;
  std::vector<ChainInstance> test;
};

/// Noun-phrase chunking over a toy grammar. Word classes are disjoint and an
/// NP token is B-NP exactly when the previous token is not a determiner or
/// adjective, so the labels are a function of the (previous, current) word
/// pair: separable by the window-1 templates.
SyntheticTask make_synthetic_chunking(const SyntheticOptions& options = {});

}  // namespace bsp
