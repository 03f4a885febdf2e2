#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bsp/feedback.hpp"
#include "bsp/model.hpp"
#include "bsp/random.hpp"
#include "bsp/sparse_vector.hpp"

namespace bsp {

/// A small model, dataset and weight vector whose output spaces are small
/// enough for exhaustive enumeration.
struct OracleFixture {
  std::string name;
  ChainModel model;
  std::vector<ChainInstance> data;
  SparseVector weights;
  LossKind loss = LossKind::Hamming;

  FeedbackOracle oracle() const { return FeedbackOracle(loss, model.alphabet(), data); }
};

/// BIO-style alphabet with 2 to 4 labels.
LabelAlphabet fixture_alphabet(std::size_t num_labels);

/// Independent N(0, scale²) weights on every feature the model can fire on `data`.
SparseVector random_weights(const ChainModel& model, std::span<const ChainInstance> data, Rng& rng, double scale);

/// Random instance over a four-word vocabulary with a random gold labeling.
ChainInstance random_instance(const LabelAlphabet& alphabet, std::size_t length, Rng& rng);

/// The reference fixture: one instance of 3 tokens, 2 labels, seeded weights.
OracleFixture reference_fixture();

/// `count` seeded fixtures of 1–3 instances with L^n ≤ max_outputs, n ≤ 8, L ≤ 4.
std::vector<OracleFixture> make_oracle_fixtures(std::uint64_t seed, std::size_t count, std::size_t max_outputs);

}  // namespace bsp
