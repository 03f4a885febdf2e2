#include "bsp/objectives.hpp"

#include <algorithm>
#include <cctype>
#include <string>

#include "bsp/errors.hpp"

namespace bsp {

std::string_view to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::EL:
      return "el";
    case ObjectiveKind::PR_BIN:
      return "pr-bin";
    case ObjectiveKind::PR_CONT:
      return "pr-cont";
    case ObjectiveKind::CE:
      return "ce";
  }
  return "unknown";
}

ObjectiveKind parse_objective(std::string_view text) {
  std::string key(text);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
    return c == '_' ? '-' : static_cast<char>(std::tolower(c));
  });
  if (key == "el") return ObjectiveKind::EL;
  if (key == "pr-bin") return ObjectiveKind::PR_BIN;
  if (key == "pr-cont") return ObjectiveKind::PR_CONT;
  if (key == "ce") return ObjectiveKind::CE;
  throw ConfigError("unknown objective '" + std::string(text) + "' (expected el, pr-bin, pr-cont or ce)");
}

bool is_pairwise(ObjectiveKind kind) { return kind == ObjectiveKind::PR_BIN || kind == ObjectiveKind::PR_CONT; }

PairMode pair_mode(ObjectiveKind kind) {
  return kind == ObjectiveKind::PR_CONT ? PairMode::Continuous : PairMode::Binary;
}

ClippingConfig::ClippingConfig(double k) : k_(k) {
  if (!(k >= 0.0 && k < 1.0)) throw ConfigError("clipping constant k must lie in [0, 1), got " + std::to_string(k));
}

namespace {

void check_unit(double value, const char* what) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DataError(std::string(what) + " must lie in [0, 1], got " + std::to_string(value));
  }
}

}  // namespace

SparseVector el_gradient(const ChainModel& model, const SparseVector& w, const ChainInstance& x,
                         std::span<const LabelIndex> y_sampled, double delta) {
  model.validate(x, y_sampled);
  const FeatureTable table = model.features(x);
  return el_gradient(model, table, ChainPosterior(build_lattice(model, table, w)), y_sampled, delta);
}

SparseVector el_gradient(const ChainModel& model, const FeatureTable& table, const ChainPosterior& posterior,
                         std::span<const LabelIndex> y_sampled, double delta) {
  check_unit(delta, "loss");
  if (delta == 0.0) return {};
  return el_gradient(model, table, posterior.expected_features(model, table), y_sampled, delta);
}

SparseVector el_gradient(const ChainModel& model, const FeatureTable& table, const SparseVector& expectation,
                         std::span<const LabelIndex> y_sampled, double delta) {
  check_unit(delta, "loss");
  if (delta == 0.0) return {};
  SparseVector s = extract_features(model, table, y_sampled);
  s -= expectation;
  s *= delta;
  return s;
}

PairSample pr_sample_pair(const ChainModel& model, const SparseVector& w, const ChainInstance& x, Rng& rng) {
  const FeatureTable table = model.features(x);
  const ChainPosterior positive(build_lattice(model, table, w, 1.0));
  const ChainPosterior negative(build_lattice(model, table, w, -1.0));
  return pr_sample_pair(positive, negative, rng);
}

PairSample pr_sample_pair(const ChainPosterior& positive, const ChainPosterior& negative, Rng& rng) {
  PairSample pair;
  pair.first = positive.sample(rng);
  pair.second = negative.sample(rng);
  return pair;
}

double pair_feedback(double delta_i, double delta_j, PairMode mode) {
  check_unit(delta_i, "pair loss");
  check_unit(delta_j, "pair loss");
  if (!(delta_i > delta_j)) return 0.0;
  return mode == PairMode::Continuous ? delta_i - delta_j : 1.0;
}

SparseVector pr_gradient(const ChainModel& model, const SparseVector& w, const ChainInstance& x,
                         const PairSample& pair, double delta_pair) {
  model.validate(x, pair.first);
  model.validate(x, pair.second);
  const FeatureTable table = model.features(x);
  return pr_gradient(model, table, ChainPosterior(build_lattice(model, table, w, 1.0)),
                     ChainPosterior(build_lattice(model, table, w, -1.0)), pair, delta_pair);
}

SparseVector pair_expectation(const ChainModel& model, const FeatureTable& table, const ChainPosterior& positive,
                              const ChainPosterior& negative) {
  SparseVector expectation = positive.expected_features(model, table);
  expectation -= negative.expected_features(model, table);
  return expectation;
}

SparseVector pr_gradient(const ChainModel& model, const FeatureTable& table, const ChainPosterior& positive,
                         const ChainPosterior& negative, const PairSample& pair, double delta_pair) {
  check_unit(delta_pair, "pair feedback");
  if (delta_pair == 0.0) return {};
  return pr_gradient(model, table, pair_expectation(model, table, positive, negative), pair, delta_pair);
}

SparseVector pr_gradient(const ChainModel& model, const FeatureTable& table, const SparseVector& expectation,
                         const PairSample& pair, double delta_pair) {
  check_unit(delta_pair, "pair feedback");
  if (delta_pair == 0.0) return {};
  SparseVector s = extract_features(model, table, pair.first);
  s -= extract_features(model, table, pair.second);
  s -= expectation;
  s *= delta_pair;
  return s;
}

SparseVector ce_gradient(const ChainModel& model, const SparseVector& w, const ChainInstance& x,
                         std::span<const LabelIndex> y_sampled, double gain, ClippingConfig clip) {
  model.validate(x, y_sampled);
  const FeatureTable table = model.features(x);
  return ce_gradient(model, table, ChainPosterior(build_lattice(model, table, w)), y_sampled, gain, clip);
}

SparseVector ce_gradient(const ChainModel& model, const FeatureTable& table, const ChainPosterior& posterior,
                         std::span<const LabelIndex> y_sampled, double gain, ClippingConfig clip) {
  check_unit(gain, "gain");
  if (gain == 0.0) return {};
  return ce_gradient(model, table, posterior, posterior.expected_features(model, table), y_sampled, gain, clip);
}

SparseVector ce_gradient(const ChainModel& model, const FeatureTable& table, const ChainPosterior& posterior,
                         const SparseVector& expectation, std::span<const LabelIndex> y_sampled, double gain,
                         ClippingConfig clip) {
  check_unit(gain, "gain");
  if (gain == 0.0) return {};
  const double p_hat = clip.clip(posterior.prob(y_sampled));
  if (!(p_hat > 0.0)) throw NumericError("sampled structure has zero probability and clipping is disabled");
  SparseVector s = expectation;
  s -= extract_features(model, table, y_sampled);
  s *= gain / p_hat;
  return s;
}

}  // namespace bsp
