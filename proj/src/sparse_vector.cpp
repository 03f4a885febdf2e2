#include "bsp/sparse_vector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsp/errors.hpp"

namespace bsp {

namespace {

void check_finite(FeatureId id, double value) {
  if (!std::isfinite(value)) {
    throw NumericError("non-finite value for feature " + std::to_string(id));
  }
}

}  // namespace

SparseVector::SparseVector(std::initializer_list<std::pair<const FeatureId, double>> init) {
  for (const auto& [id, value] : init) add(id, value);
}

double SparseVector::get(FeatureId id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? 0.0 : it->second;
}

void SparseVector::set(FeatureId id, double value) {
  check_finite(id, value);
  if (value == 0.0) {
    entries_.erase(id);
  } else {
    entries_[id] = value;
  }
}

void SparseVector::add(FeatureId id, double value) {
  if (value == 0.0) return;
  check_finite(id, value);
  auto [it, inserted] = entries_.try_emplace(id, value);
  if (inserted) return;
  it->second += value;
  if (it->second == 0.0) {
    entries_.erase(it);
  } else {
    check_finite(id, it->second);
  }
}

void SparseVector::add_scaled(const SparseVector& other, double scale) {
  if (scale == 0.0) return;
  for (const auto& [id, value] : other.entries_) {
    const double delta = scale * value;
    check_finite(id, delta);
    auto hint = entries_.lower_bound(id);
    if (hint == entries_.end() || hint->first != id) {
      if (delta != 0.0) entries_.emplace_hint(hint, id, delta);
      continue;
    }
    hint->second += delta;
    if (hint->second == 0.0) {
      entries_.erase(hint);
    } else {
      check_finite(id, hint->second);
    }
  }
}

SparseVector& SparseVector::operator+=(const SparseVector& other) {
  add_scaled(other, 1.0);
  return *this;
}

SparseVector& SparseVector::operator-=(const SparseVector& other) {
  add_scaled(other, -1.0);
  return *this;
}

SparseVector& SparseVector::operator*=(double scale) {
  if (scale == 0.0) {
    entries_.clear();
    return *this;
  }
  for (auto it = entries_.begin(); it != entries_.end();) {
    it->second *= scale;
    check_finite(it->first, it->second);
    if (it->second == 0.0) {
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
  return *this;
}

double SparseVector::dot(const SparseVector& other) const {
  const SparseVector& small = size() <= other.size() ? *this : other;
  const SparseVector& large = size() <= other.size() ? other : *this;
  double sum = 0.0;
  for (const auto& [id, value] : small.entries_) sum += value * large.get(id);
  return sum;
}

double SparseVector::squared_norm() const {
  double sum = 0.0;
  for (const auto& [id, value] : entries_) sum += value * value;
  return sum;
}

double SparseVector::norm() const { return std::sqrt(squared_norm()); }

SparseVector operator+(SparseVector lhs, const SparseVector& rhs) {
  lhs += rhs;
  return lhs;
}

SparseVector operator-(SparseVector lhs, const SparseVector& rhs) {
  lhs -= rhs;
  return lhs;
}

SparseVector operator*(double scale, SparseVector v) {
  v *= scale;
  return v;
}

namespace {

// Walks the sorted union of two supports, calling fn(a_value, b_value).
template <typename Fn>
void merge_walk(const SparseVector& a, const SparseVector& b, Fn&& fn) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
      fn(ia->second, 0.0);
      ++ia;
    } else if (ia == a.end() || ib->first < ia->first) {
      fn(0.0, ib->second);
      ++ib;
    } else {
      fn(ia->second, ib->second);
      ++ia;
      ++ib;
    }
  }
}

}  // namespace

double squared_distance(const SparseVector& a, const SparseVector& b) {
  double sum = 0.0;
  merge_walk(a, b, [&](double x, double y) { sum += (x - y) * (x - y); });
  return sum;
}

double distance(const SparseVector& a, const SparseVector& b) { return std::sqrt(squared_distance(a, b)); }

double max_abs_difference(const SparseVector& a, const SparseVector& b) {
  double worst = 0.0;
  merge_walk(a, b, [&](double x, double y) { worst = std::max(worst, std::abs(x - y)); });
  return worst;
}

}  // namespace bsp
