#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <utility>

namespace bsp {

using FeatureId = std::uint64_t;

/// Sparse real vector keyed by feature id. Holds feature vectors, weights and
/// stochastic gradients alike.
///
/// Entries are kept in id order and never store an explicit zero: any update
/// that lands exactly on 0.0 erases the entry. Non-finite values are rejected
/// with NumericError.
class SparseVector {
 public:
  using Map = std::map<FeatureId, double>;
  using const_iterator = Map::const_iterator;

  SparseVector() = default;
  SparseVector(std::initializer_list<std::pair<const FeatureId, double>> init);

  double get(FeatureId id) const;
  void set(FeatureId id, double value);
  void add(FeatureId id, double value);

  /// this += scale * other
  void add_scaled(const SparseVector& other, double scale);

  SparseVector& operator+=(const SparseVector& other);
  SparseVector& operator-=(const SparseVector& other);
  SparseVector& operator*=(double scale);

  double dot(const SparseVector& other) const;
  double squared_norm() const;
  double norm() const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  void clear() { entries_.clear(); }

  const_iterator begin() const { return entries_.begin(); }
  const_iterator end() const { return entries_.end(); }
  const Map& entries() const { return entries_; }

  bool operator==(const SparseVector& other) const = default;

 private:
  Map entries_;
};

SparseVector operator+(SparseVector lhs, const SparseVector& rhs);
SparseVector operator-(SparseVector lhs, const SparseVector& rhs);
SparseVector operator*(double scale, SparseVector v);

/// ||a - b||^2 without materializing the difference.
double squared_distance(const SparseVector& a, const SparseVector& b);
double distance(const SparseVector& a, const SparseVector& b);

/// Largest absolute coordinate difference over the union of supports.
double max_abs_difference(const SparseVector& a, const SparseVector& b);

}  // namespace bsp
