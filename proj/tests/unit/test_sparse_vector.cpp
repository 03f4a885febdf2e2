#include <doctest.h>

#include <cmath>
#include <limits>

#include "bsp/errors.hpp"
#include "bsp/sparse_vector.hpp"

using bsp::SparseVector;

TEST_CASE("sparse vector arithmetic") {
  SparseVector a{{1, 2.0}, {5, -1.0}};
  SparseVector b{{5, 1.0}, {9, 3.0}};

  CHECK(a.get(1) == 2.0);
  CHECK(a.get(2) == 0.0);
  CHECK(a.dot(b) == -1.0);
  CHECK(a.squared_norm() == 5.0);

  const SparseVector sum = a + b;
  CHECK(sum.size() == 2);  // coordinate 5 cancels exactly and is dropped
  CHECK(sum.get(9) == 3.0);

  const SparseVector diff = a - b;
  CHECK(diff.get(5) == -2.0);
  CHECK(bsp::squared_distance(a, b) == doctest::Approx(diff.squared_norm()));
  CHECK(bsp::distance(a, b) == doctest::Approx(std::sqrt(diff.squared_norm())));
  CHECK(bsp::max_abs_difference(a, b) == 3.0);

  SparseVector c = a;
  c.add_scaled(b, 2.0);
  CHECK(c.get(5) == 1.0);
  CHECK(c.get(9) == 6.0);

  c *= 0.0;
  CHECK(c.empty());
}

TEST_CASE("sparse vector rejects non-finite values") {
  SparseVector v;
  CHECK_THROWS_AS(v.set(1, std::numeric_limits<double>::infinity()), bsp::NumericError);
  CHECK_THROWS_AS(v.add(1, std::nan("")), bsp::NumericError);
  v.set(1, 0.0);
  CHECK(v.empty());
}
