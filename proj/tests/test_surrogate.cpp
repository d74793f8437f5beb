// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "irsee/surrogate.hpp"

using namespace irsee;

TEST_CASE("tangency at the expansion point") {
  for (double b0 : {0.2, 1.0, 3.7, 250.0}) {
    const LogSurrogate s = make_surrogate(b0);
    CHECK(s.evaluate(b0) == doctest::Approx(-std::log2(b0)).epsilon(1e-12));
  }
}

TEST_CASE("global lower bound on the negated log") {
  const LogSurrogate s = make_surrogate(2.0);
  for (double b : {0.1, 0.5, 1.0, 2.0, 4.0, 50.0}) {
    CHECK(s.evaluate(b) <= -std::log2(b) + 1e-12);
  }
}

TEST_CASE("affine decomposition matches evaluate") {
  const LogSurrogate s = make_surrogate(0.7);
  for (double b : {0.3, 0.7, 5.0}) {
    CHECK(s.evaluate(b) == doctest::Approx(s.slope() * b + s.offset()).epsilon(1e-12));
  }
}

TEST_CASE("rejects nonpositive expansion points") {
  CHECK_THROWS_AS(make_surrogate(0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_surrogate(-1.0), std::invalid_argument);
}
