// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <stdexcept>

#include "irsee/common.hpp"

namespace irsee {

// First-order concave minorant of -log2(b), built at an expansion point b0:
//
//   -log2(b) >= -(a*b)/ln2 + log2(a) + 1/ln2   for all b > 0, a > 0,
//
// with equality exactly at a = 1/b0. Rebuilding the coefficient at the
// previous iterate is what makes the successive convex steps tight.
struct LogSurrogate {
  double a = 1.0;

  double evaluate(double b) const {
    return -(a * b) / kLn2 + std::log2(a) + 1.0 / kLn2;
  }

  // Affine pieces for program assembly: evaluate(b) = slope * b + offset.
  double slope() const { return -a / kLn2; }
  double offset() const { return std::log2(a) + 1.0 / kLn2; }
};

inline LogSurrogate make_surrogate(double b0) {
  if (!(b0 > 0.0)) throw std::invalid_argument("surrogate expansion point must be positive");
  return LogSurrogate{1.0 / b0};
}

}  // namespace irsee
