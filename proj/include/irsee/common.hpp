// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cmath>
#include <cstdint>
#include <random>

namespace irsee {

using cxd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatD = Eigen::MatrixXd;
using VecD = Eigen::VectorXd;
using MatI = Eigen::MatrixXi;

inline constexpr double kLn2 = 0.6931471805599453094;

// dBm <-> milliwatt conversions; all internal power bookkeeping is in mW.
inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

// Named RNG sub-streams derived from a single root seed. Every consumer of
// randomness draws from its own stream so that adding a draw in one place
// never shifts the values seen elsewhere.
enum class Stream : std::uint64_t {
  Placement = 1,
  Fading = 2,
  PhaseInit = 3,
  BeamInit = 4,
  Randomization = 5,
};

inline std::mt19937_64 substream(std::uint64_t root_seed, Stream which,
                                 std::uint64_t index = 0) {
  std::seed_seq seq{root_seed, static_cast<std::uint64_t>(which), index};
  return std::mt19937_64(seq);
}

}  // namespace irsee
