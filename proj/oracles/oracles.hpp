// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace irsee::oracle {

// One independently-checked quantity: the library result is compared
// against a reference computed by a different method (closed form, grid
// search, Monte-Carlo estimate, exhaustive enumeration, or a first-order
// reference solver). `worst` is the largest deviation observed across all
// instances, in the units stated by `detail`.
struct CheckRow {
  std::string suite;
  std::string name;
  std::string detail;  // reference method and deviation units
  int instances = 0;
  double tolerance = 0.0;
  double worst = 0.0;
  bool pass = false;
};

// Fading calibration and channel composition:
//  - empirical mean link power vs the path-loss model (Monte Carlo)
//  - stacked composite channel vs longhand per-element evaluation
//  - rate formulas vs scalar recomputation
std::vector<CheckRow> run_channel_suite(std::uint64_t seed);

// Convex-step solver against independent references on toy shapes:
//  - single-beam power program vs its eigenvalue closed form
//  - scalar beam+share program vs a 2-D grid search
//  - two-element reflection program vs a 2-D phase grid
//  - full two-user beam-step program vs projected-gradient ascent
//  - duality-gap / feasibility residuals of every returned solution
std::vector<CheckRow> run_solver_suite(std::uint64_t seed);

// Assignment solver against exhaustive enumeration, including the
// zero-penalty argmax case and the huge-penalty concentration case.
std::vector<CheckRow> run_assignment_suite(std::uint64_t seed);

// Dispatch by name: "channel", "solver", "assignment", or "all".
// Throws std::invalid_argument for unknown suite names.
std::vector<CheckRow> run_suite(const std::string& name, std::uint64_t seed);

void write_report_csv(const std::vector<CheckRow>& rows, std::ostream& os);

}  // namespace irsee::oracle
