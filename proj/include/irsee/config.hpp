// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "irsee/scenario.hpp"

namespace irsee {

enum class ExperimentKind {
  Convergence,    // iteration traces at fixed parameters
  SweepElements,  // grid over elements per surface
  SweepIrsX,      // grid over the x coordinate of the surface disc center
  SweepPmaxEe,    // grid over the power budget, energy efficiency focus
  SweepPmaxRate,  // grid over the power budget, sum rate focus
};

// A scheme label selects a pipeline or one of its baselines.
enum class SchemeLabel {
  Eia,
  Oia,
  EiaRandomBeam,
  EiaRandomPhase,
  EiaNoIrs,
  OiaRandomBeam,
  OiaRandomPhase,
  OiaNoIrs,
};

std::string to_string(SchemeLabel label);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Convergence;
  std::vector<SchemeLabel> schemes{SchemeLabel::Eia};
  std::vector<double> grid;          // sweep values; empty for convergence
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
  bool bnb_audit = false;
  int workers = 0;  // 0: IRSEE_WORKERS env var, else hardware concurrency
};

struct ParsedConfig {
  SystemConfig system;
  ExperimentSpec experiment;
};

// Flat key = value format with [scenario] and [experiment] sections, '#'
// comments, and strict key checking. Throws ConfigError with a line number
// on unknown keys, malformed values, or guardrail violations.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

ParsedConfig parse_config(std::istream& is, const std::string& filename = "<config>");
ParsedConfig parse_config_file(const std::string& path);

}  // namespace irsee
