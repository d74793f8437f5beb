// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "irsee/metrics.hpp"
#include "irsee/subproblems.hpp"

namespace irsee {

// Options shared by both pipelines; the baseline wrappers flip these.
struct RunOptions {
  bool optimize_beams = true;
  bool optimize_phases = true;
  bool include_irs_power = true;
  bool random_beams = false;   // draw init beams instead of matched filters
  bool zero_irs_channels = false;
};

enum class StopReason { Converged, MaxIterations, InitFailed };

struct EiaState {
  BeamformingSet beams;
  CommonRateSplit split;
  PhaseConfig phases;
  double rho = 0.0;
};

struct EiaIterRecord {
  int iteration = 0;
  double rho = 0.0;               // fractional parameter entering the iteration, Mbit/J
  double beam_objective = 0.0;   // surrogate value of the beam step, bit/s
  double phase_objective = 0.0;  // surrogate value of the accepted phase step, bit/s
  double power_mw = 0.0;
  double min_rank_ratio = 1.0;   // worst lifted-block rank quality, beams and phases
  double beam_rank_ratio = 1.0;  // worst transmit-covariance block alone
  bool phase_accepted = true;
};

struct EiaResult {
  StopReason reason = StopReason::Converged;
  EiaState state;
  std::vector<EiaIterRecord> trace;
  int iterations = 0;
  double final_ee = 0.0;          // Mbit/J
  double final_rate = 0.0;        // weighted sum rate, bit/s
  FeasibilityReport feasibility;
  std::string note;
};

// State initialization: random phases, matched-filter beams scaled to the
// power budget, zero split, rho = 0, followed by a repair pass that covers
// rate floors out of the common budget (shifting power toward the common
// beam if needed). Fails only when the floors cannot be met.
EiaState init_state_eia(const SystemConfig& config, const CompositeChannels& composites,
                        std::uint64_t seed, const RunOptions& options, bool* ok);

// Alternating maximization of the weighted energy efficiency for the
// exhaustive scheme: beam + split step, phase step, fractional-parameter
// update, until the parameter moves less than the configured tolerance.
EiaResult run_eia(const SystemConfig& config, const ChannelSet& channels,
                  std::uint64_t seed, const RunOptions& options = {});

}  // namespace irsee
