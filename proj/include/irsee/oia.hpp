// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsee/bnb.hpp"
#include "irsee/eia.hpp"

namespace irsee {

struct OiaState {
  BeamformingSet beams;
  CommonRateSplit split;
  PhaseConfig phases;
  AssociationMatrix assoc;
  double rho = 0.0;
};

struct OiaIterRecord {
  int iteration = 0;
  double rho = 0.0;              // fractional parameter entering the iteration, Mbit/J
  double assoc_objective = 0.0;  // branch-and-bound incumbent value, bit/s
  double beam_objective = 0.0;
  double phase_objective = 0.0;
  double power_mw = 0.0;
  double min_rank_ratio = 1.0;
  int active_surfaces = 0;
  int bnb_nodes = 0;
  bool assoc_accepted = true;
  bool phase_accepted = true;
};

struct OiaResult {
  StopReason reason = StopReason::Converged;
  OiaState state;
  std::vector<OiaIterRecord> trace;
  int iterations = 0;
  double final_ee = 0.0;    // Mbit/J
  double final_rate = 0.0;  // weighted sum rate, bit/s
  FeasibilityReport feasibility;
  std::string note;
  std::vector<BnbResult> bnb_audit;  // filled when options request it
};

struct OiaOptions : RunOptions {
  bool keep_bnb_audit = false;
};

// Alternating maximization for the opportunistic scheme: association by
// branch and bound, beam + split step over the assigned pair channels,
// per-surface phase step for active surfaces, fractional-parameter update.
OiaResult run_oia(const SystemConfig& config, const ChannelSet& channels,
                  std::uint64_t seed, const OiaOptions& options = {});

}  // namespace irsee
