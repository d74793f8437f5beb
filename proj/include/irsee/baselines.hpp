// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsee/oia.hpp"

namespace irsee {

enum class BaselineKind {
  RandomBeamforming,  // Gaussian beams scaled to the power budget, fixed
  RandomPhase,        // uniform phases, fixed
  NoIrs,              // zeroed reflecting channels, element power dropped
};

enum class Scheme { Eia, Oia };

// Runs the chosen pipeline with one optimization step disabled as dictated
// by the baseline; every remaining variable is still optimized. Determinism
// note: the random draws reuse the same sub-streams the optimizers use for
// their own initialization, so for a given seed the full optimizer starts
// exactly where the corresponding baseline stays.
EiaResult run_baseline_eia(BaselineKind kind, const SystemConfig& config,
                           const ChannelSet& channels, std::uint64_t seed);
OiaResult run_baseline_oia(BaselineKind kind, const SystemConfig& config,
                           const ChannelSet& channels, std::uint64_t seed);

}  // namespace irsee
