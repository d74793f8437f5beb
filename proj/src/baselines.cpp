// SPDX-License-Identifier: Apache-2.0

#include "irsee/baselines.hpp"

namespace irsee {

namespace {

// Translates a baseline into the optimizer flags: exactly one design block
// is frozen (or removed, for the surface-free case) and everything else
// still runs through the full alternating loop.
void apply_kind(BaselineKind kind, RunOptions* opts) {
  switch (kind) {
    case BaselineKind::RandomBeamforming:
      opts->optimize_beams = false;
      opts->random_beams = true;
      break;
    case BaselineKind::RandomPhase:
      opts->optimize_phases = false;
      break;
    case BaselineKind::NoIrs:
      opts->zero_irs_channels = true;
      opts->optimize_phases = false;
      opts->include_irs_power = false;
      break;
  }
}

}  // namespace

EiaResult run_baseline_eia(BaselineKind kind, const SystemConfig& config,
                           const ChannelSet& channels, std::uint64_t seed) {
  RunOptions opts;
  apply_kind(kind, &opts);
  return run_eia(config, channels, seed, opts);
}

OiaResult run_baseline_oia(BaselineKind kind, const SystemConfig& config,
                           const ChannelSet& channels, std::uint64_t seed) {
  OiaOptions opts;
  apply_kind(kind, &opts);
  return run_oia(config, channels, seed, opts);
}

}  // namespace irsee
