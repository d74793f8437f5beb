// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "irsee/cone.hpp"
#include "irsee/metrics.hpp"

namespace irsee {

// Building blocks shared by the exhaustive and opportunistic pipelines.
// Both alternate the same two convex steps; they differ only in the
// effective channel data fed in (all-surface composite vs assigned pair)
// and in how many phase blocks the phase step carries.

// ---------------------------------------------------------------- beams --

// Data for the joint beamformer + rate-split step. gram[k] is the
// normalized effective rank-one channel matrix of user k: with effective
// row channel v_k^H (length M), gram[k] = v_k v_k^H * p_max / noise_k, so
// that tr(gram[k] * W_hat) is the received power in noise units under the
// budget-normalized beam matrix W_hat = W / p_max.
struct BeamStepData {
  std::vector<MatC> gram;
  VecD priority;
  VecD min_rate;
  double rho_over_b = 0.0;      // Dinkelbach weight divided by bandwidth
  double p_max_mw = 0.0;
  double static_power_mw = 0.0; // power that does not depend on the beams
  double sca_tol = 1e-5;
  int sca_max_iter = 30;
  double solver_tol = 1e-7;
};

struct BeamStepResult {
  cone::SolveStatus status = cone::SolveStatus::NumericalFailure;
  BeamformingSet beams;
  CommonRateSplit split;
  double surrogate_objective = 0.0;  // per-Hz units (objective / bandwidth)
  double min_rank_ratio = 1.0;
  int sca_iterations = 0;
  std::string infeasible_family;
};

BeamStepResult solve_beam_split_step(const BeamStepData& data,
                                     const BeamformingSet& init_beams,
                                     const CommonRateSplit& init_split,
                                     std::mt19937_64& rng);

// --------------------------------------------------------------- phases --

// One phase block: the per-user received amplitudes through the reflecting
// elements covered by this block. For the exhaustive scheme there is a
// single block of dimension N*L+1 covering all surfaces; for the
// opportunistic scheme one block of dimension L+1 per active surface.
// a[k][i] (length = block dim - 1) and alpha[k][i] are the reflected and
// direct parts of beam i as seen by constrained user k, normalized by the
// user's noise amplitude. Beam index 0 is the common stream, 1..K the
// private streams.
struct PhaseBlockData {
  std::vector<std::vector<VecC>> a;
  std::vector<std::vector<cxd>> alpha;
  VecD priority;        // weight of each constrained user in the objective
  VecD private_floor;   // SINR threshold for the private stream
  double common_floor = 0.0;  // SINR threshold for the common stream
  std::vector<int> user_ids;  // global user indices, for labels/reporting
};

struct PhaseStepData {
  std::vector<PhaseBlockData> blocks;
  double sca_tol = 1e-5;
  int sca_max_iter = 30;
  double solver_tol = 1e-7;
  int randomization_draws = 50;
};

struct PhaseStepResult {
  cone::SolveStatus status = cone::SolveStatus::NumericalFailure;
  std::vector<VecC> f;  // one unit-modulus vector per block
  double surrogate_objective = 0.0;
  double min_rank_ratio = 1.0;
  int sca_iterations = 0;
  std::string infeasible_family;
};

PhaseStepResult solve_phase_step(const PhaseStepData& data,
                                 const std::vector<VecC>& init_f,
                                 std::mt19937_64& rng);

// ---------------------------------------------------------------- split --

// Closed-form optimal rate split for fixed everything else: meet the rate
// floors first, then give the remaining common budget to the user with the
// largest priority (lowest index on ties). Returns nullopt when the floors
// alone exceed the budget.
std::optional<CommonRateSplit> optimal_split(const VecD& priority, const VecD& floors,
                                             double budget);

}  // namespace irsee
