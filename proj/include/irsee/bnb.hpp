// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "irsee/common.hpp"

namespace irsee {

// Surface-to-user assignment as a small mixed-binary program, solved by
// branch and bound over the box relaxation. The objective is
//
//   sum_{n,k} gain(n,k) * omega(n,k) - penalty * sum_n max_k omega(n,k)
//
// subject to: each user assigned exactly once, at most `capacity` users per
// surface, omega binary. gain already carries bandwidth and priorities;
// penalty is the per-active-surface power cost times the current
// fractional-program weight.
struct AssociationProblem {
  MatD gain;          // N x K
  double penalty = 0.0;
  int capacity = 2;
  double eps_rel = 1e-6;   // termination gap relative to the root bound
  double solver_tol = 1e-9;
};

// Node bookkeeping: fixed(n,k) is -1 (free), 0, or 1.
struct BnbNode {
  Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> fixed;
  double upper = 0.0;
  double lower = 0.0;
  MatD relaxed;   // solution of the box relaxation at this node
  bool feasible = true;
  int depth = 0;
  int id = 0;
};

struct BnbTraceRow {
  int id = 0;
  int parent = -1;
  int depth = 0;
  int fixed_count = 0;
  double upper = 0.0;
  double lower = 0.0;
  bool pruned = false;
};

struct BnbResult {
  bool feasible = false;
  MatI omega;
  double objective = 0.0;  // exact objective of the returned assignment
  double upper = 0.0;      // global bound at termination
  double lower = 0.0;
  int nodes = 0;
  std::vector<BnbTraceRow> trace;
};

// Box relaxation at a node: omega in [0,1] with the node's fixed entries
// substituted, plus epigraph variables for the max terms. Returns the bound
// and the relaxed solution; infeasible nodes get upper = lower = -inf.
struct RelaxationResult {
  bool feasible = false;
  double value = 0.0;
  MatD omega;
};
RelaxationResult solve_association_relaxation(const AssociationProblem& problem,
                                              const BnbNode& node);

// Per-user argmax rounding (ties to the smallest surface index) followed by
// a deterministic repair pass that moves the smallest-loss users off
// over-capacity surfaces. Respects fixed entries. Returns an empty matrix
// when no capacity-feasible completion exists.
MatI round_association(const AssociationProblem& problem, const MatD& omega,
                       const BnbNode& node);

// Entry with the largest |omega - rounded| gap; ties broken by the
// lexicographically smallest (n, k). Returns {-1, -1} when every entry is
// fixed (leaf).
std::pair<int, int> pick_branch_entry(const MatD& omega, const MatI& rounded,
                                      const BnbNode& node);

double association_objective(const AssociationProblem& problem, const MatI& omega);

BnbResult solve_association(const AssociationProblem& problem);

void dump_bnb_trace_csv(const BnbResult& result, std::ostream& os);

}  // namespace irsee
