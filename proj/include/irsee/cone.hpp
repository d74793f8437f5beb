// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "irsee/common.hpp"

namespace irsee::cone {

// Convex program over complex Hermitian PSD blocks:
//
//   maximize   affine(X) + sum_j w_j * ln(affine_j(X))        (w_j >= 0)
//   subject to affine_i(X) + sum_j w_ij * ln(affine_ij(X)) >= 0
//              affine_l(X) = 0
//              selected entries pinned to fixed values
//              X_b >= 0 for every block
//
// where affine(X) = offset + sum_b Re tr(coeff_b * X_b). Scalars are 1x1
// blocks. Equality constraints and fixed entries carry no log terms.

struct BlockSpec {
  std::string name;
  int dim = 1;
};

struct AffineExpr {
  double offset = 0.0;
  std::vector<MatC> coeff;  // one per block; empty matrix means zero

  double value(const std::vector<MatC>& x) const;
};

struct LogTerm {
  double weight = 0.0;  // must be >= 0
  AffineExpr arg;
};

struct Expr {
  AffineExpr affine;
  std::vector<LogTerm> logs;

  double value(const std::vector<MatC>& x) const;
};

enum class Sense { GreaterEqualZero, EqualZero };

struct Constraint {
  std::string label;
  Expr expr;
  Sense sense = Sense::GreaterEqualZero;
};

struct FixedEntry {
  int block = 0;
  int row = 0;
  int col = 0;
  cxd value{0.0, 0.0};
};

struct ConeProgram {
  std::vector<BlockSpec> blocks;
  Expr objective;  // maximized
  std::vector<Constraint> constraints;
  std::vector<FixedEntry> fixed;

  int add_block(const std::string& name, int dim);
  AffineExpr zero_affine() const;  // offset 0, one empty slot per block

  // Throws std::invalid_argument on shape errors, non-Hermitian
  // coefficients, negative log weights, logs on equality constraints, or a
  // total real-embedded dimension above the 400 guardrail.
  void validate() const;

  void dump(std::ostream& os) const;
};

enum class SolveStatus { Optimal, Infeasible, MaxIter, NumericalFailure };

struct SolverOptions {
  double tol = 1e-7;       // relative duality-gap target
  int max_newton = 600;    // total Newton iterations across all phases
  bool collect_path = true;
};

struct StageRecord {
  double mu = 0.0;
  double objective = 0.0;   // true objective at the centered point
  double dual_bound = 0.0;  // objective + mu * barrier degree
  int newton_steps = 0;
};

struct ConeSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::vector<MatC> x;       // recovered Hermitian blocks
  double objective = 0.0;
  double dual_bound = 0.0;
  double primal_residual = 0.0;  // worst equality violation / negative slack
  double dual_residual = 0.0;    // Newton decrement at exit (affine invariant)
  double mu_final = 0.0;
  int newton_iterations = 0;
  std::vector<StageRecord> path;
  std::string infeasible_family;  // label of the blocking constraint
};

ConeSolution solve(const ConeProgram& program, const SolverOptions& options = {});

// Real symmetric embedding [Re, -Im; Im, Re] of a Hermitian matrix. Traces
// double under the embedding, so program assembly compensates with a 1/2.
MatD embed_complex(const MatC& h);

// Inverse of the embedding for (approximately) structured symmetric
// matrices; averages the two copies so the round trip is exact for
// embedded inputs and a projection otherwise.
MatC recover_hermitian(const MatD& e);

struct RankOne {
  VecC w;
  double ratio = 1.0;  // lambda_max / trace, 1 for the zero matrix
};

// Principal eigenpair factorization w * w^H ~= W with the global phase
// fixed so the last coordinate (or the largest one if that vanishes) is
// real nonnegative.
RankOne rank_one_extract(const MatC& w);

// Draw from the zero-mean complex Gaussian with covariance W (eigenvalue
// square root, robust to semidefinite W).
VecC sample_from_gram(const MatC& w, std::mt19937_64& rng);

}  // namespace irsee::cone
