// SPDX-License-Identifier: Apache-2.0
//
// Branch-and-bound assignment solver against exhaustive enumeration and on
// structural corner cases.

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "irsee/bnb.hpp"

using namespace irsee;

namespace {

// Enumerates every assignment of K users to N surfaces (N^K candidates),
// filters by capacity, and returns the best exact objective.
struct EnumBest {
  bool feasible = false;
  double value = -1e300;
  MatI omega;
};

EnumBest enumerate_best(const AssociationProblem& pb) {
  const int n_irs = static_cast<int>(pb.gain.rows());
  const int users = static_cast<int>(pb.gain.cols());
  EnumBest best;
  std::vector<int> pick(users, 0);
  const long total = static_cast<long>(std::pow(n_irs, users));
  for (long code = 0; code < total; ++code) {
    long c = code;
    for (int k = 0; k < users; ++k) {
      pick[k] = static_cast<int>(c % n_irs);
      c /= n_irs;
    }
    std::vector<int> load(n_irs, 0);
    for (int k = 0; k < users; ++k) ++load[pick[k]];
    bool ok = true;
    for (int n = 0; n < n_irs; ++n) ok = ok && load[n] <= pb.capacity;
    if (!ok) continue;
    MatI omega = MatI::Zero(n_irs, users);
    for (int k = 0; k < users; ++k) omega(pick[k], k) = 1;
    const double v = association_objective(pb, omega);
    if (!best.feasible || v > best.value) {
      best.feasible = true;
      best.value = v;
      best.omega = omega;
    }
  }
  return best;
}

bool capacity_ok(const MatI& omega, int capacity) {
  for (int n = 0; n < omega.rows(); ++n)
    if (omega.row(n).sum() > capacity) return false;
  for (int k = 0; k < omega.cols(); ++k)
    if (omega.col(k).sum() != 1) return false;
  return true;
}

}  // namespace

TEST_CASE("assignment solver matches exhaustive enumeration") {
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> gain_dist(0.0, 1.0);
  std::uniform_real_distribution<double> pen_dist(0.0, 0.8);
  int checked = 0;
  for (int n_irs = 1; n_irs <= 3; ++n_irs)
    for (int users = 1; users <= 3; ++users)
      for (int cap = 1; cap <= 3; ++cap) {
        if (users > n_irs * cap) continue;
        for (int rep = 0; rep < 20; ++rep) {
          AssociationProblem pb;
          pb.gain = MatD::NullaryExpr(n_irs, users, [&] { return gain_dist(rng); });
          pb.penalty = pen_dist(rng);
          pb.capacity = cap;
          const EnumBest oracle = enumerate_best(pb);
          const BnbResult res = solve_association(pb);
          REQUIRE(res.feasible == oracle.feasible);
          REQUIRE(res.objective ==
                  doctest::Approx(oracle.value).epsilon(1e-6).scale(1.0));
          REQUIRE(capacity_ok(res.omega, cap));
          REQUIRE(association_objective(pb, res.omega) ==
                  doctest::Approx(res.objective).epsilon(1e-12));
          // bound bracket at termination
          REQUIRE(res.upper >= res.lower - 1e-6 * (1.0 + std::abs(res.upper)));
          REQUIRE(res.upper - res.lower <=
                  pb.eps_rel * (1.0 + std::abs(res.upper)) + 1e-9);
          REQUIRE(res.nodes <= (1 << (n_irs * users + 1)));
          ++checked;
        }
      }
  CHECK(checked > 0);
  MESSAGE("enumeration-checked instances: ", checked);
}

TEST_CASE("single surface assigns everyone without branching") {
  AssociationProblem pb;
  pb.gain = MatD(1, 3);
  pb.gain << 0.3, 0.9, 0.1;
  pb.penalty = 0.2;
  pb.capacity = 3;
  const BnbResult res = solve_association(pb);
  REQUIRE(res.feasible);
  CHECK(res.omega.sum() == 3);
  CHECK(res.nodes == 1);  // constraint propagation decides the root
  CHECK(res.objective == doctest::Approx(0.3 + 0.9 + 0.1 - 0.2));
}

TEST_CASE("large activity penalty concentrates users on few surfaces") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gain_dist(1.0, 1.01);  // near-equal rates
  AssociationProblem pb;
  pb.gain = MatD::NullaryExpr(3, 4, [&] { return gain_dist(rng); });
  pb.penalty = 100.0;
  pb.capacity = 2;
  const BnbResult res = solve_association(pb);
  REQUIRE(res.feasible);
  int active = 0;
  for (int n = 0; n < 3; ++n) active += res.omega.row(n).sum() > 0 ? 1 : 0;
  CHECK(active == 2);  // ceil(4 users / capacity 2)
}

TEST_CASE("zero penalty yields per-user argmax when capacity is slack") {
  AssociationProblem pb;
  pb.gain = MatD(2, 2);
  pb.gain << 0.9, 0.2,
             0.1, 0.8;
  pb.penalty = 0.0;
  pb.capacity = 2;
  const BnbResult res = solve_association(pb);
  REQUIRE(res.feasible);
  CHECK(res.omega(0, 0) == 1);
  CHECK(res.omega(1, 1) == 1);
}

TEST_CASE("capacity shortfall is reported infeasible") {
  AssociationProblem pb;
  pb.gain = MatD::Constant(2, 5, 1.0);
  pb.penalty = 0.1;
  pb.capacity = 2;  // 2 surfaces * 2 < 5 users
  const BnbResult res = solve_association(pb);
  CHECK_FALSE(res.feasible);
}

TEST_CASE("relaxation bound dominates the rounded value at the root") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> gain_dist(0.0, 1.0);
  for (int rep = 0; rep < 10; ++rep) {
    AssociationProblem pb;
    pb.gain = MatD::NullaryExpr(3, 3, [&] { return gain_dist(rng); });
    pb.penalty = 0.3;
    pb.capacity = 2;
    BnbNode root;
    root.fixed.setConstant(3, 3, -1);
    const RelaxationResult rel = solve_association_relaxation(pb, root);
    REQUIRE(rel.feasible);
    const MatI rounded = round_association(pb, rel.omega, root);
    REQUIRE(rounded.size() > 0);
    const double lower = association_objective(pb, rounded);
    CHECK(rel.value >= lower - 1e-6 * (1.0 + std::abs(rel.value)));
  }
}

TEST_CASE("rounding repairs capacity violations deterministically") {
  AssociationProblem pb;
  pb.gain = MatD(2, 3);
  pb.gain << 0.9, 0.8, 0.7,
             0.5, 0.4, 0.3;
  pb.penalty = 0.0;
  pb.capacity = 2;
  BnbNode root;
  root.fixed.setConstant(2, 3, -1);
  MatD relaxed(2, 3);
  relaxed << 0.9, 0.9, 0.9,
             0.1, 0.1, 0.1;  // argmax puts all three on surface 0
  const MatI rounded = round_association(pb, relaxed, root);
  REQUIRE(rounded.size() > 0);
  REQUIRE(capacity_ok(rounded, pb.capacity));
  // every move loses the same 0.4, so the tie rule (move the lowest user
  // index) relocates user 0 to surface 1
  CHECK(rounded(1, 0) == 1);
  CHECK(rounded(0, 1) == 1);
  CHECK(rounded(0, 2) == 1);
}

TEST_CASE("branch entry picks the most fractional coordinate") {
  BnbNode node;
  node.fixed.setConstant(2, 2, -1);
  MatD omega(2, 2);
  omega << 0.5, 0.9,
           0.5, 0.1;
  MatI rounded(2, 2);
  rounded << 1, 1,
             0, 0;
  const auto [bn, bk] = pick_branch_entry(omega, rounded, node);
  CHECK(bn == 0);
  CHECK(bk == 0);  // |0.5 - 1| ties at (0,0),(1,0): lexicographic smallest row
}

TEST_CASE("trace export covers every node") {
  AssociationProblem pb;
  pb.gain = MatD(3, 3);
  pb.gain << 0.91, 0.10, 0.52,
             0.88, 0.95, 0.49,
             0.05, 0.90, 0.50;
  pb.penalty = 0.45;
  pb.capacity = 1;
  const BnbResult res = solve_association(pb);
  REQUIRE(res.feasible);
  std::ostringstream os;
  dump_bnb_trace_csv(res, os);
  const std::string text = os.str();
  CHECK(text.rfind("id,parent,depth,fixed,upper,lower,pruned\n", 0) == 0);
  int lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  CHECK(lines == res.nodes + 1);
  CHECK(static_cast<int>(res.trace.size()) == res.nodes);
  CHECK(res.trace.front().id == 0);
  CHECK(res.trace.front().parent == -1);
}

TEST_CASE("assignment solve is deterministic") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> gain_dist(0.0, 1.0);
  AssociationProblem pb;
  pb.gain = MatD::NullaryExpr(3, 3, [&] { return gain_dist(rng); });
  pb.penalty = 0.25;
  pb.capacity = 2;
  const BnbResult a = solve_association(pb);
  const BnbResult b = solve_association(pb);
  REQUIRE(a.feasible == b.feasible);
  CHECK(a.objective == b.objective);
  CHECK(a.omega == b.omega);
  CHECK(a.nodes == b.nodes);
}
