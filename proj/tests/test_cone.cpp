// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "irsee/cone.hpp"

using namespace irsee;
using namespace irsee::cone;

namespace {

MatC frozen3() {
  MatC c(3, 3);
  c << cxd(2.0, 0.0), cxd(1.0, 1.0), cxd(0.5, -0.2),
      cxd(1.0, -1.0), cxd(1.0, 0.0), cxd(0.0, 0.3),
      cxd(0.5, 0.2), cxd(0.0, -0.3), cxd(1.5, 0.0);
  return c;
}

constexpr double kLambdaMax3 = 3.0570763082288517;

}  // namespace

TEST_CASE("embedding round trip and trace doubling") {
  const MatC h = frozen3();
  const MatD e = embed_complex(h);
  REQUIRE(e.rows() == 6);
  CHECK((e - e.transpose()).norm() <= 1e-14);
  CHECK(e.trace() == doctest::Approx(2.0 * h.trace().real()).epsilon(1e-14));
  const MatC back = recover_hermitian(e);
  CHECK((back - h).norm() <= 1e-13);
}

TEST_CASE("rank one extraction") {
  VecC v(3);
  v << cxd(1.0, 2.0), cxd(-0.5, 0.3), cxd(0.7, -1.1);
  const MatC w = v * v.adjoint();
  const RankOne r = rank_one_extract(w);
  CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-10));
  // recovered vector equals v up to the global phase that makes the last
  // coordinate real nonnegative
  const VecC expect = v * std::polar(1.0, -std::arg(v(2)));
  CHECK((r.w - expect).norm() <= 1e-9 * v.norm());

  const RankOne z = rank_one_extract(MatC::Zero(2, 2));
  CHECK(z.ratio == doctest::Approx(1.0));
  CHECK(z.w.norm() == 0.0);
}

TEST_CASE("gram sampling stays in the range of the covariance") {
  VecC v(3);
  v << cxd(0.3, -0.4), cxd(1.2, 0.1), cxd(0.0, 0.9);
  const MatC w = v * v.adjoint();
  auto rng = substream(123, Stream::Randomization);
  for (int t = 0; t < 10; ++t) {
    const VecC s = sample_from_gram(w, rng);
    // rank-one covariance: every draw is collinear with v
    const double overlap = std::abs(v.dot(s));
    CHECK(std::abs(overlap - s.norm() * v.norm()) <= 1e-9 * s.norm() * v.norm());
  }
}

TEST_CASE("program validation rejects malformed input") {
  SUBCASE("non-hermitian coefficient") {
    ConeProgram p;
    p.add_block("x", 2);
    p.objective.affine = p.zero_affine();
    MatC bad(2, 2);
    bad << cxd(1.0, 0.0), cxd(1.0, 0.5), cxd(0.0, 0.0), cxd(2.0, 0.0);
    p.objective.affine.coeff[0] = bad;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("negative log weight") {
    ConeProgram p;
    p.add_block("x", 1);
    AffineExpr arg = p.zero_affine();
    arg.coeff[0] = MatC::Identity(1, 1);
    p.objective.logs.push_back({-1.0, arg});
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("log on an equality") {
    ConeProgram p;
    p.add_block("x", 1);
    Constraint c;
    c.label = "eq";
    c.sense = Sense::EqualZero;
    c.expr.affine = p.zero_affine();
    AffineExpr arg = p.zero_affine();
    arg.coeff[0] = MatC::Identity(1, 1);
    c.expr.logs.push_back({1.0, arg});
    p.constraints.push_back(c);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("pinned entry out of range") {
    ConeProgram p;
    p.add_block("x", 2);
    p.fixed.push_back({0, 2, 0, cxd(1.0, 0.0)});
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SUBCASE("block too large for the embedded guardrail") {
    ConeProgram p;
    p.add_block("x", 201);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
}

TEST_CASE("solver recovers the top eigenvalue under a trace pin") {
  ConeProgram p;
  p.add_block("w", 3);
  p.objective.affine = p.zero_affine();
  p.objective.affine.coeff[0] = frozen3();

  Constraint tr;
  tr.label = "trace";
  tr.sense = Sense::EqualZero;
  tr.expr.affine = p.zero_affine();
  tr.expr.affine.coeff[0] = MatC::Identity(3, 3);
  tr.expr.affine.offset = -1.0;
  p.constraints.push_back(tr);

  const ConeSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(kLambdaMax3).epsilon(2e-5));
  CHECK(sol.primal_residual <= 1e-6);
  CHECK(sol.dual_bound >= kLambdaMax3 - 1e-5);
  const RankOne r = rank_one_extract(sol.x[0]);
  CHECK(r.ratio >= 0.99);

  // objective is nondecreasing along the barrier path
  for (size_t i = 1; i < sol.path.size(); ++i)
    CHECK(sol.path[i].objective >= sol.path[i - 1].objective - 1e-6);
}

TEST_CASE("solver with a trace inequality reaches the same value") {
  ConeProgram p;
  p.add_block("w", 3);
  p.objective.affine = p.zero_affine();
  p.objective.affine.coeff[0] = frozen3();

  Constraint tr;
  tr.label = "power";
  tr.expr.affine = p.zero_affine();
  tr.expr.affine.coeff[0] = -MatC::Identity(3, 3);
  tr.expr.affine.offset = 1.0;
  p.constraints.push_back(tr);

  const ConeSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(kLambdaMax3).epsilon(2e-5));
}

TEST_CASE("pinned diagonal entry shapes the optimum") {
  // maximize tr(C X), X >= 0, tr X = 1, X(0,0) = 0.3 on a 2x2 block:
  // closed form 0.3 c00 + 0.7 c11 + 2 sqrt(0.21) |c01|
  ConeProgram p;
  p.add_block("x", 2);
  MatC c(2, 2);
  c << cxd(1.0, 0.0), cxd(0.4, -0.3), cxd(0.4, 0.3), cxd(2.0, 0.0);
  p.objective.affine = p.zero_affine();
  p.objective.affine.coeff[0] = c;

  Constraint tr;
  tr.label = "trace";
  tr.sense = Sense::EqualZero;
  tr.expr.affine = p.zero_affine();
  tr.expr.affine.coeff[0] = MatC::Identity(2, 2);
  tr.expr.affine.offset = -1.0;
  p.constraints.push_back(tr);
  p.fixed.push_back({0, 0, 0, cxd(0.3, 0.0)});

  const ConeSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(2.158257569495584).epsilon(2e-5));
  CHECK(std::abs(sol.x[0](0, 0).real() - 0.3) <= 1e-6);
}

TEST_CASE("logarithmic objective terms") {
  SUBCASE("single weighted log with a cap") {
    // maximize 2.5 ln(x) subject to x <= e: optimum 2.5 at x = e
    ConeProgram p;
    p.add_block("x", 1);
    AffineExpr arg = p.zero_affine();
    arg.coeff[0] = MatC::Identity(1, 1);
    p.objective.affine = p.zero_affine();
    p.objective.logs.push_back({2.5, arg});
    Constraint cap;
    cap.label = "cap";
    cap.expr.affine = p.zero_affine();
    cap.expr.affine.coeff[0] = -MatC::Identity(1, 1);
    cap.expr.affine.offset = 2.718281828459045;
    p.constraints.push_back(cap);

    const ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(2.5).epsilon(1e-4));
    CHECK(sol.x[0](0, 0).real() == doctest::Approx(2.718281828459045).epsilon(1e-3));
  }
  SUBCASE("two logs balance at the interior optimum") {
    // maximize ln(x) + ln(2 - x): optimum 0 at x = 1
    ConeProgram p;
    p.add_block("x", 1);
    AffineExpr up = p.zero_affine();
    up.coeff[0] = MatC::Identity(1, 1);
    AffineExpr down = p.zero_affine();
    down.coeff[0] = -MatC::Identity(1, 1);
    down.offset = 2.0;
    p.objective.affine = p.zero_affine();
    p.objective.logs.push_back({1.0, up});
    p.objective.logs.push_back({1.0, down});

    const ConeSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(sol.x[0](0, 0).real() == doctest::Approx(1.0).epsilon(1e-3));
  }
}

TEST_CASE("log-bearing inequality with an initially violated row") {
  // maximize x subject to -x + log2(y) >= 0 and y <= 5; the start x = y = 1
  // violates the first row, exercising the second feasibility stage
  ConeProgram p;
  p.add_block("x", 1);
  p.add_block("y", 1);
  p.objective.affine = p.zero_affine();
  p.objective.affine.coeff[0] = MatC::Identity(1, 1);

  Constraint row;
  row.label = "rate_floor";
  row.expr.affine = p.zero_affine();
  row.expr.affine.coeff[0] = -MatC::Identity(1, 1);
  AffineExpr arg = p.zero_affine();
  arg.coeff[1] = MatC::Identity(1, 1);
  row.expr.logs.push_back({1.0 / kLn2, arg});
  p.constraints.push_back(row);

  Constraint cap;
  cap.label = "y_cap";
  cap.expr.affine = p.zero_affine();
  cap.expr.affine.coeff[1] = -MatC::Identity(1, 1);
  cap.expr.affine.offset = 5.0;
  p.constraints.push_back(cap);

  const ConeSolution sol = solve(p);
  REQUIRE(sol.status == SolveStatus::Optimal);
  CHECK(sol.objective == doctest::Approx(2.321928094887362).epsilon(1e-4));
}

TEST_CASE("infeasibility detection") {
  SUBCASE("conflicting equalities") {
    ConeProgram p;
    p.add_block("x", 2);
    p.objective.affine = p.zero_affine();
    for (double target : {1.0, 2.0}) {
      Constraint c;
      c.label = "trace_" + std::to_string(target);
      c.sense = Sense::EqualZero;
      c.expr.affine = p.zero_affine();
      c.expr.affine.coeff[0] = MatC::Identity(2, 2);
      c.expr.affine.offset = -target;
      p.constraints.push_back(c);
    }
    const ConeSolution sol = solve(p);
    CHECK(sol.status == SolveStatus::Infeasible);
  }
  SUBCASE("cap below the cone") {
    ConeProgram p;
    p.add_block("x", 1);
    p.objective.affine = p.zero_affine();
    Constraint c;
    c.label = "impossible_cap";
    c.expr.affine = p.zero_affine();
    c.expr.affine.coeff[0] = -MatC::Identity(1, 1);
    c.expr.affine.offset = -1.0;  // requires x <= -1 while x >= 0
    p.constraints.push_back(c);
    const ConeSolution sol = solve(p);
    CHECK(sol.status == SolveStatus::Infeasible);
    CHECK(sol.infeasible_family == "impossible_cap");
  }
}

TEST_CASE("program dump is printable") {
  ConeProgram p;
  p.add_block("w", 2);
  p.objective.affine = p.zero_affine();
  p.objective.affine.coeff[0] = MatC::Identity(2, 2);
  Constraint tr;
  tr.label = "trace";
  tr.sense = Sense::EqualZero;
  tr.expr.affine = p.zero_affine();
  tr.expr.affine.coeff[0] = MatC::Identity(2, 2);
  tr.expr.affine.offset = -1.0;
  p.constraints.push_back(tr);
  p.fixed.push_back({0, 0, 0, cxd(0.5, 0.0)});
  std::stringstream ss;
  p.dump(ss);
  CHECK(ss.str().find("trace") != std::string::npos);
  CHECK(ss.str().find("w") != std::string::npos);
}
