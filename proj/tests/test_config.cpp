// SPDX-License-Identifier: Apache-2.0
//
// Configuration parsing: defaults, unit conversion, list handling, strict
// key checking, and guardrails.

#include <sstream>

#include "doctest.h"
#include "irsee/config.hpp"

using namespace irsee;

namespace {

ParsedConfig parse_text(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is, "test.cfg");
}

}  // namespace

TEST_CASE("empty input keeps the documented defaults") {
  const ParsedConfig cfg = parse_text("");
  CHECK(cfg.system.antennas == 4);
  CHECK(cfg.system.users == 4);
  CHECK(cfg.system.irs_count == 4);
  CHECK(cfg.system.elements == 30);
  CHECK(cfg.system.bandwidth_hz == doctest::Approx(180.0e3));
  CHECK(cfg.system.p_max_mw == doctest::Approx(dbm_to_mw(34.0)));
  CHECK(cfg.system.p_user_mw == doctest::Approx(dbm_to_mw(10.0)));
  CHECK(cfg.system.p_ap_mw == doctest::Approx(dbm_to_mw(37.0)));
  CHECK(cfg.system.p_element_mw == doctest::Approx(6.0));
  CHECK(cfg.system.noise_mw == doctest::Approx(dbm_to_mw(-94.0)));
  CHECK(cfg.system.dinkelbach_tol == doctest::Approx(1e-3));
  // finalize fills the per-user vectors
  CHECK(cfg.system.priority.size() == 4);
  CHECK(cfg.system.priority.minCoeff() == 1.0);
  CHECK(cfg.system.min_rate.size() == 4);
  CHECK(cfg.system.min_rate.maxCoeff() == 0.0);
  CHECK(cfg.experiment.kind == ExperimentKind::Convergence);
  REQUIRE(cfg.experiment.schemes.size() == 1);
  CHECK(cfg.experiment.schemes[0] == SchemeLabel::Eia);
  REQUIRE(cfg.experiment.seeds.size() == 1);
  CHECK(cfg.experiment.seeds[0] == 1);
}

TEST_CASE("full round trip with comments and both sections") {
  const ParsedConfig cfg = parse_text(R"(# top comment
[scenario]
antennas = 2
users = 2          # inline comment
irs_count = 2
elements = 4
p_max_dbm = 30
noise_dbm = -90
priority = 1.5, 0.5
min_rate = 0.25
irs_capacity = 1
user_center_x = 150
irs_radius = 10

[experiment]
kind = sweep_pmax_ee
schemes = eia, oia, eia_no_irs
grid = 30, 32, 34
seeds = 1, 2, 3
output_dir = out_test
bnb_audit = true
workers = 2
)");
  CHECK(cfg.system.antennas == 2);
  CHECK(cfg.system.users == 2);
  CHECK(cfg.system.p_max_mw == doctest::Approx(1000.0));
  CHECK(cfg.system.noise_mw == doctest::Approx(1e-9).epsilon(1e-9));
  REQUIRE(cfg.system.priority.size() == 2);
  CHECK(cfg.system.priority(0) == 1.5);
  CHECK(cfg.system.priority(1) == 0.5);
  // single value broadcasts over all users
  REQUIRE(cfg.system.min_rate.size() == 2);
  CHECK(cfg.system.min_rate(1) == 0.25);
  CHECK(cfg.system.irs_capacity == 1);
  CHECK(cfg.system.geometry.user_center.x() == 150.0);
  CHECK(cfg.system.geometry.irs_radius == 10.0);
  CHECK(cfg.experiment.kind == ExperimentKind::SweepPmaxEe);
  REQUIRE(cfg.experiment.schemes.size() == 3);
  CHECK(cfg.experiment.schemes[2] == SchemeLabel::EiaNoIrs);
  REQUIRE(cfg.experiment.grid.size() == 3);
  CHECK(cfg.experiment.grid[1] == 32.0);
  REQUIRE(cfg.experiment.seeds.size() == 3);
  CHECK(cfg.experiment.output_dir == "out_test");
  CHECK(cfg.experiment.bnb_audit);
  CHECK(cfg.experiment.workers == 2);
}

TEST_CASE("errors carry the file name and line number") {
  SUBCASE("unknown key") {
    CHECK_THROWS_WITH_AS(parse_text("[scenario]\nantenas = 4\n"),
                         doctest::Contains("test.cfg:2"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_text("[scenario]\nantenas = 4\n"),
                         doctest::Contains("unknown key"), ConfigError);
  }
  SUBCASE("unknown section") {
    CHECK_THROWS_WITH_AS(parse_text("[scenari]\n"), doctest::Contains("test.cfg:1"),
                         ConfigError);
  }
  SUBCASE("key before any section") {
    CHECK_THROWS_WITH_AS(parse_text("antennas = 4\n"),
                         doctest::Contains("before any section"), ConfigError);
  }
  SUBCASE("malformed number") {
    CHECK_THROWS_WITH_AS(parse_text("[scenario]\nusers = four\n"),
                         doctest::Contains("expected an integer"), ConfigError);
  }
  SUBCASE("trailing characters") {
    CHECK_THROWS_WITH_AS(parse_text("[scenario]\np_max_dbm = 30dBm\n"),
                         doctest::Contains("trailing characters"), ConfigError);
  }
  SUBCASE("missing equals") {
    CHECK_THROWS_WITH_AS(parse_text("[scenario]\nusers 4\n"),
                         doctest::Contains("key = value"), ConfigError);
  }
  SUBCASE("bad scheme") {
    CHECK_THROWS_WITH_AS(parse_text("[experiment]\nschemes = eia, noma\n"),
                         doctest::Contains("unknown scheme"), ConfigError);
  }
  SUBCASE("bad bool") {
    CHECK_THROWS_WITH_AS(parse_text("[experiment]\nbnb_audit = maybe\n"),
                         doctest::Contains("boolean"), ConfigError);
  }
}

TEST_CASE("vector lengths must match the user count") {
  CHECK_THROWS_WITH_AS(parse_text("[scenario]\nusers = 3\npriority = 1, 2\n"),
                       doctest::Contains("2 entries"), ConfigError);
  // order independence: users declared after the list still applies
  const ParsedConfig ok = parse_text("[scenario]\npriority = 1, 2, 3\nusers = 3\n");
  REQUIRE(ok.system.priority.size() == 3);
  CHECK(ok.system.priority(2) == 3.0);
}

TEST_CASE("experiment guardrails") {
  CHECK_THROWS_WITH_AS(parse_text("[experiment]\nkind = sweep_elements\n"),
                       doctest::Contains("non-empty grid"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_text("[experiment]\ngrid = 1, 2\n"),
                       doctest::Contains("no grid"), ConfigError);
}

TEST_CASE("scenario guardrails are wrapped as config errors") {
  CHECK_THROWS_WITH_AS(parse_text("[scenario]\nusers = 0\n"),
                       doctest::Contains("invalid scenario"), ConfigError);
  // solver-size guardrail: the joint phase block would be far too large
  CHECK_THROWS_WITH_AS(parse_text("[scenario]\nelements = 500\n"),
                       doctest::Contains("invalid scenario"), ConfigError);
}

TEST_CASE("missing file reports its path") {
  CHECK_THROWS_WITH_AS(parse_config_file("/nonexistent/irsee.cfg"),
                       doctest::Contains("/nonexistent/irsee.cfg"), ConfigError);
}

TEST_CASE("scheme labels round trip through their names") {
  for (SchemeLabel s :
       {SchemeLabel::Eia, SchemeLabel::Oia, SchemeLabel::EiaRandomBeam,
        SchemeLabel::EiaRandomPhase, SchemeLabel::EiaNoIrs, SchemeLabel::OiaRandomBeam,
        SchemeLabel::OiaRandomPhase, SchemeLabel::OiaNoIrs}) {
    const std::string name = to_string(s);
    const ParsedConfig cfg = parse_text("[experiment]\nschemes = " + name + "\n");
    REQUIRE(cfg.experiment.schemes.size() == 1);
    CHECK(cfg.experiment.schemes[0] == s);
  }
}
