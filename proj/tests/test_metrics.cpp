// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "irsee/metrics.hpp"

using namespace irsee;

namespace {

// Hand-checkable single-antenna setup: the cascade contributes nothing
// (zero surface links), so the effective channel of user k is just its
// direct scalar. h_1 = 1, h_2 = 2, noise 2 mW, w_c = 3, w_1 = w_2 = 1.
struct ScalarCase {
  SystemConfig cfg;
  CompositeChannels comp;
  PhaseConfig phases;
  BeamformingSet beams;

  ScalarCase() {
    cfg.antennas = 1;
    cfg.users = 2;
    cfg.irs_count = 1;
    cfg.elements = 1;
    cfg.bandwidth_hz = 2.0;
    cfg.noise_mw = 2.0;
    cfg.p_ap_mw = 100.0;
    cfg.p_user_mw = 10.0;
    cfg.p_element_mw = 6.0;
    cfg.priority = VecD(2);
    cfg.priority << 1.0, 2.0;
    cfg.finalize();

    ChannelSet ch;
    ch.direct = {VecC::Constant(1, cxd(1.0, 0.0)), VecC::Constant(1, cxd(2.0, 0.0))};
    ch.ap_to_irs = {MatC::Zero(1, 1)};
    ch.irs_to_user = {{VecC::Zero(1), VecC::Zero(1)}};
    comp = assemble_composites(cfg, ch);

    phases.f = {VecC::Constant(1, cxd(1.0, 0.0))};
    beams.common = VecC::Constant(1, cxd(3.0, 0.0));
    beams.user = {VecC::Constant(1, cxd(1.0, 0.0)), VecC::Constant(1, cxd(1.0, 0.0))};
  }
};

}  // namespace

TEST_CASE("rates match the closed-form scalar case") {
  ScalarCase s;
  const RatesEia r = rates_eia(s.comp, s.phases, s.beams, s.cfg.noise_mw);
  // user 1: private SINR 1/(1+2), common SINR 9/(1+1+2)
  CHECK(r.priv(0) == doctest::Approx(std::log2(4.0 / 3.0)).epsilon(1e-12));
  CHECK(r.common(0) == doctest::Approx(std::log2(3.25)).epsilon(1e-12));
  // user 2: private SINR 4/(4+2), common SINR 36/(4+4+2)
  CHECK(r.priv(1) == doctest::Approx(std::log2(5.0 / 3.0)).epsilon(1e-12));
  CHECK(r.common(1) == doctest::Approx(std::log2(4.6)).epsilon(1e-12));
  CHECK(common_budget_eia(r) == doctest::Approx(std::log2(3.25)).epsilon(1e-12));
}

TEST_CASE("weighted totals and energy efficiency") {
  ScalarCase s;
  const RatesEia r = rates_eia(s.comp, s.phases, s.beams, s.cfg.noise_mw);
  CommonRateSplit split;
  split.c = VecD(2);
  split.c << 0.3, 0.5;
  CHECK(split.total() == doctest::Approx(0.8));
  const VecD totals = user_rates_eia(r, split);
  CHECK(totals(0) == doctest::Approx(0.3 + std::log2(4.0 / 3.0)).epsilon(1e-12));

  const double wsr = weighted_sum_rate(s.cfg, totals);
  CHECK(wsr == doctest::Approx(6.377937375222512).epsilon(1e-12));

  CHECK(s.beams.transmit_power_mw() == doctest::Approx(11.0).epsilon(1e-12));
  const double p = power_total_eia(s.beams, s.cfg);
  // 11 transmit + 100 access point + 2*10 user + 1*1*6 element
  CHECK(p == doctest::Approx(137.0).epsilon(1e-12));
  CHECK(power_total_eia(s.beams, s.cfg, false) == doctest::Approx(131.0).epsilon(1e-12));
  CHECK(weighted_ee(wsr, p) == doctest::Approx(wsr / 0.137).epsilon(1e-12));
}

TEST_CASE("per-pair rates reduce to the joint ones without a cascade") {
  ScalarCase s;
  const RatesOia r = rates_oia(s.comp, s.phases, s.beams, s.cfg.noise_mw);
  const RatesEia je = rates_eia(s.comp, s.phases, s.beams, s.cfg.noise_mw);
  REQUIRE(r.common.rows() == 1);
  REQUIRE(r.common.cols() == 2);
  for (int k = 0; k < 2; ++k) {
    CHECK(r.common(0, k) == doctest::Approx(je.common(k)).epsilon(1e-12));
    CHECK(r.priv(0, k) == doctest::Approx(je.priv(k)).epsilon(1e-12));
  }

  AssociationMatrix assoc;
  assoc.omega = MatI::Ones(1, 2);
  CHECK(assoc.assigned_surface(0) == 0);
  CHECK(assoc.active_surfaces() == std::vector<int>{0});
  CHECK(common_budget_oia(r, assoc) == doctest::Approx(std::log2(3.25)).epsilon(1e-12));

  CommonRateSplit split;
  split.c = VecD::Zero(2);
  const VecD totals = user_rates_oia(r, split, assoc);
  CHECK(totals(1) == doctest::Approx(std::log2(5.0 / 3.0)).epsilon(1e-12));

  // element power is only charged for surfaces that serve someone
  AssociationMatrix idle;
  idle.omega = MatI::Zero(1, 2);
  CHECK(power_total_oia(s.beams, assoc, s.cfg) == doctest::Approx(137.0));
  CHECK(power_total_oia(s.beams, idle, s.cfg) == doctest::Approx(131.0));
}

TEST_CASE("feasibility report flags each violated family") {
  ScalarCase s;
  CommonRateSplit split;
  split.c = VecD(2);
  split.c << 0.3, 0.5;

  SUBCASE("clean point passes") {
    s.cfg.p_max_mw = 20.0;
    const auto rep = check_feasibility_eia(s.cfg, s.comp, s.phases, s.beams, split);
    CHECK(rep.ok(1e-9));
    CHECK(rep.worst <= 1e-12);
  }

  SUBCASE("power budget violation is measured in milliwatt") {
    s.cfg.p_max_mw = 10.0;  // transmit power is 11
    const auto rep = check_feasibility_eia(s.cfg, s.comp, s.phases, s.beams, split);
    CHECK_FALSE(rep.ok(1e-3));
    bool found = false;
    for (const auto& row : rep.rows)
      if (row.constraint == "power_budget") {
        found = true;
        CHECK(row.violation == doctest::Approx(1.0).epsilon(1e-9));
      }
    CHECK(found);
  }

  SUBCASE("rate floor violation") {
    s.cfg.p_max_mw = 20.0;
    s.cfg.min_rate = VecD(2);
    s.cfg.min_rate << 5.0, 0.0;
    const auto rep = check_feasibility_eia(s.cfg, s.comp, s.phases, s.beams, split);
    CHECK_FALSE(rep.ok(1e-3));
  }

  SUBCASE("split exceeding the common budget") {
    s.cfg.p_max_mw = 20.0;
    CommonRateSplit greedy;
    greedy.c = VecD(2);
    greedy.c << 1.5, 0.5;  // budget is log2(3.25) ~ 1.70
    const auto rep = check_feasibility_eia(s.cfg, s.comp, s.phases, s.beams, greedy);
    CHECK_FALSE(rep.ok(1e-3));
  }

  SUBCASE("negative share") {
    s.cfg.p_max_mw = 20.0;
    CommonRateSplit neg;
    neg.c = VecD(2);
    neg.c << -0.2, 0.1;
    const auto rep = check_feasibility_eia(s.cfg, s.comp, s.phases, s.beams, neg);
    CHECK_FALSE(rep.ok(1e-3));
  }

  SUBCASE("unit modulus drift") {
    s.cfg.p_max_mw = 20.0;
    s.phases.f[0](0) = cxd(1.1, 0.0);
    const auto rep = check_feasibility_eia(s.cfg, s.comp, s.phases, s.beams, split);
    CHECK_FALSE(rep.ok(1e-3));
  }

  SUBCASE("association shape violations") {
    s.cfg.p_max_mw = 20.0;
    AssociationMatrix assoc;
    assoc.omega = MatI::Zero(1, 2);
    assoc.omega(0, 0) = 1;  // user 1 unassigned
    const auto rep =
        check_feasibility_oia(s.cfg, s.comp, s.phases, s.beams, split, assoc);
    CHECK_FALSE(rep.ok(1e-3));
  }

  SUBCASE("csv dump has one row per family") {
    s.cfg.p_max_mw = 20.0;
    const auto rep = check_feasibility_eia(s.cfg, s.comp, s.phases, s.beams, split);
    std::stringstream ss;
    dump_feasibility_csv(rep, ss);
    std::string line;
    int lines = 0;
    while (std::getline(ss, line)) ++lines;
    CHECK(lines == static_cast<int>(rep.rows.size()) + 1);  // header + rows
  }
}

TEST_CASE("extended phase vector stacks surfaces then the direct slot") {
  PhaseConfig ph;
  ph.f = {VecC::Constant(2, cxd(0.0, 1.0)), VecC::Constant(1, cxd(-1.0, 0.0))};
  const VecC ext = ph.extended();
  REQUIRE(ext.size() == 4);
  CHECK(ext(0) == cxd(0.0, 1.0));
  CHECK(ext(2) == cxd(-1.0, 0.0));
  CHECK(ext(3) == cxd(1.0, 0.0));
  const VecC one = ph.extended_one(1);
  REQUIRE(one.size() == 2);
  CHECK(one(0) == cxd(-1.0, 0.0));
  CHECK(one(1) == cxd(1.0, 0.0));
}
