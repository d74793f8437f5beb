// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <sstream>

#include "doctest.h"
#include "irsee/metrics.hpp"
#include "irsee/scenario.hpp"

using namespace irsee;

TEST_CASE("power unit conversions") {
  CHECK(dbm_to_mw(34.0) == doctest::Approx(2511.88643150958).epsilon(1e-12));
  CHECK(dbm_to_mw(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mw_to_dbm(1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(mw_to_dbm(dbm_to_mw(-94.0)) == doctest::Approx(-94.0).epsilon(1e-12));
}

TEST_CASE("path loss reference values") {
  CHECK(path_loss_db(PathKind::Direct, 200.0) ==
        doctest::Approx(117.04780084086812).epsilon(1e-12));
  CHECK(path_loss_db(PathKind::IrsHop, 100.0) ==
        doctest::Approx(79.6).epsilon(1e-12));
  CHECK(path_loss_db(PathKind::Direct, 1.0) == doctest::Approx(32.6));
  // distances below one meter clamp to the one-meter value
  CHECK(path_loss_db(PathKind::Direct, 0.25) == doctest::Approx(32.6));
  CHECK(path_loss_db(PathKind::IrsHop, 0.0) == doctest::Approx(35.6));
}

TEST_CASE("substreams are deterministic and decoupled") {
  auto g1 = substream(42, Stream::Fading);
  auto g2 = substream(42, Stream::Fading);
  CHECK(g1() == g2());
  auto g3 = substream(42, Stream::Placement);
  auto g4 = substream(43, Stream::Fading);
  auto g5 = substream(42, Stream::Fading, 7);
  // different stream, seed, or index should decouple (probabilistically
  // certain for a 64-bit generator)
  auto g6 = substream(42, Stream::Fading);
  const auto ref = g6();
  CHECK(g3() != ref);
  CHECK(g4() != ref);
  CHECK(g5() != ref);
}

TEST_CASE("node placement stays inside the configured discs") {
  SystemConfig cfg;
  cfg.users = 6;
  cfg.irs_count = 3;
  cfg.elements = 4;
  cfg.finalize();
  auto rng = substream(7, Stream::Placement);
  const Placement p = place_nodes(cfg, rng);
  CHECK(p.ap == Eigen::Vector2d(0.0, 0.0));
  REQUIRE(p.users.size() == 6);
  REQUIRE(p.irss.size() == 3);
  for (const auto& u : p.users)
    CHECK((u - cfg.geometry.user_center).norm() <= cfg.geometry.user_radius + 1e-12);
  for (const auto& s : p.irss)
    CHECK((s - cfg.geometry.irs_center).norm() <= cfg.geometry.irs_radius + 1e-12);
  auto rng2 = substream(7, Stream::Placement);
  const Placement q = place_nodes(cfg, rng2);
  CHECK(q.users[3] == p.users[3]);
  auto rng3 = substream(8, Stream::Placement);
  const Placement r = place_nodes(cfg, rng3);
  CHECK(r.users[0] != p.users[0]);
}

TEST_CASE("fading mean power follows the distance model") {
  SystemConfig cfg;
  cfg.antennas = 4;
  cfg.users = 1;
  cfg.irs_count = 1;
  cfg.elements = 8;
  cfg.finalize();
  auto prng = substream(3, Stream::Placement);
  const Placement p = place_nodes(cfg, prng);

  const double d_direct = (p.users[0] - p.ap).norm();
  const double want_direct = std::pow(10.0, -path_loss_db(PathKind::Direct, d_direct) / 10.0);
  const double d_hop = (p.irss[0] - p.ap).norm();
  const double want_hop = std::pow(10.0, -path_loss_db(PathKind::IrsHop, d_hop) / 10.0);

  double sum_direct = 0.0, sum_hop = 0.0;
  const int draws = 4000;
  auto frng = substream(3, Stream::Fading);
  for (int t = 0; t < draws; ++t) {
    const ChannelSet ch = sample_channels(cfg, p, frng);
    sum_direct += ch.direct[0].squaredNorm() / cfg.antennas;
    sum_hop += ch.ap_to_irs[0].squaredNorm() / (cfg.elements * cfg.antennas);
  }
  CHECK(sum_direct / draws == doctest::Approx(want_direct).epsilon(0.06));
  CHECK(sum_hop / draws == doctest::Approx(want_hop).epsilon(0.06));
}

TEST_CASE("composite stack matches the longhand cascaded channel") {
  SystemConfig cfg;
  cfg.antennas = 3;
  cfg.users = 2;
  cfg.irs_count = 2;
  cfg.elements = 4;
  cfg.finalize();
  auto prng = substream(11, Stream::Placement);
  const Placement p = place_nodes(cfg, prng);
  auto frng = substream(11, Stream::Fading);
  const ChannelSet ch = sample_channels(cfg, p, frng);
  const CompositeChannels comp = assemble_composites(cfg, ch);

  REQUIRE(comp.a.size() == 2);
  REQUIRE(comp.a[0].rows() == cfg.irs_count * cfg.elements + 1);
  REQUIRE(comp.a[0].cols() == cfg.antennas);

  // arbitrary unit-modulus reflection coefficients
  PhaseConfig ph;
  for (int n = 0; n < cfg.irs_count; ++n) {
    VecC f(cfg.elements);
    for (int l = 0; l < cfg.elements; ++l)
      f(l) = std::polar(1.0, 0.37 * (l + 1) + 1.1 * n);
    ph.f.push_back(f);
  }

  for (int k = 0; k < cfg.users; ++k) {
    // longhand: direct row plus per-surface cascade; pairing the stack with
    // the conjugated extended vector applies diag(conj(f_n)) to the hop
    Eigen::RowVectorXcd want = ch.direct[k].adjoint();
    for (int n = 0; n < cfg.irs_count; ++n)
      want += ch.irs_to_user[n][k].adjoint() * ph.f[n].conjugate().asDiagonal() *
              ch.ap_to_irs[n];
    const Eigen::RowVectorXcd got = ph.extended().adjoint() * comp.a[k];
    CHECK((got - want).norm() <= 1e-12 * (1.0 + want.norm()));
  }
}

TEST_CASE("per-surface slice agrees with the joint stack") {
  SystemConfig cfg;
  cfg.antennas = 2;
  cfg.users = 2;
  cfg.irs_count = 3;
  cfg.elements = 5;
  cfg.finalize();
  auto prng = substream(19, Stream::Placement);
  const Placement p = place_nodes(cfg, prng);
  auto frng = substream(19, Stream::Fading);
  const ChannelSet ch = sample_channels(cfg, p, frng);
  const CompositeChannels comp = assemble_composites(cfg, ch);

  for (int n = 0; n < cfg.irs_count; ++n) {
    const MatC e = pair_composite(comp, n, 1);
    REQUIRE(e.rows() == cfg.elements + 1);
    CHECK((e.topRows(cfg.elements) -
           comp.a[1].middleRows(n * cfg.elements, cfg.elements)).norm() == 0.0);
    CHECK((e.row(cfg.elements) - comp.a[1].row(comp.a[1].rows() - 1)).norm() == 0.0);
  }
}

TEST_CASE("channel csv round trip is lossless") {
  SystemConfig cfg;
  cfg.antennas = 2;
  cfg.users = 2;
  cfg.irs_count = 2;
  cfg.elements = 3;
  cfg.finalize();
  auto prng = substream(5, Stream::Placement);
  const Placement p = place_nodes(cfg, prng);
  auto frng = substream(5, Stream::Fading);
  const ChannelSet ch = sample_channels(cfg, p, frng);

  std::stringstream ss;
  dump_channels_csv(ch, ss);
  const ChannelSet back = load_channels_csv(ss);
  REQUIRE(back.direct.size() == ch.direct.size());
  for (size_t k = 0; k < ch.direct.size(); ++k)
    CHECK((back.direct[k] - ch.direct[k]).norm() == 0.0);
  for (size_t n = 0; n < ch.ap_to_irs.size(); ++n) {
    CHECK((back.ap_to_irs[n] - ch.ap_to_irs[n]).norm() == 0.0);
    for (size_t k = 0; k < ch.irs_to_user[n].size(); ++k)
      CHECK((back.irs_to_user[n][k] - ch.irs_to_user[n][k]).norm() == 0.0);
  }
}

TEST_CASE("configuration guardrails") {
  SystemConfig cfg;
  cfg.elements = 100;
  cfg.irs_count = 2;  // joint phase block would embed to 402 real dims
  CHECK_THROWS_AS(cfg.finalize(), std::invalid_argument);

  SystemConfig bad;
  bad.users = 0;
  CHECK_THROWS_AS(bad.finalize(), std::invalid_argument);

  SystemConfig defaults;
  defaults.finalize();
  REQUIRE(defaults.priority.size() == defaults.users);
  CHECK(defaults.priority(0) == 1.0);
  REQUIRE(defaults.min_rate.size() == defaults.users);
  CHECK(defaults.min_rate.maxCoeff() == 0.0);
}
