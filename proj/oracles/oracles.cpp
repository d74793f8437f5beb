// SPDX-License-Identifier: Apache-2.0
//
// Independent reference computations for the quantities the library
// derives: Monte-Carlo calibration of the fading model, longhand channel
// and rate evaluation, closed-form and grid-search optima for toy convex
// steps, a projected-gradient reference solver for the full beam-step
// program shape, and exhaustive enumeration for the assignment solver.
// Every reference is computed from raw instance data by a method that
// shares no code with the library path it checks.

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "irsee/bnb.hpp"
#include "irsee/cone.hpp"
#include "irsee/metrics.hpp"
#include "irsee/scenario.hpp"
#include "irsee/subproblems.hpp"
#include "irsee/surrogate.hpp"

namespace irsee::oracle {
namespace {

using cone::AffineExpr;
using cone::ConeProgram;
using cone::Constraint;

std::mt19937_64 suite_rng(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{seed, tag};
  return std::mt19937_64(seq);
}

cxd random_cn(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  return cxd(n(rng), n(rng));
}

VecC random_cn_vec(int n, std::mt19937_64& rng) {
  VecC v(n);
  for (int i = 0; i < n; ++i) v(i) = random_cn(rng);
  return v;
}

MatC random_cn_mat(int r, int c, std::mt19937_64& rng) {
  MatC m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = random_cn(rng);
  return m;
}

VecC random_unit_modulus(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * M_PI);
  VecC f(n);
  for (int i = 0; i < n; ++i) f(i) = std::polar(1.0, u(rng));
  return f;
}

void add_to(MatC& slot, const MatC& term) {
  if (slot.size() == 0)
    slot = term;
  else
    slot += term;
}

CheckRow make_row(std::string suite, std::string name, std::string detail,
                  int instances, double tol, double worst) {
  CheckRow row;
  row.suite = std::move(suite);
  row.name = std::move(name);
  row.detail = std::move(detail);
  row.instances = instances;
  row.tolerance = tol;
  row.worst = worst;
  row.pass = worst <= tol;
  return row;
}

// ------------------------------------------------------------- channels --

// Empirical mean link power over many fading draws versus the distance
// model, for each of the three link kinds. Geometry uses zero-radius discs
// so every node sits exactly at its disc center and distances are known.
void mc_link_power(std::uint64_t seed, std::vector<CheckRow>& rows) {
  SystemConfig cfg;
  cfg.antennas = 4;
  cfg.users = 2;
  cfg.irs_count = 1;
  cfg.elements = 8;
  cfg.geometry.ap = {0.0, 0.0};
  cfg.geometry.user_center = {150.0, 0.0};
  cfg.geometry.user_radius = 0.0;
  cfg.geometry.irs_center = {80.0, 0.0};
  cfg.geometry.irs_radius = 0.0;
  cfg.finalize();

  auto prng = suite_rng(seed, 11);
  const Placement placement = place_nodes(cfg, prng);

  const double want_direct = std::pow(10.0, -path_loss_db(PathKind::Direct, 150.0) / 10.0);
  const double want_ap_irs = std::pow(10.0, -path_loss_db(PathKind::IrsHop, 80.0) / 10.0);
  const double want_irs_user = std::pow(10.0, -path_loss_db(PathKind::IrsHop, 70.0) / 10.0);

  double sum_direct = 0.0, sum_ap_irs = 0.0, sum_irs_user = 0.0;
  long n_direct = 0, n_ap_irs = 0, n_irs_user = 0;
  const int calls = 12500;
  auto frng = suite_rng(seed, 12);
  for (int c = 0; c < calls; ++c) {
    const ChannelSet ch = sample_channels(cfg, placement, frng);
    for (const VecC& g : ch.direct) {
      sum_direct += g.squaredNorm();
      n_direct += g.size();
    }
    for (const MatC& g : ch.ap_to_irs) {
      sum_ap_irs += g.squaredNorm();
      n_ap_irs += g.size();
    }
    for (const auto& per_user : ch.irs_to_user)
      for (const VecC& g : per_user) {
        sum_irs_user += g.squaredNorm();
        n_irs_user += g.size();
      }
  }
  const double dev_direct = std::abs(sum_direct / n_direct / want_direct - 1.0);
  const double dev_ap_irs = std::abs(sum_ap_irs / n_ap_irs / want_ap_irs - 1.0);
  const double dev_irs_user = std::abs(sum_irs_user / n_irs_user / want_irs_user - 1.0);

  rows.push_back(make_row("channel", "mc_power_direct",
                          "Monte-Carlo mean |g|^2 vs distance model at 150 m; relative error",
                          static_cast<int>(n_direct), 0.02, dev_direct));
  rows.push_back(make_row("channel", "mc_power_ap_to_surface",
                          "Monte-Carlo mean |g|^2 vs distance model at 80 m; relative error",
                          static_cast<int>(n_ap_irs), 0.02, dev_ap_irs));
  rows.push_back(make_row("channel", "mc_power_surface_to_user",
                          "Monte-Carlo mean |g|^2 vs distance model at 70 m; relative error",
                          static_cast<int>(n_irs_user), 0.02, dev_irs_user));
}

// Stacked composite channel versus a longhand per-element sum, for the
// all-surface stack and for the single-surface pair slice.
void composite_longhand(std::uint64_t seed, std::vector<CheckRow>& rows) {
  auto rng = suite_rng(seed, 21);
  std::uniform_int_distribution<int> dk(1, 3), dn(1, 3), dl(1, 4), dm(1, 3);
  double worst = 0.0;
  const int instances = 20;
  for (int it = 0; it < instances; ++it) {
    SystemConfig cfg;
    cfg.users = dk(rng);
    cfg.irs_count = dn(rng);
    cfg.elements = dl(rng);
    cfg.antennas = dm(rng);
    cfg.finalize();

    ChannelSet ch;
    ch.direct.resize(cfg.users);
    ch.ap_to_irs.resize(cfg.irs_count);
    ch.irs_to_user.resize(cfg.irs_count);
    for (int k = 0; k < cfg.users; ++k) ch.direct[k] = random_cn_vec(cfg.antennas, rng);
    for (int n = 0; n < cfg.irs_count; ++n) {
      ch.ap_to_irs[n] = random_cn_mat(cfg.elements, cfg.antennas, rng);
      ch.irs_to_user[n].resize(cfg.users);
      for (int k = 0; k < cfg.users; ++k)
        ch.irs_to_user[n][k] = random_cn_vec(cfg.elements, rng);
    }
    const CompositeChannels comp = assemble_composites(cfg, ch);

    PhaseConfig phases;
    for (int n = 0; n < cfg.irs_count; ++n)
      phases.f.push_back(random_unit_modulus(cfg.elements, rng));

    for (int k = 0; k < cfg.users; ++k) {
      const Eigen::RowVectorXcd eff = phases.extended().adjoint() * comp.a[k];
      for (int m = 0; m < cfg.antennas; ++m) {
        cxd longhand = std::conj(ch.direct[k](m));
        for (int n = 0; n < cfg.irs_count; ++n)
          for (int l = 0; l < cfg.elements; ++l)
            longhand += std::conj(phases.f[n](l)) * std::conj(ch.irs_to_user[n][k](l)) *
                        ch.ap_to_irs[n](l, m);
        const double scale = std::max(1e-300, eff.cwiseAbs().maxCoeff());
        worst = std::max(worst, std::abs(eff(m) - longhand) / scale);
      }
      for (int n = 0; n < cfg.irs_count; ++n) {
        const Eigen::RowVectorXcd effp =
            phases.extended_one(n).adjoint() * pair_composite(comp, n, k);
        for (int m = 0; m < cfg.antennas; ++m) {
          cxd longhand = std::conj(ch.direct[k](m));
          for (int l = 0; l < cfg.elements; ++l)
            longhand += std::conj(phases.f[n](l)) * std::conj(ch.irs_to_user[n][k](l)) *
                        ch.ap_to_irs[n](l, m);
          const double scale = std::max(1e-300, effp.cwiseAbs().maxCoeff());
          worst = std::max(worst, std::abs(effp(m) - longhand) / scale);
        }
      }
    }
  }
  rows.push_back(make_row("channel", "composite_longhand",
                          "stacked channel vs per-element double sum; relative error",
                          instances, 1e-12, worst));
}

// Rate formulas versus scalar recomputation from the effective channels.
void rates_longhand(std::uint64_t seed, std::vector<CheckRow>& rows) {
  auto rng = suite_rng(seed, 31);
  std::uniform_int_distribution<int> dk(1, 3), dn(1, 2), dl(1, 3), dm(1, 3);
  std::uniform_real_distribution<double> upw(0.1, 2.0);
  double worst = 0.0;
  const int instances = 20;
  for (int it = 0; it < instances; ++it) {
    SystemConfig cfg;
    cfg.users = dk(rng);
    cfg.irs_count = dn(rng);
    cfg.elements = dl(rng);
    cfg.antennas = dm(rng);
    cfg.noise_mw = upw(rng);
    cfg.finalize();

    ChannelSet ch;
    ch.direct.resize(cfg.users);
    ch.ap_to_irs.resize(cfg.irs_count);
    ch.irs_to_user.resize(cfg.irs_count);
    for (int k = 0; k < cfg.users; ++k) ch.direct[k] = random_cn_vec(cfg.antennas, rng);
    for (int n = 0; n < cfg.irs_count; ++n) {
      ch.ap_to_irs[n] = random_cn_mat(cfg.elements, cfg.antennas, rng);
      ch.irs_to_user[n].resize(cfg.users);
      for (int k = 0; k < cfg.users; ++k)
        ch.irs_to_user[n][k] = random_cn_vec(cfg.elements, rng);
    }
    const CompositeChannels comp = assemble_composites(cfg, ch);

    PhaseConfig phases;
    for (int n = 0; n < cfg.irs_count; ++n)
      phases.f.push_back(random_unit_modulus(cfg.elements, rng));
    BeamformingSet beams;
    beams.common = upw(rng) * random_cn_vec(cfg.antennas, rng);
    for (int k = 0; k < cfg.users; ++k)
      beams.user.push_back(upw(rng) * random_cn_vec(cfg.antennas, rng));

    const RatesEia re = rates_eia(comp, phases, beams, cfg.noise_mw);
    for (int k = 0; k < cfg.users; ++k) {
      const Eigen::RowVectorXcd eff = phases.extended().adjoint() * comp.a[k];
      const double pc = std::norm((eff * beams.common)(0));
      double pk = 0.0, interf = 0.0;
      for (int j = 0; j < cfg.users; ++j) {
        const double pj = std::norm((eff * beams.user[j])(0));
        if (j == k)
          pk = pj;
        else
          interf += pj;
      }
      const double want_common = std::log2(1.0 + pc / (cfg.noise_mw + pk + interf));
      const double want_priv = std::log2(1.0 + pk / (cfg.noise_mw + interf));
      worst = std::max(worst,
                       std::abs(re.common(k) - want_common) / (1.0 + std::abs(want_common)));
      worst =
          std::max(worst, std::abs(re.priv(k) - want_priv) / (1.0 + std::abs(want_priv)));
    }

    const RatesOia ro = rates_oia(comp, phases, beams, cfg.noise_mw);
    for (int n = 0; n < cfg.irs_count; ++n)
      for (int k = 0; k < cfg.users; ++k) {
        const Eigen::RowVectorXcd eff =
            phases.extended_one(n).adjoint() * pair_composite(comp, n, k);
        const double pc = std::norm((eff * beams.common)(0));
        double pk = 0.0, interf = 0.0;
        for (int j = 0; j < cfg.users; ++j) {
          const double pj = std::norm((eff * beams.user[j])(0));
          if (j == k)
            pk = pj;
          else
            interf += pj;
        }
        const double want_common = std::log2(1.0 + pc / (cfg.noise_mw + pk + interf));
        const double want_priv = std::log2(1.0 + pk / (cfg.noise_mw + interf));
        worst = std::max(
            worst, std::abs(ro.common(n, k) - want_common) / (1.0 + std::abs(want_common)));
        worst = std::max(
            worst, std::abs(ro.priv(n, k) - want_priv) / (1.0 + std::abs(want_priv)));
      }
  }
  rows.push_back(make_row("channel", "rates_longhand",
                          "rate formulas vs scalar recomputation; relative error",
                          instances, 1e-12, worst));
}

// --------------------------------------------------------------- solver --

struct KktTally {
  double worst_primal = 0.0;
  double worst_gap = 0.0;
  int solves = 0;

  void absorb(const cone::ConeSolution& sol) {
    ++solves;
    worst_primal = std::max(worst_primal, sol.primal_residual);
    worst_gap = std::max(worst_gap, std::abs(sol.dual_bound - sol.objective) /
                                        (1.0 + std::abs(sol.objective)));
  }
};

// Single PSD block, log utility, linear price, unit trace cap. The optimum
// concentrates on the top eigenvector of the gain matrix, reducing the
// problem to one scalar power with a closed-form stationary point.
void eigen_characterization(std::uint64_t seed, KktTally& kkt,
                            std::vector<CheckRow>& rows) {
  auto rng = suite_rng(seed, 41);
  std::uniform_real_distribution<double> uw(0.5, 2.0), ueta(0.02, 2.0);
  std::uniform_int_distribution<int> ud(2, 3);
  double worst = 0.0;
  const int instances = 50;
  for (int it = 0; it < instances; ++it) {
    const int d = ud(rng);
    MatC b = random_cn_mat(d, d, rng);
    MatC g = b * b.adjoint();
    std::uniform_real_distribution<double> utr(1.0, 10.0);
    g *= utr(rng) / g.trace().real();
    const double weight = uw(rng);
    const double eta = ueta(rng);

    ConeProgram p;
    p.add_block("w", d);
    p.objective.affine = p.zero_affine();
    p.objective.affine.coeff[0] = -eta * MatC::Identity(d, d);
    AffineExpr arg = p.zero_affine();
    arg.offset = 1.0;
    arg.coeff[0] = g;
    p.objective.logs.push_back({weight / kLn2, arg});
    Constraint cap;
    cap.label = "trace_cap";
    cap.expr.affine = p.zero_affine();
    cap.expr.affine.offset = 1.0;
    cap.expr.affine.coeff[0] = -MatC::Identity(d, d);
    p.constraints.push_back(std::move(cap));

    const cone::ConeSolution sol = cone::solve(p);
    if (sol.status != cone::SolveStatus::Optimal) {
      worst = std::max(worst, 1.0);
      continue;
    }
    kkt.absorb(sol);

    Eigen::SelfAdjointEigenSolver<MatC> es(g);
    const double lam = es.eigenvalues().maxCoeff();
    const double p_star =
        std::clamp(weight / (eta * kLn2) - 1.0 / lam, 0.0, 1.0);
    const double want = weight * std::log2(1.0 + lam * p_star) - eta * p_star;
    worst = std::max(worst, std::abs(sol.objective - want) / (1.0 + std::abs(want)));
  }
  rows.push_back(make_row("solver", "single_beam_closed_form",
                          "log-utility power program vs top-eigenvector closed form; "
                          "relative objective error",
                          instances, 1e-5, worst));
}

// Scalar-channel beam + share step versus a 200x200 power grid evaluated
// on the true (non-surrogate) objective.
void beam_share_grid(std::uint64_t seed, std::vector<CheckRow>& rows) {
  auto rng = suite_rng(seed, 51);
  std::uniform_real_distribution<double> ug(2.0, 40.0), uw(0.5, 2.0),
      urho(2.0, 200.0), ustatic(0.0, 5.0);
  double worst = 0.0;
  const int instances = 10;
  for (int it = 0; it < instances; ++it) {
    const double gamma = ug(rng);
    const double weight = uw(rng);
    BeamStepData d;
    d.gram = {MatC::Constant(1, 1, gamma)};
    d.priority = VecD::Constant(1, weight);
    d.min_rate = VecD::Zero(1);
    d.rho_over_b = urho(rng);
    d.p_max_mw = 10.0;
    d.static_power_mw = ustatic(rng);
    const double pw = d.rho_over_b / 1000.0;

    BeamformingSet init;
    init.common = VecC::Constant(1, std::sqrt(d.p_max_mw / 4.0));
    init.user = {VecC::Constant(1, std::sqrt(d.p_max_mw / 4.0))};
    CommonRateSplit split0;
    split0.c = VecD::Zero(1);
    auto srng = suite_rng(seed, 52 + it);
    const BeamStepResult res = solve_beam_split_step(d, init, split0, srng);
    if (res.status != cone::SolveStatus::Optimal) {
      worst = std::max(worst, 1.0);
      continue;
    }
    const double q0 = res.beams.common.squaredNorm() / d.p_max_mw;
    const double q1 = res.beams.user[0].squaredNorm() / d.p_max_mw;
    const double budget = std::log2(1.0 + gamma * q0 / (1.0 + gamma * q1));
    const double got = weight * (std::min(res.split.c(0), budget) + std::log2(1.0 + gamma * q1)) -
                       pw * (d.p_max_mw * (q0 + q1) + d.static_power_mw);

    double best = -1e300;
    const int steps = 200;
    for (int i = 0; i < steps; ++i)
      for (int j = 0; j < steps; ++j) {
        const double a = static_cast<double>(i) / (steps - 1);
        const double b = static_cast<double>(j) / (steps - 1);
        if (a + b > 1.0) continue;
        const double c = std::log2(1.0 + gamma * a / (1.0 + gamma * b));
        const double val = weight * (c + std::log2(1.0 + gamma * b)) -
                           pw * (d.p_max_mw * (a + b) + d.static_power_mw);
        best = std::max(best, val);
      }
    worst = std::max(worst, std::abs(got - best));
  }
  rows.push_back(make_row("solver", "beam_share_grid",
                          "scalar beam+share step vs 200x200 power grid; "
                          "absolute objective error",
                          instances, 1e-3, worst));
}

// Two-element reflection step for a single user versus a full 360x360
// phase grid on the true objective.
void phase_pair_grid(std::uint64_t seed, std::vector<CheckRow>& rows) {
  auto rng = suite_rng(seed, 61);
  std::uniform_real_distribution<double> umag(0.3, 1.5), uw(0.5, 2.0);
  double worst = 0.0;
  const int instances = 5;
  for (int it = 0; it < instances; ++it) {
    PhaseBlockData blk;
    blk.a = {{umag(rng) * random_cn_vec(2, rng), umag(rng) * random_cn_vec(2, rng)}};
    blk.alpha = {{umag(rng) * random_cn(rng), umag(rng) * random_cn(rng)}};
    blk.priority = VecD::Constant(1, uw(rng));
    blk.private_floor = VecD::Constant(1, 0.1);
    blk.common_floor = 0.0;
    blk.user_ids = {0};

    PhaseStepData d;
    d.blocks = {blk};
    auto srng = suite_rng(seed, 62 + it);
    std::vector<VecC> init = {random_unit_modulus(2, rng)};
    const PhaseStepResult res = solve_phase_step(d, init, srng);
    if (res.status != cone::SolveStatus::Optimal) {
      worst = std::max(worst, 1.0);
      continue;
    }

    auto true_obj = [&](const VecC& f) {
      cxd amp = blk.alpha[0][1];
      for (int l = 0; l < 2; ++l) amp += std::conj(f(l)) * blk.a[0][1](l);
      const double p_me = std::norm(amp);
      if (p_me < blk.private_floor(0)) return -1e300;
      return blk.priority(0) * std::log2(1.0 + p_me);
    };

    const double got = true_obj(res.f[0]);
    double best = -1e300;
    const int steps = 360;
    VecC f(2);
    for (int i = 0; i < steps; ++i) {
      f(0) = std::polar(1.0, 2.0 * M_PI * i / steps);
      for (int j = 0; j < steps; ++j) {
        f(1) = std::polar(1.0, 2.0 * M_PI * j / steps);
        best = std::max(best, true_obj(f));
      }
    }
    worst = std::max(worst, std::abs(got - best));
  }
  rows.push_back(make_row("solver", "phase_pair_grid",
                          "two-element reflection step vs 360x360 phase grid; "
                          "absolute objective error",
                          instances, 1e-3, worst));
}

// Full two-user beam-step program shape: one tangent-expanded convex step
// with PSD beam blocks and scalar shares, solved by the interior-point
// path and independently by projected-gradient ascent with a quadratic
// penalty ramp on the coupling constraints. Shares are re-fit exactly at
// the end so the reference value is evaluated at a feasible point.
struct PgInstance {
  int users = 2;
  int antennas = 2;
  std::vector<MatC> gram;  // per user
  VecD priority;
  VecD min_rate;
  double kappa = 0.0;      // objective weight on total normalized trace
  double constant = 0.0;   // objective constant (static power term)
  std::vector<LogSurrogate> at_others, at_all;
};

struct PgPoint {
  std::vector<MatC> w;  // users + 1 blocks
  VecD c;
};

double pg_rx(const PgInstance& ins, const PgPoint& x, int k, int i) {
  return std::max((ins.gram[k].cwiseProduct(x.w[i].transpose())).sum().real(), 0.0);
}

struct PgEval {
  double objective = 0.0;
  double penalized = 0.0;
  VecD cd;  // common-decode margins
  VecD rf;  // rate-floor margins
};

PgEval pg_eval(const PgInstance& ins, const PgPoint& x, double mu) {
  PgEval e;
  const int ku = ins.users;
  e.cd = VecD::Zero(ku);
  e.rf = VecD::Zero(ku);
  double total_tr = 0.0;
  for (const MatC& w : x.w) total_tr += w.trace().real();
  e.objective = ins.constant - ins.kappa * total_tr;
  for (int k = 0; k < ku; ++k) {
    double allp = 1.0, oth = 1.0, tot = 1.0;
    for (int i = 0; i <= ku; ++i) {
      const double t = pg_rx(ins, x, k, i);
      tot += t;
      if (i >= 1) {
        allp += t;
        if (i != k + 1) oth += t;
      }
    }
    const LogSurrogate& so = ins.at_others[k];
    const LogSurrogate& sa = ins.at_all[k];
    e.objective += ins.priority(k) *
                   (x.c(k) + std::log2(allp) + so.slope() * oth + so.offset());
    e.cd(k) = std::log2(tot) + sa.slope() * allp + sa.offset() - x.c.sum();
    e.rf(k) = x.c(k) + std::log2(allp) + so.slope() * oth + so.offset() -
              ins.min_rate(k);
  }
  e.penalized = e.objective;
  for (int k = 0; k < ku; ++k) {
    const double v1 = std::max(0.0, -e.cd(k));
    const double v2 = std::max(0.0, -e.rf(k));
    e.penalized -= mu * (v1 * v1 + v2 * v2);
  }
  return e;
}

PgPoint pg_grad(const PgInstance& ins, const PgPoint& x, double mu) {
  const int ku = ins.users;
  const int m = ins.antennas;
  PgPoint g;
  g.w.assign(ku + 1, MatC::Zero(m, m));
  g.c = VecD::Zero(ku);

  const PgEval e = pg_eval(ins, x, mu);
  for (int i = 0; i <= ku; ++i) g.w[i] -= ins.kappa * MatC::Identity(m, m);
  for (int k = 0; k < ku; ++k) {
    double allp = 1.0, tot = 1.0;
    for (int i = 0; i <= ku; ++i) {
      const double t = pg_rx(ins, x, k, i);
      tot += t;
      if (i >= 1) allp += t;
    }
    const LogSurrogate& so = ins.at_others[k];
    const LogSurrogate& sa = ins.at_all[k];
    const double w_cd = 2.0 * mu * std::max(0.0, -e.cd(k));
    const double w_rf = 2.0 * mu * std::max(0.0, -e.rf(k));
    const double coef_allp =
        (ins.priority(k) + w_rf) / (allp * kLn2) + w_cd * sa.slope();
    const double coef_oth = (ins.priority(k) + w_rf) * so.slope();
    const double coef_tot = w_cd / (tot * kLn2);
    for (int i = 0; i <= ku; ++i) {
      double c = coef_tot;
      if (i >= 1) {
        c += coef_allp;
        if (i != k + 1) c += coef_oth;
      }
      g.w[i] += c * ins.gram[k];
    }
    g.c(k) += ins.priority(k) + w_rf;
    for (int j = 0; j < ku; ++j) g.c(j) -= w_cd;
  }
  return g;
}

// Exact Euclidean projection onto {every block PSD, total trace <= 1,
// shares >= 0}: joint eigenvalue clamping plus a shared water level.
void pg_project(PgPoint& x) {
  std::vector<Eigen::SelfAdjointEigenSolver<MatC>> es;
  std::vector<double> lam;
  for (MatC& w : x.w) {
    w = 0.5 * (w + w.adjoint()).eval();
    es.emplace_back(w);
    for (int i = 0; i < w.rows(); ++i)
      lam.push_back(std::max(0.0, es.back().eigenvalues()(i)));
  }
  double sum = 0.0;
  for (double v : lam) sum += v;
  if (sum > 1.0) {
    std::vector<double> sorted = lam;
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cum = 0.0, tau = 0.0;
    for (size_t i = 0; i < sorted.size(); ++i) {
      cum += sorted[i];
      const double t = (cum - 1.0) / static_cast<double>(i + 1);
      if (i + 1 == sorted.size() || sorted[i + 1] <= t) {
        tau = t;
        break;
      }
    }
    for (double& v : lam) v = std::max(0.0, v - tau);
  }
  size_t at = 0;
  for (size_t b = 0; b < x.w.size(); ++b) {
    const int m = static_cast<int>(x.w[b].rows());
    VecD d(m);
    for (int i = 0; i < m; ++i) d(i) = lam[at++];
    x.w[b] = es[b].eigenvectors() * d.asDiagonal() * es[b].eigenvectors().adjoint();
  }
  x.c = x.c.cwiseMax(0.0);
}

PgPoint pg_axpy(const PgPoint& x, double alpha, const PgPoint& g) {
  PgPoint y = x;
  for (size_t i = 0; i < y.w.size(); ++i) y.w[i] += alpha * g.w[i];
  y.c += alpha * g.c;
  return y;
}

// Maximize the penalized objective by monotone projected-gradient ascent
// with an adaptive step, ramping the penalty weight, then re-fit the
// shares exactly. Returns the feasible objective value.
double pg_solve(const PgInstance& ins) {
  const int m = ins.antennas;
  PgPoint x;
  x.w.assign(ins.users + 1,
             MatC::Identity(m, m) * (0.9 / ((ins.users + 1) * m)));
  x.c = VecD::Zero(ins.users);

  for (double mu : {1e2, 1e3, 1e4, 1e5, 1e6}) {
    double alpha = 1.0 / (1.0 + mu);
    double best = pg_eval(ins, x, mu).penalized;
    double recent = best;
    for (int iter = 0; iter < 20000; ++iter) {
      const PgPoint g = pg_grad(ins, x, mu);
      bool moved = false;
      for (int bt = 0; bt < 60; ++bt) {
        PgPoint y = pg_axpy(x, alpha, g);
        pg_project(y);
        const double fy = pg_eval(ins, y, mu).penalized;
        if (fy > best) {
          x = std::move(y);
          best = fy;
          alpha *= 1.25;
          moved = true;
          break;
        }
        alpha *= 0.4;
        if (alpha < 1e-18) break;
      }
      if (!moved) break;
      if (iter % 500 == 499) {
        if (best - recent <= 1e-13 * (1.0 + std::abs(best))) break;
        recent = best;
      }
    }
  }

  // exact share re-fit at the final beams
  double budget = 1e300;
  VecD floors(ins.users), priv(ins.users);
  for (int k = 0; k < ins.users; ++k) {
    double allp = 1.0, oth = 1.0, tot = 1.0;
    for (int i = 0; i <= ins.users; ++i) {
      const double t = pg_rx(ins, x, k, i);
      tot += t;
      if (i >= 1) {
        allp += t;
        if (i != k + 1) oth += t;
      }
    }
    budget = std::min(budget, std::log2(tot) + ins.at_all[k].slope() * allp +
                                  ins.at_all[k].offset());
    priv(k) = std::log2(allp) + ins.at_others[k].slope() * oth +
              ins.at_others[k].offset();
    floors(k) = std::max(0.0, ins.min_rate(k) - priv(k));
  }
  const auto split = optimal_split(ins.priority, floors, std::max(budget, 0.0));
  if (!split) return -1e300;
  x.c = split->c;
  return pg_eval(ins, x, 0.0).objective;
}

ConeProgram pg_to_program(const PgInstance& ins) {
  const int ku = ins.users;
  const int m = ins.antennas;
  ConeProgram p;
  for (int i = 0; i <= ku; ++i) p.add_block("w" + std::to_string(i), m);
  for (int k = 0; k < ku; ++k) p.add_block("c" + std::to_string(k), 1);

  p.objective.affine = p.zero_affine();
  p.objective.affine.offset = ins.constant;
  for (int i = 0; i <= ku; ++i)
    p.objective.affine.coeff[i] = -ins.kappa * MatC::Identity(m, m);
  for (int k = 0; k < ku; ++k) {
    const double v = ins.priority(k);
    add_to(p.objective.affine.coeff[ku + 1 + k], MatC::Constant(1, 1, v));
    p.objective.affine.offset +=
        v * (ins.at_others[k].offset() + ins.at_others[k].slope());
    for (int i = 1; i <= ku; ++i)
      if (i != k + 1)
        add_to(p.objective.affine.coeff[i],
               v * ins.at_others[k].slope() * ins.gram[k]);
    AffineExpr arg = p.zero_affine();
    arg.offset = 1.0;
    for (int i = 1; i <= ku; ++i) add_to(arg.coeff[i], ins.gram[k]);
    p.objective.logs.push_back({v / kLn2, arg});
  }

  Constraint pw;
  pw.label = "power_budget";
  pw.expr.affine = p.zero_affine();
  pw.expr.affine.offset = 1.0;
  for (int i = 0; i <= ku; ++i)
    pw.expr.affine.coeff[i] = -MatC::Identity(m, m);
  p.constraints.push_back(std::move(pw));

  for (int k = 0; k < ku; ++k) {
    Constraint dec;
    dec.label = "common_decode_" + std::to_string(k);
    dec.expr.affine = p.zero_affine();
    dec.expr.affine.offset =
        ins.at_all[k].offset() + ins.at_all[k].slope();
    for (int j = 0; j < ku; ++j)
      add_to(dec.expr.affine.coeff[ku + 1 + j], MatC::Constant(1, 1, -1.0));
    for (int i = 1; i <= ku; ++i)
      add_to(dec.expr.affine.coeff[i], ins.at_all[k].slope() * ins.gram[k]);
    AffineExpr arg = p.zero_affine();
    arg.offset = 1.0;
    for (int i = 0; i <= ku; ++i) add_to(arg.coeff[i], ins.gram[k]);
    dec.expr.logs.push_back({1.0 / kLn2, arg});
    p.constraints.push_back(std::move(dec));

    Constraint fl;
    fl.label = "rate_floor_" + std::to_string(k);
    fl.expr.affine = p.zero_affine();
    fl.expr.affine.offset = ins.at_others[k].offset() +
                            ins.at_others[k].slope() - ins.min_rate(k);
    add_to(fl.expr.affine.coeff[ku + 1 + k], MatC::Constant(1, 1, 1.0));
    for (int i = 1; i <= ku; ++i)
      if (i != k + 1)
        add_to(fl.expr.affine.coeff[i],
               ins.at_others[k].slope() * ins.gram[k]);
    AffineExpr arg2 = p.zero_affine();
    arg2.offset = 1.0;
    for (int i = 1; i <= ku; ++i) add_to(arg2.coeff[i], ins.gram[k]);
    fl.expr.logs.push_back({1.0 / kLn2, arg2});
    p.constraints.push_back(std::move(fl));
  }
  return p;
}

void projected_gradient_full(std::uint64_t seed, KktTally& kkt,
                             std::vector<CheckRow>& rows) {
  auto rng = suite_rng(seed, 71);
  std::uniform_real_distribution<double> utr(1.0, 20.0), uw(0.5, 2.0),
      ukap(0.05, 1.0), ucst(0.0, 1.0), ur(0.0, 0.2);
  double worst = 0.0;
  const int instances = 50;
  for (int it = 0; it < instances; ++it) {
    PgInstance ins;
    ins.priority = VecD(2);
    ins.min_rate = VecD::Zero(2);
    for (int k = 0; k < 2; ++k) {
      const VecC v = random_cn_vec(2, rng);
      MatC g = v * v.adjoint();
      g *= utr(rng) / g.trace().real();
      ins.gram.push_back(g);
      ins.priority(k) = uw(rng);
    }
    ins.kappa = ukap(rng);
    ins.constant = -ucst(rng);
    if (it % 5 == 0)
      for (int k = 0; k < 2; ++k) ins.min_rate(k) = ur(rng);

    // tangent expansion at the uniform starting point, which keeps that
    // point feasible for both solution methods
    PgPoint x0;
    x0.w.assign(3, MatC::Identity(2, 2) * (0.9 / 6.0));
    x0.c = VecD::Zero(2);
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      double allp = 1.0, oth = 1.0;
      for (int i = 1; i <= 2; ++i) {
        const double t = pg_rx(ins, x0, k, i);
        allp += t;
        if (i != k + 1) oth += t;
      }
      ins.at_others.push_back(make_surrogate(oth));
      ins.at_all.push_back(make_surrogate(allp));
      const double priv0 = std::log2(allp) - std::log2(oth);
      if (ins.min_rate(k) > priv0) ok = false;  // keep the start feasible
    }
    if (!ok) ins.min_rate.setZero();

    const ConeProgram p = pg_to_program(ins);
    cone::SolverOptions opt;
    opt.max_newton = 3000;  // some random tangent expansions center slowly
    const cone::ConeSolution sol = cone::solve(p, opt);
    if (sol.status != cone::SolveStatus::Optimal) {
      if (std::getenv("IRSEE_TRACE"))
        std::fprintf(stderr, "[pg-oracle] it=%d status=%d family=%s\n", it,
                     static_cast<int>(sol.status), sol.infeasible_family.c_str());
      worst = std::max(worst, 1.0);
      continue;
    }
    kkt.absorb(sol);
    const double ref = pg_solve(ins);
    const double dev =
        std::abs(sol.objective - ref) / (1.0 + std::abs(sol.objective));
    if (std::getenv("IRSEE_TRACE"))
      std::fprintf(stderr, "[pg-oracle] it=%d cone=%.10f pg=%.10f dev=%.3e\n", it,
                   sol.objective, ref, dev);
    worst = std::max(worst, dev);
  }
  rows.push_back(make_row("solver", "projected_gradient_full",
                          "two-user beam-step program vs projected-gradient ascent "
                          "with penalty ramp and exact share re-fit; relative error",
                          instances, 1e-5, worst));
}

// ----------------------------------------------------------- assignment --

double enum_objective(const MatD& gain, double penalty, const std::vector<int>& pick) {
  const int n = static_cast<int>(gain.rows());
  std::vector<int> load(n, 0);
  double obj = 0.0;
  for (size_t k = 0; k < pick.size(); ++k) {
    obj += gain(pick[k], static_cast<int>(k));
    ++load[pick[k]];
  }
  for (int s = 0; s < n; ++s)
    if (load[s] > 0) obj -= penalty;
  return obj;
}

// Best assignment by brute force over all surface choices per user.
// Returns -inf when no capacity-feasible assignment exists.
double enum_best(const MatD& gain, double penalty, int capacity, int* active_out = nullptr) {
  const int n = static_cast<int>(gain.rows());
  const int k = static_cast<int>(gain.cols());
  std::vector<int> pick(k, 0);
  double best = -1e300;
  int best_active = 0;
  while (true) {
    std::vector<int> load(n, 0);
    bool ok = true;
    for (int u = 0; u < k; ++u)
      if (++load[pick[u]] > capacity) ok = false;
    if (ok) {
      const double obj = enum_objective(gain, penalty, pick);
      if (obj > best) {
        best = obj;
        best_active = 0;
        for (int s = 0; s < n; ++s)
          if (load[s] > 0) ++best_active;
      }
    }
    int at = 0;
    while (at < k && ++pick[at] == n) pick[at++] = 0;
    if (at == k) break;
  }
  if (active_out) *active_out = best_active;
  return best;
}

void enumeration_match(std::uint64_t seed, std::vector<CheckRow>& rows) {
  auto rng = suite_rng(seed, 81);
  std::uniform_real_distribution<double> ug(0.0, 5.0), up(0.0, 3.0);
  double worst = 0.0;
  int instances = 0;
  for (int n = 1; n <= 3; ++n)
    for (int k = 1; k <= 3; ++k)
      for (int cap = 1; cap <= 3; ++cap) {
        if (k > n * cap) continue;
        for (int rep = 0; rep < 20; ++rep) {
          AssociationProblem problem;
          problem.gain = MatD::NullaryExpr(n, k, [&]() { return ug(rng); });
          problem.penalty = up(rng);
          problem.capacity = cap;
          const BnbResult res = solve_association(problem);
          const double want = enum_best(problem.gain, problem.penalty, cap);
          ++instances;
          if (!res.feasible) {
            worst = std::max(worst, want > -1e299 ? 1.0 : 0.0);
            continue;
          }
          worst = std::max(worst,
                           std::abs(res.objective - want) / (1.0 + std::abs(want)));
        }
      }
  rows.push_back(make_row("assignment", "enumeration_match",
                          "branch-and-bound vs brute-force enumeration over all "
                          "small shapes; relative objective error",
                          instances, 1e-6, worst));
}

void zero_penalty_argmax(std::uint64_t seed, std::vector<CheckRow>& rows) {
  auto rng = suite_rng(seed, 91);
  std::uniform_real_distribution<double> ug(0.0, 5.0);
  double worst = 0.0;
  const int instances = 20;
  for (int it = 0; it < instances; ++it) {
    const int n = 3, k = 3;
    AssociationProblem problem;
    problem.gain = MatD::NullaryExpr(n, k, [&]() { return ug(rng); });
    problem.penalty = 0.0;
    problem.capacity = k;  // ample, so every user takes its best surface
    const BnbResult res = solve_association(problem);
    double want = 0.0;
    for (int u = 0; u < k; ++u) want += problem.gain.col(u).maxCoeff();
    if (!res.feasible) {
      worst = std::max(worst, 1.0);
      continue;
    }
    worst = std::max(worst, std::abs(res.objective - want) / (1.0 + std::abs(want)));
  }
  rows.push_back(make_row("assignment", "zero_penalty_argmax",
                          "no activity cost: optimum is the per-user argmax; "
                          "relative objective error",
                          instances, 1e-6, worst));
}

void huge_penalty_concentration(std::uint64_t seed, std::vector<CheckRow>& rows) {
  auto rng = suite_rng(seed, 101);
  std::uniform_real_distribution<double> ug(0.0, 5.0);
  double worst = 0.0;
  const int instances = 20;
  for (int it = 0; it < instances; ++it) {
    const int n = 3, k = 4, cap = 2;
    AssociationProblem problem;
    problem.gain = MatD::NullaryExpr(n, k, [&]() { return ug(rng); });
    problem.penalty = 1000.0;
    problem.capacity = cap;
    const BnbResult res = solve_association(problem);
    int want_active = 0;
    const double want = enum_best(problem.gain, problem.penalty, cap, &want_active);
    if (!res.feasible) {
      worst = std::max(worst, 1.0);
      continue;
    }
    AssociationMatrix assoc;
    assoc.omega = res.omega;
    const int active = static_cast<int>(assoc.active_surfaces().size());
    if (active != (k + cap - 1) / cap) worst = std::max(worst, 1.0);
    worst = std::max(worst, std::abs(res.objective - want) / (1.0 + std::abs(want)));
  }
  rows.push_back(make_row("assignment", "huge_penalty_concentration",
                          "dominant activity cost: optimum uses the fewest surfaces; "
                          "relative objective error and active count",
                          instances, 1e-6, worst));
}

}  // namespace

std::vector<CheckRow> run_channel_suite(std::uint64_t seed) {
  std::vector<CheckRow> rows;
  mc_link_power(seed, rows);
  composite_longhand(seed, rows);
  rates_longhand(seed, rows);
  return rows;
}

std::vector<CheckRow> run_solver_suite(std::uint64_t seed) {
  std::vector<CheckRow> rows;
  KktTally kkt;
  eigen_characterization(seed, kkt, rows);
  beam_share_grid(seed, rows);
  phase_pair_grid(seed, rows);
  projected_gradient_full(seed, kkt, rows);
  rows.push_back(make_row("solver", "kkt_residuals",
                          "worst feasibility residual and relative duality gap over " +
                              std::to_string(kkt.solves) + " interior-point solves",
                          kkt.solves, 1e-6,
                          std::max(kkt.worst_primal, kkt.worst_gap)));
  return rows;
}

std::vector<CheckRow> run_assignment_suite(std::uint64_t seed) {
  std::vector<CheckRow> rows;
  enumeration_match(seed, rows);
  zero_penalty_argmax(seed, rows);
  huge_penalty_concentration(seed, rows);
  return rows;
}

std::vector<CheckRow> run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "channel") return run_channel_suite(seed);
  if (name == "solver") return run_solver_suite(seed);
  if (name == "assignment") return run_assignment_suite(seed);
  if (name == "all") {
    std::vector<CheckRow> rows = run_channel_suite(seed);
    for (auto& r : run_solver_suite(seed)) rows.push_back(std::move(r));
    for (auto& r : run_assignment_suite(seed)) rows.push_back(std::move(r));
    return rows;
  }
  throw std::invalid_argument("unknown oracle suite '" + name +
                              "' (expected channel, solver, assignment, or all)");
}

void write_report_csv(const std::vector<CheckRow>& rows, std::ostream& os) {
  os << "suite,check,instances,tolerance,worst_deviation,pass,method\n";
  char buf[64];
  for (const CheckRow& r : rows) {
    os << r.suite << ',' << r.name << ',' << r.instances << ',';
    std::snprintf(buf, sizeof(buf), "%.3g", r.tolerance);
    os << buf << ',';
    std::snprintf(buf, sizeof(buf), "%.6g", r.worst);
    os << buf << ',' << (r.pass ? "yes" : "no") << ',' << r.detail << '\n';
  }
}

}  // namespace irsee::oracle
