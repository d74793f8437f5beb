// SPDX-License-Identifier: Apache-2.0
//
// Opportunistic reflecting-surface pipeline: each user is served through
// exactly one surface, surfaces serve at most a fixed number of users, and
// idle surfaces power down. Every outer iteration re-solves the assignment
// by branch and bound (the per-surface element power enters as an activity
// penalty scaled by the current fractional parameter), then runs the same
// beam+split and phase steps as the exhaustive scheme, but on the assigned
// pair channels and with one phase block per active surface.

#include <cmath>
#include <numbers>

#include "irsee/oia.hpp"

namespace irsee {

namespace {

VecC pair_channel(const CompositeChannels& comp, const PhaseConfig& phases, int n,
                  int k) {
  return pair_composite(comp, n, k).adjoint() * phases.extended_one(n);
}

double static_power_beam_step(const SystemConfig& config, int active_surfaces,
                              bool include_irs) {
  double p = config.p_ap_mw + config.users * config.p_user_mw;
  if (include_irs) p += active_surfaces * config.elements * config.p_element_mw;
  return p;
}

bool refit_split_oia(const SystemConfig& config, const RatesOia& rates,
                     const AssociationMatrix& assoc, CommonRateSplit* split) {
  VecD floors(config.users);
  for (int k = 0; k < config.users; ++k) {
    const int n = assoc.assigned_surface(k);
    if (n < 0) return false;
    floors(k) = std::max(0.0, config.min_rate(k) - rates.priv(n, k));
  }
  const auto fit =
      optimal_split(config.priority, floors, common_budget_oia(rates, assoc));
  if (!fit) return false;
  *split = *fit;
  return true;
}

struct Evaluation {
  RatesOia rates;
  double weighted_rate = 0.0;
  double power_mw = 0.0;
  double value = 0.0;  // weighted rate minus rho * power
};

Evaluation evaluate(const SystemConfig& config, const CompositeChannels& comp,
                    const OiaState& st, double rho, bool include_irs) {
  Evaluation ev;
  ev.rates = rates_oia(comp, st.phases, st.beams, config.noise_mw);
  ev.weighted_rate =
      weighted_sum_rate(config, user_rates_oia(ev.rates, st.split, st.assoc));
  ev.power_mw = power_total_oia(st.beams, st.assoc, config, include_irs);
  ev.value = ev.weighted_rate - rho * ev.power_mw / 1000.0;
  return ev;
}

// Assignment scores: weighted rate each pair would contribute under the
// current design, with the current share kept fixed.
AssociationProblem build_association(const SystemConfig& config,
                                     const RatesOia& rates,
                                     const CommonRateSplit& split, double rho) {
  AssociationProblem pb;
  pb.gain = MatD(config.irs_count, config.users);
  for (int n = 0; n < config.irs_count; ++n)
    for (int k = 0; k < config.users; ++k)
      pb.gain(n, k) = config.bandwidth_hz * config.priority(k) *
                      (split.c(k) + rates.priv(n, k));
  pb.penalty = rho * config.elements * config.p_element_mw / 1000.0;
  pb.capacity = config.irs_capacity;
  return pb;
}

}  // namespace

OiaResult run_oia(const SystemConfig& config_in, const ChannelSet& channels,
                  std::uint64_t seed, const OiaOptions& options) {
  SystemConfig config = config_in;
  config.finalize();

  CompositeChannels comp = assemble_composites(config, channels);
  if (options.zero_irs_channels)
    for (auto& a : comp.a) a.topRows(config.irs_count * config.elements).setZero();

  OiaResult out;
  OiaState st;

  // same starting draws as the exhaustive scheme, so per-seed comparisons
  // see identical initial conditions
  {
    bool ok_eia = false;
    const EiaState base = init_state_eia(config, comp, seed, options, &ok_eia);
    st.beams = base.beams;
    st.phases = base.phases;
    st.split.c = VecD::Zero(config.users);
  }

  auto finish = [&](StopReason reason) {
    out.reason = reason;
    out.state = st;
    const Evaluation ev =
        evaluate(config, comp, st, 0.0, options.include_irs_power);
    out.final_rate = ev.weighted_rate;
    out.final_ee = weighted_ee(ev.weighted_rate, ev.power_mw);
    out.feasibility = check_feasibility_oia(config, comp, st.phases, st.beams,
                                            st.split, st.assoc);
    return out;
  };

  if (config.irs_count * config.irs_capacity < config.users) {
    out.note = "not enough surface capacity for the user count";
    st.assoc.omega = MatI::Zero(config.irs_count, config.users);
    return finish(StopReason::InitFailed);
  }

  // initial assignment at zero activity penalty, then cover the floors,
  // shifting transmit power toward the common beam when needed
  {
    const RatesOia r0 = rates_oia(comp, st.phases, st.beams, config.noise_mw);
    const BnbResult root = solve_association(build_association(config, r0, st.split, 0.0));
    if (!root.feasible) {
      out.note = "initial assignment infeasible";
      st.assoc.omega = MatI::Zero(config.irs_count, config.users);
      return finish(StopReason::InitFailed);
    }
    st.assoc.omega = root.omega;
    bool covered = false;
    for (int attempt = 0; attempt < 20 && !covered; ++attempt) {
      const RatesOia r = rates_oia(comp, st.phases, st.beams, config.noise_mw);
      covered = refit_split_oia(config, r, st.assoc, &st.split);
      if (covered) break;
      double released = 0.0;
      for (auto& w : st.beams.user) {
        released += 0.36 * w.squaredNorm();
        w *= 0.8;
      }
      const double pc = st.beams.common.squaredNorm();
      if (pc > 0.0) st.beams.common *= std::sqrt((pc + released) / pc);
    }
    if (!covered) {
      out.note = "initialization could not cover the rate floors";
      return finish(StopReason::InitFailed);
    }
  }

  std::mt19937_64 rrng = substream(seed, Stream::Randomization);
  double rho = 0.0;

  for (int iter = 1; iter <= config.dinkelbach_max_iter; ++iter) {
    OiaIterRecord rec;
    rec.iteration = iter;
    rec.rho = rho;

    // ---- assignment step
    {
      const Evaluation cur = evaluate(config, comp, st, rho, options.include_irs_power);
      const BnbResult bnb =
          solve_association(build_association(config, cur.rates, st.split, rho));
      rec.bnb_nodes = bnb.nodes;
      rec.assoc_objective = bnb.objective;
      rec.assoc_accepted = false;
      if (bnb.feasible) {
        OiaState cand = st;
        cand.assoc.omega = bnb.omega;
        if (refit_split_oia(config, cur.rates, cand.assoc, &cand.split)) {
          const Evaluation ev =
              evaluate(config, comp, cand, rho, options.include_irs_power);
          if (ev.value >= cur.value - 1e-9 * (1.0 + std::abs(cur.value))) {
            st = cand;
            rec.assoc_accepted = true;
          }
        }
      }
      if (options.keep_bnb_audit) out.bnb_audit.push_back(bnb);
    }
    rec.active_surfaces = static_cast<int>(st.assoc.active_surfaces().size());

    // ---- beam + split step over the assigned pair channels
    if (options.optimize_beams) {
      BeamStepData bd;
      bd.gram.reserve(config.users);
      for (int k = 0; k < config.users; ++k) {
        const VecC v = pair_channel(comp, st.phases, st.assoc.assigned_surface(k), k);
        bd.gram.push_back(v * v.adjoint() * (config.p_max_mw / config.noise_mw));
      }
      bd.priority = config.priority;
      bd.min_rate = config.min_rate;
      bd.rho_over_b = rho / config.bandwidth_hz;
      bd.p_max_mw = config.p_max_mw;
      bd.static_power_mw = static_power_beam_step(config, rec.active_surfaces,
                                                  options.include_irs_power);
      bd.sca_tol = config.sca_tol;
      bd.sca_max_iter = config.sca_max_iter;
      bd.solver_tol = config.solver_tol;
      const BeamStepResult br = solve_beam_split_step(bd, st.beams, st.split, rrng);
      if (br.status != cone::SolveStatus::Optimal) {
        out.note = "beam step stopped: " +
                   (br.infeasible_family.empty() ? std::string("numerical failure")
                                                 : br.infeasible_family);
        out.trace.push_back(rec);
        out.iterations = iter;
        return finish(iter == 1 ? StopReason::InitFailed : StopReason::Converged);
      }
      rec.beam_objective = br.surrogate_objective * config.bandwidth_hz;
      rec.min_rank_ratio = br.min_rank_ratio;
      OiaState cand = st;
      cand.beams = br.beams;
      cand.split = br.split;
      const double f_cur =
          evaluate(config, comp, st, rho, options.include_irs_power).value;
      const double f_new =
          evaluate(config, comp, cand, rho, options.include_irs_power).value;
      if (f_new >= f_cur - 1e-9 * (1.0 + std::abs(f_cur))) st = cand;
    } else {
      const RatesOia r = rates_oia(comp, st.phases, st.beams, config.noise_mw);
      refit_split_oia(config, r, st.assoc, &st.split);
    }

    // ---- phase step, one block per active surface
    if (options.optimize_phases && !options.zero_irs_channels) {
      PhaseStepData pd;
      pd.sca_tol = config.sca_tol;
      pd.sca_max_iter = config.sca_max_iter;
      pd.solver_tol = config.solver_tol;
      const std::vector<int> active = st.assoc.active_surfaces();
      const double root_noise = std::sqrt(config.noise_mw);
      const double omega_floor = std::exp2(st.split.total()) - 1.0;
      std::vector<VecC> init_f;
      for (int n : active) {
        PhaseBlockData blk;
        blk.common_floor = omega_floor;
        for (int k = 0; k < config.users; ++k) {
          if (st.assoc.omega(n, k) != 1) continue;
          blk.user_ids.push_back(k);
          blk.a.emplace_back();
          blk.alpha.emplace_back();
          auto& arow = blk.a.back();
          auto& alpharow = blk.alpha.back();
          const MatC pairk = pair_composite(comp, n, k);
          for (int i = 0; i <= config.users; ++i) {
            const VecC& w = i == 0 ? st.beams.common : st.beams.user[i - 1];
            const VecC stack = pairk * w / root_noise;
            arow.push_back(stack.head(config.elements));
            alpharow.push_back(stack(config.elements));
          }
        }
        const int nk = static_cast<int>(blk.user_ids.size());
        blk.priority = VecD(nk);
        blk.private_floor = VecD(nk);
        for (int j = 0; j < nk; ++j) {
          const int k = blk.user_ids[j];
          blk.priority(j) = config.priority(k);
          blk.private_floor(j) =
              std::max(0.0, std::exp2(config.min_rate(k) - st.split.c(k)) - 1.0);
        }
        pd.blocks.push_back(std::move(blk));
        init_f.push_back(st.phases.f[n]);
      }

      if (!pd.blocks.empty()) {
        const PhaseStepResult pr = solve_phase_step(pd, init_f, rrng);
        rec.phase_accepted = false;
        if (pr.status == cone::SolveStatus::Optimal) {
          rec.phase_objective = pr.surrogate_objective * config.bandwidth_hz;
          rec.min_rank_ratio = std::min(rec.min_rank_ratio, pr.min_rank_ratio);
          OiaState cand = st;
          for (size_t j = 0; j < active.size(); ++j)
            cand.phases.f[active[j]] = pr.f[j];
          const RatesOia r_new =
              rates_oia(comp, cand.phases, cand.beams, config.noise_mw);
          const RatesOia r_old =
              rates_oia(comp, st.phases, st.beams, config.noise_mw);
          const double wr_old = weighted_sum_rate(
              config, user_rates_oia(r_old, st.split, st.assoc));
          if (refit_split_oia(config, r_new, cand.assoc, &cand.split)) {
            const double wr_new = weighted_sum_rate(
                config, user_rates_oia(r_new, cand.split, cand.assoc));
            if (wr_new >= wr_old - 1e-9 * (1.0 + std::abs(wr_old))) {
              st = cand;
              rec.phase_accepted = true;
            }
          }
        } else if (!pr.infeasible_family.empty() && out.note.empty()) {
          out.note = "phase step reported: " + pr.infeasible_family;
        }
      }
    }

    const Evaluation ev = evaluate(config, comp, st, rho, options.include_irs_power);
    rec.power_mw = ev.power_mw;
    const double rho_new = ev.weighted_rate / (ev.power_mw / 1000.0);
    out.trace.push_back(rec);
    out.iterations = iter;
    const bool stationary = std::abs(rho_new - rho) <= config.dinkelbach_tol;
    rho = rho_new;
    st.rho = rho;
    if (stationary) return finish(StopReason::Converged);
  }
  return finish(StopReason::MaxIterations);
}

}  // namespace irsee
