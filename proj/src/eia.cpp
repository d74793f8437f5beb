// SPDX-License-Identifier: Apache-2.0
//
// Exhaustive reflecting-surface pipeline: every user's effective channel
// runs through all surfaces at once. The driver alternates the joint
// beam+split step and the phase step inside a fractional-parameter loop,
// accepting a step only when the true objective at the current parameter
// value does not fall; the parameter then moves to the evaluated
// rate-to-power ratio and the loop stops once it is stationary.

#include <cmath>
#include <numbers>

#include "irsee/eia.hpp"

namespace irsee {

namespace {

// extra random starting points for a phase step whose first try stalls
constexpr int kPhaseRestarts = 2;

VecC effective_channel(const CompositeChannels& comp, const VecC& fbar, int k) {
  return comp.a[k].adjoint() * fbar;
}

std::vector<MatC> build_grams(const SystemConfig& config,
                              const CompositeChannels& comp, const VecC& fbar) {
  std::vector<MatC> grams;
  grams.reserve(comp.a.size());
  for (size_t k = 0; k < comp.a.size(); ++k) {
    const VecC v = effective_channel(comp, fbar, static_cast<int>(k));
    grams.push_back(v * v.adjoint() * (config.p_max_mw / config.noise_mw));
  }
  return grams;
}

double static_power_mw(const SystemConfig& config, bool include_irs) {
  double p = config.p_ap_mw + config.users * config.p_user_mw;
  if (include_irs) p += config.irs_count * config.elements * config.p_element_mw;
  return p;
}

// True value of the parametrized objective at a full design point, bit/s;
// rho carries Mbit/J, so the power term scales by 1e6 (Mbit) / 1e3 (mW->W).
double fractional_value(const SystemConfig& config, const CompositeChannels& comp,
                        const EiaState& st, double rho, bool include_irs) {
  const RatesEia rates = rates_eia(comp, st.phases, st.beams, config.noise_mw);
  const double wr = weighted_sum_rate(config, user_rates_eia(rates, st.split));
  const double p = power_total_eia(st.beams, config, include_irs);
  return wr - rho * p * 1000.0;
}

// Refit the split against the rates of the given design: floors first,
// leftover to the top priority. Returns false when the floors cannot be
// covered by the common budget.
bool refit_split(const SystemConfig& config, const RatesEia& rates,
                 CommonRateSplit* split) {
  const VecD floors = (config.min_rate - rates.priv).cwiseMax(0.0);
  const auto fit = optimal_split(config.priority, floors, common_budget_eia(rates));
  if (!fit) return false;
  *split = *fit;
  return true;
}

}  // namespace

EiaState init_state_eia(const SystemConfig& config, const CompositeChannels& composites,
                        std::uint64_t seed, const RunOptions& options, bool* ok) {
  *ok = true;
  EiaState st;

  std::mt19937_64 prng = substream(seed, Stream::PhaseInit);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  st.phases.f.resize(config.irs_count);
  for (int n = 0; n < config.irs_count; ++n) {
    st.phases.f[n] = VecC(config.elements);
    for (int l = 0; l < config.elements; ++l)
      st.phases.f[n](l) = std::polar(1.0, angle(prng));
  }

  const VecC fbar = st.phases.extended();
  st.beams.user.resize(config.users);
  const double p_priv = config.p_max_mw / (2.0 * config.users);
  if (options.random_beams) {
    std::mt19937_64 brng = substream(seed, Stream::BeamInit);
    std::normal_distribution<double> nd(0.0, 1.0);
    auto draw = [&]() {
      VecC w(config.antennas);
      for (int m = 0; m < config.antennas; ++m) w(m) = cxd(nd(brng), nd(brng));
      const double n2 = w.norm();
      return n2 > 0.0 ? VecC(w / n2) : VecC(VecC::Unit(config.antennas, 0));
    };
    st.beams.common = std::sqrt(config.p_max_mw / 2.0) * draw();
    for (int k = 0; k < config.users; ++k)
      st.beams.user[k] = std::sqrt(p_priv) * draw();
  } else {
    // matched filters on the effective channels, half the budget on the
    // common beam pointed at the unweighted user bundle
    VecC bundle = VecC::Zero(config.antennas);
    for (int k = 0; k < config.users; ++k) {
      VecC v = effective_channel(composites, fbar, k);
      if (v.norm() < 1e-30) v = VecC::Unit(config.antennas, 0);
      v.normalize();
      st.beams.user[k] = std::sqrt(p_priv) * v;
      bundle += v;
    }
    if (bundle.norm() < 1e-30) bundle = VecC::Unit(config.antennas, 0);
    st.beams.common = std::sqrt(config.p_max_mw / 2.0) * bundle.normalized();
  }

  st.split.c = VecD::Zero(config.users);
  st.rho = 0.0;

  // repair pass: if the floors cannot be covered, move transmit power from
  // the private beams to the common beam and retry
  for (int attempt = 0; attempt < 20; ++attempt) {
    const RatesEia rates = rates_eia(composites, st.phases, st.beams, config.noise_mw);
    if (refit_split(config, rates, &st.split)) return st;
    double released = 0.0;
    for (auto& w : st.beams.user) {
      released += 0.36 * w.squaredNorm();
      w *= 0.8;
    }
    const double pc = st.beams.common.squaredNorm();
    if (pc > 0.0) st.beams.common *= std::sqrt((pc + released) / pc);
  }
  *ok = false;
  return st;
}

EiaResult run_eia(const SystemConfig& config_in, const ChannelSet& channels,
                  std::uint64_t seed, const RunOptions& options) {
  SystemConfig config = config_in;
  config.finalize();

  CompositeChannels comp = assemble_composites(config, channels);
  if (options.zero_irs_channels)
    for (auto& a : comp.a) a.topRows(config.irs_count * config.elements).setZero();

  EiaResult out;
  bool ok = false;
  EiaState st = init_state_eia(config, comp, seed, options, &ok);
  auto finish = [&](StopReason reason) {
    out.reason = reason;
    out.state = st;
    const RatesEia rates = rates_eia(comp, st.phases, st.beams, config.noise_mw);
    out.final_rate = weighted_sum_rate(config, user_rates_eia(rates, st.split));
    const double p = power_total_eia(st.beams, config, options.include_irs_power);
    out.final_ee = weighted_ee(out.final_rate, p);
    out.feasibility = check_feasibility_eia(config, comp, st.phases, st.beams, st.split);
    return out;
  };
  if (!ok) {
    out.note = "initialization could not cover the rate floors";
    return finish(StopReason::InitFailed);
  }

  std::mt19937_64 rrng = substream(seed, Stream::Randomization);
  const double stat_mw = static_power_mw(config, options.include_irs_power);
  double rho = 0.0;

  for (int iter = 1; iter <= config.dinkelbach_max_iter; ++iter) {
    EiaIterRecord rec;
    rec.iteration = iter;
    rec.rho = rho;

    if (options.optimize_beams) {
      BeamStepData bd;
      bd.gram = build_grams(config, comp, st.phases.extended());
      bd.priority = config.priority;
      bd.min_rate = config.min_rate;
      bd.rho_over_b = rho * 1e6 / config.bandwidth_hz;
      bd.p_max_mw = config.p_max_mw;
      bd.static_power_mw = stat_mw;
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
      rec.beam_rank_ratio = br.min_rank_ratio;
      EiaState cand = st;
      cand.beams = br.beams;
      cand.split = br.split;
      const double f_cur =
          fractional_value(config, comp, st, rho, options.include_irs_power);
      const double f_new =
          fractional_value(config, comp, cand, rho, options.include_irs_power);
      if (f_new >= f_cur - 1e-9 * (1.0 + std::abs(f_cur))) st = cand;
    } else {
      // keep the split honest for fixed-beam runs
      const RatesEia rates = rates_eia(comp, st.phases, st.beams, config.noise_mw);
      refit_split(config, rates, &st.split);
    }

    if (options.optimize_phases && !options.zero_irs_channels) {
      PhaseStepData pd;
      pd.sca_tol = config.sca_tol;
      pd.sca_max_iter = config.sca_max_iter;
      pd.solver_tol = config.solver_tol;
      PhaseBlockData blk;
      blk.user_ids.resize(config.users);
      blk.priority = config.priority;
      blk.private_floor = VecD(config.users);
      const double root_noise = std::sqrt(config.noise_mw);
      const int reflected = config.irs_count * config.elements;
      for (int k = 0; k < config.users; ++k) {
        blk.user_ids[k] = k;
        blk.private_floor(k) =
            std::max(0.0, std::exp2(config.min_rate(k) - st.split.c(k)) - 1.0);
        blk.a.emplace_back();
        blk.alpha.emplace_back();
        for (int i = 0; i <= config.users; ++i) {
          const VecC& w = i == 0 ? st.beams.common : st.beams.user[i - 1];
          const VecC stack = comp.a[k] * w / root_noise;
          blk.a[k].push_back(stack.head(reflected));
          blk.alpha[k].push_back(stack(reflected));
        }
      }
      blk.common_floor = std::exp2(st.split.total()) - 1.0;
      pd.blocks = {blk};

      const RatesEia r_old = rates_eia(comp, st.phases, st.beams, config.noise_mw);
      const double wr_old = weighted_sum_rate(config, user_rates_eia(r_old, st.split));

      // the joint block spans every surface, so the starting point is the
      // stacked reflection vector and the result is sliced back per surface.
      // Strong reflections can pin the linearized step to its starting
      // point, so when the first try brings no progress a couple of fresh
      // random starts are tried and the best candidate wins.
      rec.phase_accepted = false;
      bool have_best = false;
      double wr_best = 0.0;
      EiaState best = st;
      double best_objective = 0.0, best_ratio = 1.0;
      std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
      for (int attempt = 0; attempt <= kPhaseRestarts; ++attempt) {
        VecC start(reflected);
        if (attempt == 0)
          for (int n = 0; n < config.irs_count; ++n)
            start.segment(n * config.elements, config.elements) = st.phases.f[n];
        else
          for (int i = 0; i < reflected; ++i) start(i) = std::polar(1.0, angle(rrng));
        const PhaseStepResult pr = solve_phase_step(pd, {start}, rrng);
        if (pr.status != cone::SolveStatus::Optimal) {
          if (!pr.infeasible_family.empty() && out.note.empty())
            out.note = "phase step reported: " + pr.infeasible_family;
          continue;
        }
        EiaState cand = st;
        for (int n = 0; n < config.irs_count; ++n)
          cand.phases.f[n] = pr.f[0].segment(n * config.elements, config.elements);
        // reflections do not change the power draw, so acceptance reduces
        // to: floors still coverable and the weighted rate not falling
        const RatesEia r_new = rates_eia(comp, cand.phases, cand.beams, config.noise_mw);
        if (!refit_split(config, r_new, &cand.split)) continue;
        const double wr_new =
            weighted_sum_rate(config, user_rates_eia(r_new, cand.split));
        if (!have_best || wr_new > wr_best) {
          have_best = true;
          wr_best = wr_new;
          best = cand;
          best_objective = pr.surrogate_objective * config.bandwidth_hz;
          best_ratio = pr.min_rank_ratio;
        }
        if (attempt == 0 && wr_new > wr_old + 1e-6 * (1.0 + std::abs(wr_old))) break;
      }
      if (have_best && wr_best >= wr_old - 1e-9 * (1.0 + std::abs(wr_old))) {
        st = best;
        rec.phase_accepted = true;
        rec.phase_objective = best_objective;
        rec.min_rank_ratio = std::min(rec.min_rank_ratio, best_ratio);
      }
    }

    const RatesEia rates = rates_eia(comp, st.phases, st.beams, config.noise_mw);
    const double wr = weighted_sum_rate(config, user_rates_eia(rates, st.split));
    const double p = power_total_eia(st.beams, config, options.include_irs_power);
    rec.power_mw = p;
    const double rho_new = weighted_ee(wr, p);
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
