// SPDX-License-Identifier: Apache-2.0
//
// The two convex steps shared by both optimization pipelines. Each step is
// a short sequence of conic solves: the nonconvex rate terms are replaced
// by tangent minorants rebuilt at the previous solution, so every inner
// program maximizes a concave model that touches the true objective at the
// expansion point and never overstates it. Matrices stay lifted across
// inner iterations; rank-one factors are extracted once at the end, with a
// randomized repair when a lifted block is not numerically rank one.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <utility>

#include "irsee/subproblems.hpp"
#include "irsee/surrogate.hpp"

namespace irsee {

namespace {

using cone::AffineExpr;
using cone::ConeProgram;
using cone::ConeSolution;
using cone::Constraint;
using cone::RankOne;
using cone::Sense;
using cone::SolveStatus;
using cone::SolverOptions;

constexpr double kRankOneGood = 0.999;
constexpr double kFeasSlack = 1e-9;

void add_to(MatC& slot, const MatC& term) {
  if (slot.size() == 0)
    slot = term;
  else
    slot += term;
}

// Candidate comparison used by both randomized repairs: any feasible point
// beats any infeasible one; feasible points compare by objective and
// infeasible ones by how close they come to feasibility.
struct Candidate {
  double min_margin = -1e300;
  double objective = -1e300;
};

bool better(const Candidate& a, const Candidate& b) {
  const bool fa = a.min_margin >= -kFeasSlack;
  const bool fb = b.min_margin >= -kFeasSlack;
  if (fa != fb) return fa;
  if (fa) return a.objective > b.objective;
  return a.min_margin > b.min_margin;
}

}  // namespace

// ------------------------------------------------------------------ split --

std::optional<CommonRateSplit> optimal_split(const VecD& priority, const VecD& floors,
                                             double budget) {
  const int k = static_cast<int>(priority.size());
  VecD c = floors.cwiseMax(0.0);
  const double used = c.sum();
  if (used > budget + 1e-12 * (1.0 + std::abs(budget))) return std::nullopt;
  int best = 0;
  for (int i = 1; i < k; ++i)
    if (priority(i) > priority(best)) best = i;
  c(best) += std::max(budget - used, 0.0);
  CommonRateSplit split;
  split.c = c;
  return split;
}

// ------------------------------------------------------------------ beams --

namespace {

struct BeamLayout {
  int users = 0;
  int antennas = 0;
  // block order: common beam, K private beams, K scalar shares
  int beam_block(int i) const { return i; }  // 0 = common, 1..K private
  int share_block(int k) const { return users + 1 + k; }
};

// Tangent expansion state: one minorant per user for each of the two
// denominators (private-stream interference, all-private power).
struct BeamExpansion {
  std::vector<LogSurrogate> at_others;  // at 1 + sum_{i >= 1, i != k+1} T_ki
  std::vector<LogSurrogate> at_all;     // at 1 + sum_{i >= 1} T_ki
};

// T_ki on a lifted point: tr(gram_k W_hat_i), received power of beam i at
// user k in noise units (beam 0 is the common stream).
double rx_lifted(const BeamStepData& d, const std::vector<MatC>& x,
                 const BeamLayout& lay, int k, int i) {
  return std::max(
      (d.gram[k].cwiseProduct(x[lay.beam_block(i)].transpose())).sum().real(), 0.0);
}

// T_ki on actual beam vectors (gram is v v^H * p_max / noise, so dividing
// by p_max undoes the budget normalization).
double rx_vector(const BeamStepData& d, const BeamformingSet& b, int k, int i) {
  const VecC& w = i == 0 ? b.common : b.user[i - 1];
  return std::max((w.adjoint() * d.gram[k] * w)(0).real() / d.p_max_mw, 0.0);
}

BeamExpansion expand_beams(const BeamStepData& d, const std::vector<MatC>& x,
                           const BeamLayout& lay) {
  BeamExpansion e;
  for (int k = 0; k < lay.users; ++k) {
    double all = 1.0, others = 1.0;
    for (int i = 1; i <= lay.users; ++i) {
      const double t = rx_lifted(d, x, lay, k, i);
      all += t;
      if (i != k + 1) others += t;
    }
    e.at_others.push_back(make_surrogate(others));
    e.at_all.push_back(make_surrogate(all));
  }
  return e;
}

ConeProgram build_beam_program(const BeamStepData& d, const BeamExpansion& e,
                               const BeamLayout& lay) {
  ConeProgram p;
  p.add_block("w_common", lay.antennas);
  for (int k = 0; k < lay.users; ++k)
    p.add_block("w_user" + std::to_string(k), lay.antennas);
  for (int k = 0; k < lay.users; ++k) p.add_block("c" + std::to_string(k), 1);

  const double power_w = d.rho_over_b / 1000.0;  // objective weight per mW

  p.objective.affine = p.zero_affine();
  p.objective.affine.offset = -power_w * d.static_power_mw;
  for (int i = 0; i <= lay.users; ++i)
    p.objective.affine.coeff[lay.beam_block(i)] =
        -power_w * d.p_max_mw * MatC::Identity(lay.antennas, lay.antennas);
  for (int k = 0; k < lay.users; ++k) {
    const double v = d.priority(k);
    add_to(p.objective.affine.coeff[lay.share_block(k)], MatC::Constant(1, 1, v));
    p.objective.affine.offset +=
        v * (e.at_others[k].offset() + e.at_others[k].slope());
    for (int i = 1; i <= lay.users; ++i) {
      if (i == k + 1) continue;
      add_to(p.objective.affine.coeff[lay.beam_block(i)],
             v * e.at_others[k].slope() * d.gram[k]);
    }
    AffineExpr arg = p.zero_affine();
    arg.offset = 1.0;
    for (int i = 1; i <= lay.users; ++i)
      add_to(arg.coeff[lay.beam_block(i)], d.gram[k]);
    p.objective.logs.push_back({v / kLn2, arg});
  }

  {
    Constraint c;
    c.label = "power_budget";
    c.expr.affine = p.zero_affine();
    c.expr.affine.offset = 1.0;
    for (int i = 0; i <= lay.users; ++i)
      c.expr.affine.coeff[lay.beam_block(i)] =
          -MatC::Identity(lay.antennas, lay.antennas);
    p.constraints.push_back(std::move(c));
  }

  for (int k = 0; k < lay.users; ++k) {
    // the whole share budget must be decodable by every user
    Constraint dec;
    dec.label = "common_decode_" + std::to_string(k);
    dec.expr.affine = p.zero_affine();
    dec.expr.affine.offset = e.at_all[k].offset() + e.at_all[k].slope();
    for (int j = 0; j < lay.users; ++j)
      add_to(dec.expr.affine.coeff[lay.share_block(j)], MatC::Constant(1, 1, -1.0));
    for (int i = 1; i <= lay.users; ++i)
      add_to(dec.expr.affine.coeff[lay.beam_block(i)],
             e.at_all[k].slope() * d.gram[k]);
    AffineExpr arg = p.zero_affine();
    arg.offset = 1.0;
    for (int i = 0; i <= lay.users; ++i) add_to(arg.coeff[lay.beam_block(i)], d.gram[k]);
    dec.expr.logs.push_back({1.0 / kLn2, arg});
    p.constraints.push_back(std::move(dec));

    // per-user total rate floor (share + private stream)
    Constraint floor;
    floor.label = "rate_floor_" + std::to_string(k);
    floor.expr.affine = p.zero_affine();
    floor.expr.affine.offset =
        e.at_others[k].offset() + e.at_others[k].slope() - d.min_rate(k);
    add_to(floor.expr.affine.coeff[lay.share_block(k)], MatC::Constant(1, 1, 1.0));
    for (int i = 1; i <= lay.users; ++i) {
      if (i == k + 1) continue;
      add_to(floor.expr.affine.coeff[lay.beam_block(i)],
             e.at_others[k].slope() * d.gram[k]);
    }
    AffineExpr arg2 = p.zero_affine();
    arg2.offset = 1.0;
    for (int i = 1; i <= lay.users; ++i)
      add_to(arg2.coeff[lay.beam_block(i)], d.gram[k]);
    floor.expr.logs.push_back({1.0 / kLn2, arg2});
    p.constraints.push_back(std::move(floor));
  }
  return p;
}

// Score actual beam vectors by the value the step is maximizing, with the
// share vector re-fit optimally: meet floors first, the rest goes to the
// highest-priority user. Returns the candidate stats and the fitted split.
std::pair<Candidate, CommonRateSplit> score_beams(const BeamStepData& d,
                                                  const BeamformingSet& b) {
  const int users = static_cast<int>(d.gram.size());
  double budget = 1e300;
  VecD priv(users);
  for (int k = 0; k < users; ++k) {
    double all = 1.0, others = 1.0, common = 0.0;
    for (int i = 0; i <= users; ++i) {
      const double t = rx_vector(d, b, k, i);
      if (i == 0) {
        common = t;
      } else {
        all += t;
        if (i != k + 1) others += t;
      }
    }
    priv(k) = std::log2(all) - std::log2(others);
    budget = std::min(budget, std::log2(1.0 + common / all));
  }
  VecD floors = (d.min_rate - priv).cwiseMax(0.0);

  Candidate cand;
  CommonRateSplit split;
  split.c = VecD::Zero(users);
  const double power = b.transmit_power_mw();
  cand.min_margin = std::min(d.p_max_mw - power, budget - floors.sum());
  const auto fitted = optimal_split(d.priority, floors, budget);
  if (fitted) split = *fitted;
  double obj = -d.rho_over_b * (power + d.static_power_mw) / 1000.0;
  for (int k = 0; k < users; ++k) obj += d.priority(k) * (split.c(k) + priv(k));
  cand.objective = obj;
  return {cand, split};
}

}  // namespace

BeamStepResult solve_beam_split_step(const BeamStepData& data,
                                     const BeamformingSet& init_beams,
                                     const CommonRateSplit& init_split,
                                     std::mt19937_64& rng) {
  BeamStepResult out;
  BeamLayout lay;
  lay.users = static_cast<int>(data.gram.size());
  lay.antennas = static_cast<int>(data.gram.empty() ? 0 : data.gram[0].rows());
  if (lay.users == 0 || lay.antennas == 0)
    throw std::invalid_argument("beam step needs at least one user channel");

  std::vector<MatC> x(2 * lay.users + 1);
  x[lay.beam_block(0)] = init_beams.common * init_beams.common.adjoint() / data.p_max_mw;
  for (int k = 0; k < lay.users; ++k) {
    x[lay.beam_block(k + 1)] =
        init_beams.user[k] * init_beams.user[k].adjoint() / data.p_max_mw;
    x[lay.share_block(k)] = MatC::Constant(1, 1, std::max(init_split.c(k), 0.0));
  }

  SolverOptions sopt;
  sopt.tol = data.solver_tol;
  sopt.collect_path = false;

  double prev_obj = 0.0;
  std::vector<MatC> best = x;
  for (int it = 0; it < data.sca_max_iter; ++it) {
    const BeamExpansion e = expand_beams(data, best, lay);
    const ConeProgram prog = build_beam_program(data, e, lay);
    const ConeSolution sol = cone::solve(prog, sopt);
    out.sca_iterations = it + 1;
    if (sol.status == SolveStatus::Infeasible) {
      out.status = sol.status;
      out.infeasible_family = sol.infeasible_family;
      return out;
    }
    if (sol.status == SolveStatus::NumericalFailure) {
      if (it == 0) {
        out.status = sol.status;
        return out;
      }
      break;  // keep the last good iterate
    }
    best = sol.x;
    out.status = SolveStatus::Optimal;
    const double obj = sol.objective;
    out.surrogate_objective = obj;
    if (it > 0 && std::abs(obj - prev_obj) <= data.sca_tol) break;
    prev_obj = obj;
  }
  if (out.status != SolveStatus::Optimal) return out;

  // factor the lifted beams back to vectors, in milliwatt units
  out.min_rank_ratio = 1.0;
  const double root = std::sqrt(data.p_max_mw);
  // blocks whose normalized power is below this carry no signal: whatever
  // eigenvalue spread they show is barrier-center noise around zero, not a
  // meaningful direction, so they are excluded from the rank statistic
  constexpr double kNegligibleTrace = 1e-6;
  auto extract = [&](int block) {
    const double tr = best[block].trace().real();
    const RankOne r = cone::rank_one_extract(best[block]);
    if (std::getenv("IRSEE_TRACE"))
      std::fprintf(stderr, "[beam-extract] block=%d trace=%.6e ratio=%.6f\n", block,
                   tr, r.ratio);
    if (tr > kNegligibleTrace)
      out.min_rank_ratio = std::min(out.min_rank_ratio, r.ratio);
    return VecC(root * r.w);
  };
  BeamformingSet eigen_beams;
  eigen_beams.common = extract(lay.beam_block(0));
  eigen_beams.user.resize(lay.users);
  for (int k = 0; k < lay.users; ++k)
    eigen_beams.user[k] = extract(lay.beam_block(k + 1));

  auto [best_cand, best_split] = score_beams(data, eigen_beams);
  BeamformingSet best_beams = eigen_beams;
  {
    // never fall below the starting point: score it as a candidate too
    auto [init_cand, init_fit] = score_beams(data, init_beams);
    if (better(init_cand, best_cand)) {
      best_cand = init_cand;
      best_beams = init_beams;
      best_split = init_fit;
    }
  }

  if (out.min_rank_ratio < kRankOneGood) {
    // randomized repair: draw from the lifted covariances, renormalize to
    // the lifted transmit power profile and keep the best-scoring draw
    double lifted = 0.0;
    for (int i = 0; i <= lay.users; ++i)
      lifted += best[lay.beam_block(i)].trace().real();
    lifted *= data.p_max_mw;
    for (int draw = 0; draw < 30; ++draw) {
      BeamformingSet trial;
      trial.common = root * cone::sample_from_gram(best[lay.beam_block(0)], rng);
      trial.user.resize(lay.users);
      for (int k = 0; k < lay.users; ++k)
        trial.user[k] = root * cone::sample_from_gram(best[lay.beam_block(k + 1)], rng);
      const double drawn = trial.transmit_power_mw();
      if (drawn <= 0.0) continue;
      const double scale = std::sqrt(std::min(lifted, data.p_max_mw) / drawn);
      trial.common *= scale;
      for (auto& w : trial.user) w *= scale;
      auto [cand, split] = score_beams(data, trial);
      if (better(cand, best_cand)) {
        best_cand = cand;
        best_beams = trial;
        best_split = split;
      }
    }
  }

  out.beams = best_beams;
  if (best_cand.min_margin >= -kFeasSlack) {
    out.split = best_split;
  } else {
    // keep the lifted shares; the caller's acceptance guard decides
    out.split.c = VecD(lay.users);
    for (int k = 0; k < lay.users; ++k)
      out.split.c(k) = std::max(best[lay.share_block(k)](0, 0).real(), 0.0);
  }
  return out;
}

// ----------------------------------------------------------------- phases --

namespace {

// Lifted quadratic coefficient of beam i at constrained user k of a block:
// with b = [a; alpha], the received power is |fbar^H b|^2 = <b b^H, V> once
// the diagonal of V is pinned to one.
MatC lift_coeff(const PhaseBlockData& blk, int k, int i) {
  const int d = static_cast<int>(blk.a[k][i].size()) + 1;
  VecC b(d);
  b.head(d - 1) = blk.a[k][i];
  b(d - 1) = blk.alpha[k][i];
  return b * b.adjoint();
}

struct PhaseCtx {
  std::vector<std::vector<std::vector<MatC>>> gamma;  // [block][user][beam]
  std::vector<int> dim;                               // per block
};

PhaseCtx make_ctx(const PhaseStepData& d) {
  PhaseCtx ctx;
  ctx.gamma.resize(d.blocks.size());
  ctx.dim.resize(d.blocks.size());
  for (size_t b = 0; b < d.blocks.size(); ++b) {
    const PhaseBlockData& blk = d.blocks[b];
    const int nk = static_cast<int>(blk.a.size());
    ctx.gamma[b].resize(nk);
    int dim = 1;
    for (int k = 0; k < nk; ++k) {
      const int nbeams = static_cast<int>(blk.a[k].size());
      for (int i = 0; i < nbeams; ++i) {
        ctx.gamma[b][k].push_back(lift_coeff(blk, k, i));
        dim = static_cast<int>(blk.a[k][i].size()) + 1;
      }
    }
    ctx.dim[b] = dim;
  }
  return ctx;
}

double lifted_power(const PhaseCtx& ctx, const std::vector<MatC>& v, size_t b,
                    int k, int i) {
  return std::max(
      (ctx.gamma[b][k][i].cwiseProduct(v[b].transpose())).sum().real(), 0.0);
}

// Received power with explicit reflection coefficients.
double direct_power(const PhaseBlockData& blk, const VecC& f, int k, int i) {
  const VecC& a = blk.a[k][i];
  cxd amp = blk.alpha[k][i];
  for (int l = 0; l < a.size(); ++l) amp += std::conj(f(l)) * a(l);
  return std::norm(amp);
}

// Private-stream beam index of local user k within its block.
int own_beam(const PhaseBlockData& blk, int k) { return blk.user_ids[k] + 1; }

struct PhaseExpansion {
  std::vector<std::vector<LogSurrogate>> at_others;  // [block][user]
};

PhaseExpansion expand_lifted(const PhaseStepData& d, const PhaseCtx& ctx,
                             const std::vector<MatC>& v) {
  PhaseExpansion e;
  e.at_others.resize(d.blocks.size());
  for (size_t b = 0; b < d.blocks.size(); ++b) {
    const PhaseBlockData& blk = d.blocks[b];
    for (size_t k = 0; k < blk.a.size(); ++k) {
      double others = 1.0;
      const int me = own_beam(blk, static_cast<int>(k));
      for (int i = 1; i < static_cast<int>(blk.a[k].size()); ++i)
        if (i != me) others += lifted_power(ctx, v, b, static_cast<int>(k), i);
      e.at_others[b].push_back(make_surrogate(others));
    }
  }
  return e;
}

ConeProgram build_phase_program(const PhaseStepData& d, const PhaseCtx& ctx,
                                const PhaseExpansion& e) {
  ConeProgram p;
  for (size_t b = 0; b < d.blocks.size(); ++b) {
    const int idx = p.add_block("v" + std::to_string(b), ctx.dim[b]);
    for (int i = 0; i < ctx.dim[b]; ++i)
      p.fixed.push_back({idx, i, i, cxd(1.0, 0.0)});
  }

  p.objective.affine = p.zero_affine();
  for (size_t b = 0; b < d.blocks.size(); ++b) {
    const PhaseBlockData& blk = d.blocks[b];
    for (int k = 0; k < static_cast<int>(blk.a.size()); ++k) {
      const double v = blk.priority(k);
      const int me = own_beam(blk, k);
      const LogSurrogate& s = e.at_others[b][k];
      p.objective.affine.offset += v * (s.offset() + s.slope());
      AffineExpr arg = p.zero_affine();
      arg.offset = 1.0;
      const int nbeams = static_cast<int>(blk.a[k].size());
      for (int i = 1; i < nbeams; ++i) {
        add_to(arg.coeff[b], ctx.gamma[b][k][i]);
        if (i != me)
          add_to(p.objective.affine.coeff[b], v * s.slope() * ctx.gamma[b][k][i]);
      }
      p.objective.logs.push_back({v / kLn2, arg});

      // linear signal-to-interference floors keep the current operating
      // point decodable while the objective pushes the rates up
      Constraint priv;
      priv.label = "sinr_private_u" + std::to_string(blk.user_ids[k]);
      priv.expr.affine = p.zero_affine();
      priv.expr.affine.offset = -blk.private_floor(k);
      add_to(priv.expr.affine.coeff[b], ctx.gamma[b][k][me]);
      for (int i = 1; i < nbeams; ++i)
        if (i != me)
          add_to(priv.expr.affine.coeff[b],
                 -blk.private_floor(k) * ctx.gamma[b][k][i]);
      p.constraints.push_back(std::move(priv));

      Constraint com;
      com.label = "sinr_common_u" + std::to_string(blk.user_ids[k]);
      com.expr.affine = p.zero_affine();
      com.expr.affine.offset = -d.blocks[b].common_floor;
      add_to(com.expr.affine.coeff[b], ctx.gamma[b][k][0]);
      for (int i = 1; i < nbeams; ++i)
        add_to(com.expr.affine.coeff[b],
               -d.blocks[b].common_floor * ctx.gamma[b][k][i]);
      p.constraints.push_back(std::move(com));
    }
  }
  return p;
}

// True per-block score of explicit reflection coefficients: weighted sum of
// private rates, with the floor margins as the feasibility measure.
Candidate score_phases(const PhaseBlockData& blk, const VecC& f) {
  Candidate c;
  c.min_margin = 1e300;
  c.objective = 0.0;
  for (int k = 0; k < static_cast<int>(blk.a.size()); ++k) {
    const int me = own_beam(blk, k);
    const int nbeams = static_cast<int>(blk.a[k].size());
    double all = 1.0, others = 1.0;
    double p_me = 0.0, p_c = direct_power(blk, f, k, 0);
    for (int i = 1; i < nbeams; ++i) {
      const double t = direct_power(blk, f, k, i);
      all += t;
      if (i == me)
        p_me = t;
      else
        others += t;
    }
    c.objective += blk.priority(k) * (std::log2(all) - std::log2(others));
    c.min_margin = std::min(c.min_margin, p_me - blk.private_floor(k) * others);
    c.min_margin = std::min(c.min_margin, p_c - blk.common_floor * all);
  }
  return c;
}

// Unit-modulus rounding of a lifted factor: reference everything to the
// last (pinned) slot and keep angles only.
VecC round_phases(const VecC& u) {
  const int l = static_cast<int>(u.size()) - 1;
  VecC f(l);
  const cxd pivot = std::abs(u(l)) > 1e-12 * u.norm() ? u(l) : cxd(1.0, 0.0);
  for (int i = 0; i < l; ++i) {
    const cxd z = u(i) * std::conj(pivot);
    f(i) = std::abs(z) > 0.0 ? z / std::abs(z) : cxd(1.0, 0.0);
  }
  return f;
}

}  // namespace

PhaseStepResult solve_phase_step(const PhaseStepData& data,
                                 const std::vector<VecC>& init_f,
                                 std::mt19937_64& rng) {
  PhaseStepResult out;
  if (data.blocks.size() != init_f.size())
    throw std::invalid_argument("one starting vector per phase block required");
  const PhaseCtx ctx = make_ctx(data);

  std::vector<MatC> v(data.blocks.size());
  for (size_t b = 0; b < data.blocks.size(); ++b) {
    VecC fbar(ctx.dim[b]);
    fbar.head(ctx.dim[b] - 1) = init_f[b];
    fbar(ctx.dim[b] - 1) = cxd(1.0, 0.0);
    v[b] = fbar * fbar.adjoint();
  }

  SolverOptions sopt;
  sopt.tol = data.solver_tol;
  sopt.collect_path = false;

  double prev_obj = 0.0;
  for (int it = 0; it < data.sca_max_iter; ++it) {
    const PhaseExpansion e = expand_lifted(data, ctx, v);
    const ConeProgram prog = build_phase_program(data, ctx, e);
    const ConeSolution sol = cone::solve(prog, sopt);
    out.sca_iterations = it + 1;
    if (sol.status == SolveStatus::Infeasible) {
      out.status = sol.status;
      out.infeasible_family = sol.infeasible_family;
      return out;
    }
    if (sol.status == SolveStatus::NumericalFailure) {
      if (it == 0) {
        out.status = sol.status;
        return out;
      }
      break;
    }
    v = sol.x;
    out.status = SolveStatus::Optimal;
    out.surrogate_objective = sol.objective;
    if (it > 0 && std::abs(sol.objective - prev_obj) <= data.sca_tol) break;
    prev_obj = sol.objective;
  }
  if (out.status != SolveStatus::Optimal) return out;

  // per-block rounding with randomized repair; blocks are independent
  out.f.resize(data.blocks.size());
  out.min_rank_ratio = 1.0;
  for (size_t b = 0; b < data.blocks.size(); ++b) {
    const RankOne r = cone::rank_one_extract(v[b]);
    out.min_rank_ratio = std::min(out.min_rank_ratio, r.ratio);
    VecC best_f = round_phases(r.w);
    Candidate best_c = score_phases(data.blocks[b], best_f);
    {
      const Candidate start = score_phases(data.blocks[b], init_f[b]);
      if (better(start, best_c)) {
        best_c = start;
        best_f = init_f[b];
      }
    }
    if (r.ratio < kRankOneGood) {
      for (int t = 0; t < data.randomization_draws; ++t) {
        const VecC s = cone::sample_from_gram(v[b], rng);
        const VecC f = round_phases(s);
        const Candidate c = score_phases(data.blocks[b], f);
        if (better(c, best_c)) {
          best_c = c;
          best_f = f;
        }
      }
    }
    out.f[b] = best_f;
  }
  return out;
}

}  // namespace irsee
