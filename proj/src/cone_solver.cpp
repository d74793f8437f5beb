// SPDX-License-Identifier: Apache-2.0
//
// Primal barrier interior-point method over real symmetric PSD blocks.
// Complex Hermitian blocks are embedded as [Re, -Im; Im, Re] once on entry
// and recovered by structured averaging on exit. Newton directions are
// computed in matrix space: the log-det part of the Hessian is inverted in
// closed form (X (.) X), every remaining curvature term is rank one, and
// the Woodbury identity plus a small Schur complement over the equality
// rows finishes the job. This keeps the per-iteration cost at a handful of
// m^3 products instead of the m^6 a dense Hessian would need.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>

#include "irsee/cone.hpp"

namespace irsee::cone {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kSparseMax = 64;       // entry budget for the sparse fast path
constexpr double kCentered = 0.25;   // Newton decrement threshold
constexpr double kFeasTarget = 1e-2; // phase-1 early-exit slack level
constexpr double kFeasEps = 1e-9;    // below this the program is infeasible
// Per-unit-dimension trace cap compactifying the phase-1 stage programs:
// variables that only enter log-bearing rows are otherwise unbounded there
// and would let the barrier grow without ever centering.
constexpr double kPhase1TraceCap = 1e6;

using BlockMats = std::vector<MatD>;

// ------------------------------------------------------------ block math --

BlockMats bzero(const std::vector<int>& dims) {
  BlockMats y;
  y.reserve(dims.size());
  for (int m : dims) y.push_back(MatD::Zero(m, m));
  return y;
}

double bdot(const BlockMats& a, const BlockMats& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].size() == 0 || b[i].size() == 0) continue;
    s += a[i].cwiseProduct(b[i]).sum();
  }
  return s;
}

void baxpy(double alpha, const BlockMats& x, BlockMats& y) {
  for (size_t i = 0; i < x.size(); ++i)
    if (x[i].size() != 0) y[i] += alpha * x[i];
}

double bnorm(const BlockMats& a) { return std::sqrt(std::max(bdot(a, a), 0.0)); }

struct SparseEntry {
  int block, i, j;
  double v;
};

// Affine functional over the embedded blocks. The sparse list mirrors the
// dense coefficients when the entry count is small; it accelerates the
// K^-1 inner products for pinned-entry equality rows.
struct RAffine {
  double offset = 0.0;
  BlockMats coeff;
  std::vector<SparseEntry> sparse;
  bool is_sparse = false;

  double value(const BlockMats& y) const { return offset + bdot(coeff, y); }

  void build_sparse() {
    sparse.clear();
    int count = 0;
    for (size_t b = 0; b < coeff.size(); ++b) {
      if (coeff[b].size() == 0) continue;
      for (int i = 0; i < coeff[b].rows(); ++i)
        for (int j = 0; j < coeff[b].cols(); ++j)
          if (coeff[b](i, j) != 0.0 && ++count > kSparseMax) {
            is_sparse = false;
            return;
          }
    }
    for (size_t b = 0; b < coeff.size(); ++b) {
      if (coeff[b].size() == 0) continue;
      for (int i = 0; i < coeff[b].rows(); ++i)
        for (int j = 0; j < coeff[b].cols(); ++j)
          if (coeff[b](i, j) != 0.0)
            sparse.push_back({static_cast<int>(b), i, j, coeff[b](i, j)});
    }
    is_sparse = true;
  }
};

double sparse_dot(const RAffine& a, const BlockMats& y) {
  double s = 0.0;
  for (const auto& e : a.sparse) s += e.v * y[e.block](e.i, e.j);
  return s;
}

struct RLog {
  double w = 0.0;
  RAffine arg;
};

struct RIneq {
  std::string label;
  RAffine aff;
  std::vector<RLog> logs;
};

struct REq {
  std::string label;
  RAffine aff;  // value == 0
};

struct EProg {
  std::vector<int> dims;
  RAffine obj_aff;
  std::vector<RLog> obj_logs;
  std::vector<RIneq> ineqs;
  std::vector<REq> eqs;

  int theta() const {  // barrier degree
    int t = static_cast<int>(ineqs.size());
    for (int m : dims) t += m;
    return t;
  }
};

// ------------------------------------------------------------ evaluation --

struct EvalState {
  bool in_domain = false;
  double f0 = 0.0;
  double barrier = 0.0;  // sum lndet + sum ln slack
  std::vector<double> slacks;
  std::vector<std::vector<double>> ineq_args;
  std::vector<double> obj_args;
  std::vector<Eigen::LLT<MatD>> llts;

  double phi(double mu) const { return f0 + mu * barrier; }
};

EvalState evaluate(const EProg& p, const BlockMats& y) {
  EvalState st;
  st.llts.reserve(y.size());
  for (const auto& yb : y) {
    st.llts.emplace_back(yb);
    if (st.llts.back().info() != Eigen::Success) return st;
    const auto& l = st.llts.back().matrixLLT();
    for (int i = 0; i < l.rows(); ++i) {
      if (!(l(i, i) > 0.0)) return st;
      st.barrier += 2.0 * std::log(l(i, i));
    }
  }
  st.f0 = p.obj_aff.value(y);
  st.obj_args.reserve(p.obj_logs.size());
  for (const auto& lt : p.obj_logs) {
    const double a = lt.arg.value(y);
    if (!(a > 0.0)) return st;
    st.obj_args.push_back(a);
    st.f0 += lt.w * std::log(a);
  }
  st.slacks.reserve(p.ineqs.size());
  st.ineq_args.resize(p.ineqs.size());
  for (size_t i = 0; i < p.ineqs.size(); ++i) {
    double s = p.ineqs[i].aff.value(y);
    st.ineq_args[i].reserve(p.ineqs[i].logs.size());
    for (const auto& lt : p.ineqs[i].logs) {
      const double a = lt.arg.value(y);
      if (!(a > 0.0)) return st;
      st.ineq_args[i].push_back(a);
      s += lt.w * std::log(a);
    }
    if (!(s > 0.0)) return st;
    st.slacks.push_back(s);
  }
  st.in_domain = true;
  return st;
}

// --------------------------------------------------------------- newton --

struct RankTerm {
  BlockMats v;
  double c = 0.0;
};

struct CoreOptions {
  double tol = 1e-7;
  int max_stage_newton = 60;
  double divergence = 1e15;
};

struct CoreOut {
  SolveStatus status = SolveStatus::NumericalFailure;
  double f0 = 0.0;
  double mu = 0.0;
  int newtons = 0;
  double decrement = 0.0;
  double grad_residual = 0.0;
  std::vector<StageRecord> path;
};

// One barrier solve: centers at decreasing mu until the certified gap
// mu * theta drops below tol * (1 + |f0|), the early-stop predicate fires,
// or the Newton budget runs out.
CoreOut barrier_max(const EProg& p, BlockMats& y, const CoreOptions& opt, int* budget,
                    const std::function<bool(double)>& stop_early) {
  CoreOut out;
  const int n_eq = static_cast<int>(p.eqs.size());
  const double theta = p.theta();

  EvalState st = evaluate(p, y);
  if (!st.in_domain) return out;  // caller guarantees a strictly feasible start

  // Initial barrier weight balances the objective and barrier gradients.
  double mu;
  {
    BlockMats gf = bzero(p.dims);
    baxpy(1.0, p.obj_aff.coeff, gf);
    for (size_t j = 0; j < p.obj_logs.size(); ++j)
      baxpy(p.obj_logs[j].w / st.obj_args[j], p.obj_logs[j].arg.coeff, gf);
    BlockMats gb = bzero(p.dims);
    for (size_t b = 0; b < y.size(); ++b)
      gb[b] = st.llts[b].solve(MatD::Identity(p.dims[b], p.dims[b]));
    for (size_t i = 0; i < p.ineqs.size(); ++i) {
      BlockMats gs = bzero(p.dims);
      baxpy(1.0, p.ineqs[i].aff.coeff, gs);
      for (size_t j = 0; j < p.ineqs[i].logs.size(); ++j)
        baxpy(p.ineqs[i].logs[j].w / st.ineq_args[i][j], p.ineqs[i].logs[j].arg.coeff, gs);
      baxpy(1.0 / st.slacks[i], gs, gb);
    }
    const double gfn = bnorm(gf), gbn = bnorm(gb);
    mu = std::clamp(gfn / std::max(gbn, 1e-12), 1e-4, 1e2);
    if (gfn == 0.0) mu = 1e-2;
  }

  std::vector<double> nu(n_eq, 0.0);
  while (*budget > 0) {
    int stage_steps = 0;
    double lambda = kInf;
    // ----- centering at fixed mu
    while (*budget > 0 && stage_steps < opt.max_stage_newton) {
      // gradient of phi and the rank-one curvature terms
      BlockMats g = bzero(p.dims);
      baxpy(1.0, p.obj_aff.coeff, g);
      std::vector<RankTerm> terms;
      terms.reserve(p.obj_logs.size() + 2 * p.ineqs.size());
      for (size_t j = 0; j < p.obj_logs.size(); ++j) {
        const double a = st.obj_args[j];
        baxpy(p.obj_logs[j].w / a, p.obj_logs[j].arg.coeff, g);
        const double c = p.obj_logs[j].w / (a * a);
        if (c > 1e-18) terms.push_back({p.obj_logs[j].arg.coeff, c});
      }
      for (size_t b = 0; b < y.size(); ++b)
        g[b] += mu * st.llts[b].solve(MatD::Identity(p.dims[b], p.dims[b]));
      for (size_t i = 0; i < p.ineqs.size(); ++i) {
        BlockMats gs = bzero(p.dims);
        baxpy(1.0, p.ineqs[i].aff.coeff, gs);
        for (size_t j = 0; j < p.ineqs[i].logs.size(); ++j) {
          const double a = st.ineq_args[i][j];
          baxpy(p.ineqs[i].logs[j].w / a, p.ineqs[i].logs[j].arg.coeff, gs);
          const double c = mu * p.ineqs[i].logs[j].w / (st.slacks[i] * a * a);
          if (c > 1e-18) terms.push_back({p.ineqs[i].logs[j].arg.coeff, c});
        }
        const double s = st.slacks[i];
        baxpy(mu / s, gs, g);
        terms.push_back({std::move(gs), mu / (s * s)});
      }

      // K^-1 v = (1/mu) Y v Y blockwise
      auto kinv = [&](const BlockMats& v) {
        BlockMats o = bzero(p.dims);
        for (size_t b = 0; b < y.size(); ++b)
          if (v[b].size() != 0) o[b] = (y[b] * v[b] * y[b]) / mu;
        return o;
      };
      auto kinv_sparse_dot = [&](const RAffine& l, const RAffine& m) {
        double s = 0.0;
        for (const auto& el : l.sparse)
          for (const auto& em : m.sparse)
            if (el.block == em.block)
              s += el.v * em.v * y[el.block](el.i, em.i) * y[el.block](em.j, el.j);
        return s / mu;
      };

      const int n_terms = static_cast<int>(terms.size());
      std::vector<BlockMats> t_r(n_terms);
      for (int r = 0; r < n_terms; ++r) t_r[r] = kinv(terms[r].v);
      Eigen::LDLT<MatD> mcap;
      if (n_terms > 0) {
        MatD m(n_terms, n_terms);
        for (int r = 0; r < n_terms; ++r) {
          for (int s = r; s < n_terms; ++s) {
            m(r, s) = bdot(terms[r].v, t_r[s]);
            m(s, r) = m(r, s);
          }
          m(r, r) += 1.0 / terms[r].c;
        }
        mcap.compute(m);
      }
      auto hinv = [&](const BlockMats& b) {
        BlockMats t = kinv(b);
        if (n_terms == 0) return t;
        VecD q(n_terms);
        for (int r = 0; r < n_terms; ++r) q(r) = bdot(terms[r].v, t);
        const VecD z = mcap.solve(q);
        for (int r = 0; r < n_terms; ++r) baxpy(-z(r), t_r[r], t);
        return t;
      };

      BlockMats u = hinv(g);
      BlockMats delta;
      if (n_eq > 0) {
        // Schur system over the equality rows
        MatD s_mat(n_eq, n_eq);
        VecD rhs(n_eq);
        std::vector<VecD> q_l(n_eq);
        std::vector<BlockMats> ke_dense;
        for (int l = 0; l < n_eq; ++l) {
          const RAffine& el = p.eqs[l].aff;
          VecD q(n_terms);
          if (el.is_sparse) {
            for (int r = 0; r < n_terms; ++r) q(r) = sparse_dot(el, t_r[r]);
          } else {
            BlockMats ke = kinv(el.coeff);
            for (int r = 0; r < n_terms; ++r) q(r) = bdot(terms[r].v, ke);
            ke_dense.push_back(std::move(ke));
          }
          q_l[l] = std::move(q);
        }
        size_t dense_at = 0;
        std::vector<int> dense_idx(n_eq, -1);
        for (int l = 0; l < n_eq; ++l)
          if (!p.eqs[l].aff.is_sparse) dense_idx[l] = static_cast<int>(dense_at++);
        for (int l = 0; l < n_eq; ++l) {
          for (int m2 = l; m2 < n_eq; ++m2) {
            double kk;
            const RAffine& el = p.eqs[l].aff;
            const RAffine& em = p.eqs[m2].aff;
            if (el.is_sparse && em.is_sparse)
              kk = kinv_sparse_dot(el, em);
            else if (em.is_sparse)
              kk = sparse_dot(em, ke_dense[dense_idx[l]]);
            else
              kk = bdot(el.coeff, ke_dense[dense_idx[m2]]);
            double corr = 0.0;
            if (n_terms > 0) corr = q_l[l].dot(mcap.solve(q_l[m2]));
            s_mat(l, m2) = kk - corr;
            s_mat(m2, l) = s_mat(l, m2);
          }
          rhs(l) = p.eqs[l].aff.is_sparse ? sparse_dot(p.eqs[l].aff, u)
                                          : bdot(p.eqs[l].aff.coeff, u);
          rhs(l) += p.eqs[l].aff.value(y);  // residual term
        }
        Eigen::LDLT<MatD> sf(s_mat);
        if (sf.info() != Eigen::Success || !sf.isPositive()) {
          s_mat.diagonal().array() += 1e-12 * (1.0 + s_mat.diagonal().cwiseAbs().maxCoeff());
          sf.compute(s_mat);
        }
        const VecD nu_v = sf.solve(rhs);
        for (int l = 0; l < n_eq; ++l) nu[l] = nu_v(l);
        BlockMats combo = bzero(p.dims);
        for (int l = 0; l < n_eq; ++l) baxpy(nu_v(l), p.eqs[l].aff.coeff, combo);
        delta = hinv(combo);
        for (size_t b = 0; b < delta.size(); ++b) delta[b] = u[b] - delta[b];
      } else {
        delta = u;
      }

      double lambda2 = bdot(delta, g);
      for (int l = 0; l < n_eq; ++l) lambda2 += nu[l] * p.eqs[l].aff.value(y);
      // decrement in the self-concordant scale t*f0 + barrier (t = 1/mu);
      // phi = mu * (t*f0 + barrier), so its raw decrement shrinks with mu
      lambda = std::sqrt(std::max(lambda2, 0.0) / mu);

      const double dir = bdot(g, delta);
      if (lambda <= kCentered) break;

      // backtracking line search on phi
      double alpha = 1.0;
      bool moved = false;
      const double phi0 = st.phi(mu);
      while (alpha > 1e-14) {
        BlockMats ytry = y;
        baxpy(alpha, delta, ytry);
        EvalState st_try = evaluate(p, ytry);
        if (st_try.in_domain && st_try.phi(mu) >= phi0 + 0.01 * alpha * dir) {
          y = std::move(ytry);
          st = std::move(st_try);
          moved = true;
          break;
        }
        alpha *= 0.5;
      }
      ++stage_steps;
      ++out.newtons;
      --(*budget);
      if (std::getenv("IRSEE_TRACE"))
        std::fprintf(stderr, "  newton mu=%.3e f0=%.6e lam=%.3e dir=%.3e alpha=%.3e moved=%d\n",
                     mu, st.f0, lambda, dir, alpha, moved ? 1 : 0);
      if (!moved) break;  // stalled; treat current point as centered
      if (std::abs(st.f0) > opt.divergence || bnorm(y) > opt.divergence) {
        out.status = SolveStatus::NumericalFailure;
        out.f0 = st.f0;
        out.mu = mu;
        return out;
      }
      if (stop_early && stop_early(st.f0)) break;
    }

    out.path.push_back({mu, st.f0, st.f0 + mu * theta, stage_steps});
    out.decrement = lambda;
    out.f0 = st.f0;
    out.mu = mu;
    if (std::getenv("IRSEE_TRACE"))
      std::fprintf(stderr, "stage mu=%.3e f0=%.6e lam=%.3e steps=%d\n", mu, st.f0,
                   lambda, stage_steps);
    if (stop_early && stop_early(st.f0)) {
      out.status = SolveStatus::Optimal;
      break;
    }
    if (mu * theta <= opt.tol * (1.0 + std::abs(st.f0))) {
      out.status = SolveStatus::Optimal;
      break;
    }
    if (*budget <= 0) {
      out.status = SolveStatus::MaxIter;
      break;
    }
    // Adaptive reduction: cheap centering allows aggressive cuts.
    const double factor = stage_steps <= 3 ? 0.05 : (stage_steps <= 8 ? 0.2 : 0.5);
    mu *= factor;
  }
  if (out.status == SolveStatus::NumericalFailure)
    out.status = SolveStatus::MaxIter;  // loop exit here means the budget ran dry

  // the decrement is the affine-invariant stationarity measure at exit
  out.grad_residual = out.decrement;
  return out;
}

// ------------------------------------------------------------- embedding --

RAffine embed_affine(const AffineExpr& a, const std::vector<BlockSpec>& blocks) {
  RAffine r;
  r.offset = a.offset;
  r.coeff.resize(blocks.size());
  for (size_t b = 0; b < blocks.size(); ++b)
    if (a.coeff[b].size() != 0) r.coeff[b] = 0.5 * embed_complex(a.coeff[b]);
  r.build_sparse();
  return r;
}

struct Embedded {
  EProg prog;
  std::vector<std::string> ineq_labels;
};

Embedded embed_program(const ConeProgram& cp) {
  Embedded em;
  EProg& p = em.prog;
  for (const auto& b : cp.blocks) p.dims.push_back(2 * b.dim);
  p.obj_aff = embed_affine(cp.objective.affine, cp.blocks);
  for (const auto& lt : cp.objective.logs)
    p.obj_logs.push_back({lt.weight, embed_affine(lt.arg, cp.blocks)});
  for (const auto& c : cp.constraints) {
    if (c.sense == Sense::EqualZero) {
      p.eqs.push_back({c.label, embed_affine(c.expr.affine, cp.blocks)});
      continue;
    }
    RIneq iq;
    iq.label = c.label;
    iq.aff = embed_affine(c.expr.affine, cp.blocks);
    for (const auto& lt : c.expr.logs)
      iq.logs.push_back({lt.weight, embed_affine(lt.arg, cp.blocks)});
    p.ineqs.push_back(std::move(iq));
    em.ineq_labels.push_back(c.label);
  }
  for (const auto& f : cp.fixed) {
    const int d = cp.blocks[f.block].dim;
    auto pin = [&](const MatC& h, double target, const char* tag) {
      AffineExpr a;
      a.coeff.resize(cp.blocks.size());
      a.coeff[f.block] = h;
      a.offset = -target;
      REq eq{std::string("pin_") + tag + ":" + cp.blocks[f.block].name + "(" +
                 std::to_string(f.row) + "," + std::to_string(f.col) + ")",
             embed_affine(a, cp.blocks)};
      p.eqs.push_back(std::move(eq));
    };
    MatC h = MatC::Zero(d, d);
    if (f.row == f.col) {
      h(f.row, f.col) = 1.0;
      pin(h, f.value.real(), "re");
    } else {
      h(f.row, f.col) = 0.5;
      h(f.col, f.row) = 0.5;
      pin(h, f.value.real(), "re");
      h.setZero();
      h(f.row, f.col) = cxd(0.0, 0.5);
      h(f.col, f.row) = cxd(0.0, -0.5);
      // tr(h X) = Im X(row, col) for Hermitian X
      pin(h, f.value.imag(), "im");
    }
  }
  return em;
}

// --------------------------------------------------------------- phase 1 --

// Least-norm point on the equality manifold around the identity start.
bool equality_start(const EProg& p, BlockMats& y, double* residual) {
  y = bzero(p.dims);
  for (size_t b = 0; b < y.size(); ++b) y[b].setIdentity();
  const int n_eq = static_cast<int>(p.eqs.size());
  if (n_eq == 0) {
    *residual = 0.0;
    return true;
  }
  MatD gram(n_eq, n_eq);
  VecD rhs(n_eq);
  for (int l = 0; l < n_eq; ++l) {
    rhs(l) = -p.eqs[l].aff.value(y);
    for (int m = l; m < n_eq; ++m) {
      gram(l, m) = bdot(p.eqs[l].aff.coeff, p.eqs[m].aff.coeff);
      gram(m, l) = gram(l, m);
    }
  }
  Eigen::CompleteOrthogonalDecomposition<MatD> cod(gram);
  const VecD alpha = cod.solve(rhs);
  for (int l = 0; l < n_eq; ++l) baxpy(alpha(l), p.eqs[l].aff.coeff, y);
  double res = 0.0;
  for (int l = 0; l < n_eq; ++l) res = std::max(res, std::abs(p.eqs[l].aff.value(y)));
  *residual = res;
  return res <= 1e-6 * (1.0 + bnorm(y));
}

// Appends a slack slot to an affine functional: value becomes
// value(Y) + s_coeff * (s0 + sigma).
RAffine with_slack(const RAffine& a, double s_coeff, double s0) {
  RAffine r = a;
  r.coeff.push_back(s_coeff == 0.0 ? MatD() : MatD::Constant(1, 1, s_coeff));
  r.offset += s_coeff * s0;
  r.build_sparse();
  return r;
}

struct Phase1Out {
  bool feasible = false;
  BlockMats y;
  std::string blocking;  // label of the most violated family when infeasible
  int newtons = 0;
};

// Compactification rows for the stage programs: generous trace bounds that
// keep the stage barrier bounded along directions none of its rows touch.
void add_trace_caps(EProg& prog, const std::vector<int>& base_dims) {
  for (size_t b = 0; b < base_dims.size(); ++b) {
    RAffine r;
    r.offset = kPhase1TraceCap * base_dims[b];
    r.coeff.assign(prog.dims.size(), MatD());
    r.coeff[b] = -MatD::Identity(base_dims[b], base_dims[b]);
    r.build_sparse();
    prog.ineqs.push_back({"phase1_bound", std::move(r), {}});
  }
}

// Collects every affine quantity that must end up strictly positive:
// affine-only inequality slacks and all log arguments.
void collect_affine_positives(const EProg& p, std::vector<const RAffine*>* out,
                              std::vector<std::string>* labels) {
  for (const auto& iq : p.ineqs) {
    if (iq.logs.empty()) {
      out->push_back(&iq.aff);
      labels->push_back(iq.label);
    }
    for (const auto& lt : iq.logs) {
      out->push_back(&lt.arg);
      labels->push_back(iq.label + ":arg");
    }
  }
  for (const auto& lt : p.obj_logs) {
    out->push_back(&lt.arg);
    labels->push_back("objective:arg");
  }
}

Phase1Out phase1(const EProg& p, const CoreOptions& opt, int* budget) {
  Phase1Out out;
  double eq_res = 0.0;
  if (!equality_start(p, out.y, &eq_res)) {
    double worst = 0.0;
    for (const auto& e : p.eqs) {
      const double v = std::abs(e.aff.value(out.y));
      if (v > worst) {
        worst = v;
        out.blocking = e.label;
      }
    }
    return out;
  }

  std::vector<const RAffine*> pos;
  std::vector<std::string> pos_labels;
  collect_affine_positives(p, &pos, &pos_labels);

  auto raw_min = [&](const BlockMats& y) {
    double m = kInf;
    for (const auto* a : pos) m = std::min(m, a->value(y));
    for (size_t b = 0; b < y.size(); ++b) {
      Eigen::SelfAdjointEigenSolver<MatD> eig(y[b], Eigen::EigenvaluesOnly);
      m = std::min(m, eig.eigenvalues().minCoeff());
    }
    return m;
  };

  // ----- stage A: push affine slacks, log arguments, and eigenvalues up
  double rmin = raw_min(out.y);
  if (rmin <= kFeasTarget) {
    const double margin = 0.1 * std::max(1.0, std::abs(rmin));
    const double s_init = std::min(rmin, 0.5) - margin;
    const double s0 = s_init - 1.0;

    EProg a;
    a.dims = p.dims;
    a.dims.push_back(1);
    auto lift = [&](const RAffine& r, double extra_s) {
      double trsum = 0.0;
      for (size_t b = 0; b < r.coeff.size(); ++b)
        if (r.coeff[b].size() != 0) trsum += r.coeff[b].trace();
      return with_slack(r, trsum + extra_s, s0);
    };
    // objective: maximize s = s0 + sigma
    {
      RAffine oa;
      oa.offset = s0;
      oa.coeff.assign(p.dims.size(), MatD());
      oa.coeff.push_back(MatD::Constant(1, 1, 1.0));
      oa.build_sparse();
      a.obj_aff = oa;
    }
    for (size_t i = 0; i < pos.size(); ++i)
      a.ineqs.push_back({pos_labels[i], lift(*pos[i], -1.0), {}});
    {  // cap s <= 1
      RAffine cap;
      cap.offset = 1.0 - s0;
      cap.coeff.assign(p.dims.size(), MatD());
      cap.coeff.push_back(MatD::Constant(1, 1, -1.0));
      cap.build_sparse();
      a.ineqs.push_back({"phase1_cap", cap, {}});
    }
    add_trace_caps(a, p.dims);
    for (const auto& e : p.eqs) a.eqs.push_back({e.label, lift(e.aff, 0.0)});

    BlockMats z = out.y;
    for (size_t b = 0; b < z.size(); ++b)
      z[b] -= s_init * MatD::Identity(p.dims[b], p.dims[b]);
    z.push_back(MatD::Constant(1, 1, 1.0));  // sigma = 1 => s = s_init

    CoreOptions popt = opt;
    popt.tol = 1e-9;
    CoreOut res = barrier_max(a, z, popt, budget,
                              [&](double s) { return s >= kFeasTarget; });
    out.newtons += res.newtons;
    const double s_star = res.f0;
    const double s_val = s0 + z.back()(0, 0);
    for (size_t b = 0; b < out.y.size(); ++b)
      out.y[b] = z[b] + s_val * MatD::Identity(p.dims[b], p.dims[b]);
    if (res.status == SolveStatus::NumericalFailure || s_star <= kFeasEps) {
      // report the family that refuses to budge
      double worst = -kInf;
      for (size_t i = 0; i < pos.size(); ++i) {
        const double v = -pos[i]->value(out.y);
        if (v > worst) {
          worst = v;
          out.blocking = pos_labels[i];
        }
      }
      for (size_t b = 0; b < out.y.size(); ++b) {
        Eigen::SelfAdjointEigenSolver<MatD> eig(out.y[b], Eigen::EigenvaluesOnly);
        if (-eig.eigenvalues().minCoeff() > worst) {
          worst = -eig.eigenvalues().minCoeff();
          out.blocking = "psd_block_" + std::to_string(b);
        }
      }
      if (s_star <= kFeasEps) return out;
    }
  }

  // ----- stage B: lift log-bearing inequality values when they start negative
  auto log_ineq_value = [&](const RIneq& iq, const BlockMats& y) {
    double v = iq.aff.value(y);
    for (const auto& lt : iq.logs) v += lt.w * std::log(std::max(lt.arg.value(y), 1e-300));
    return v;
  };
  double min_h = kInf;
  for (const auto& iq : p.ineqs)
    if (!iq.logs.empty()) min_h = std::min(min_h, log_ineq_value(iq, out.y));
  const bool need_b = min_h <= 1e-8 && min_h != kInf;

  if (need_b) {
    const double margin = 0.1 * std::max(1.0, std::abs(min_h));
    const double s_init = std::min(min_h, 0.5) - margin;
    const double s0 = s_init - 1.0;
    EProg bprog;
    bprog.dims = p.dims;
    bprog.dims.push_back(1);
    {
      RAffine oa;
      oa.offset = s0;
      oa.coeff.assign(p.dims.size(), MatD());
      oa.coeff.push_back(MatD::Constant(1, 1, 1.0));
      oa.build_sparse();
      bprog.obj_aff = oa;
    }
    auto pad = [&](const RAffine& r, double s_coeff) { return with_slack(r, s_coeff, s0); };
    for (const auto& iq : p.ineqs) {
      if (iq.logs.empty()) {
        // weak floor: keep the constraint strictly satisfied without pinning
        // its magnitude, so raising the log-bearing rows stays unrestricted
        RAffine floor_aff = pad(iq.aff, 0.0);
        floor_aff.offset -= std::min(1e-6, 0.5 * iq.aff.value(out.y));
        bprog.ineqs.push_back({iq.label, floor_aff, {}});
        continue;
      }
      RIneq lifted;
      lifted.label = iq.label;
      lifted.aff = pad(iq.aff, -1.0);
      for (const auto& lt : iq.logs) {
        // keep log arguments comfortably positive while s2 rises
        RAffine floor_arg = pad(lt.arg, 0.0);
        floor_arg.offset -= std::min(1e-6, 0.5 * lt.arg.value(out.y));
        bprog.ineqs.push_back({iq.label + ":arg_floor", floor_arg, {}});
        lifted.logs.push_back({lt.w, pad(lt.arg, 0.0)});
      }
      bprog.ineqs.push_back(std::move(lifted));
    }
    for (const auto& lt : p.obj_logs) {
      RAffine floor_arg = pad(lt.arg, 0.0);
      floor_arg.offset -= std::min(1e-6, 0.5 * lt.arg.value(out.y));
      bprog.ineqs.push_back({"objective:arg_floor", floor_arg, {}});
    }
    {
      RAffine cap;
      cap.offset = 1.0 - s0;
      cap.coeff.assign(p.dims.size(), MatD());
      cap.coeff.push_back(MatD::Constant(1, 1, -1.0));
      cap.build_sparse();
      bprog.ineqs.push_back({"phase1_cap", cap, {}});
    }
    add_trace_caps(bprog, p.dims);
    for (const auto& e : p.eqs) bprog.eqs.push_back({e.label, pad(e.aff, 0.0)});

    BlockMats z = out.y;
    z.push_back(MatD::Constant(1, 1, 1.0));
    CoreOptions popt = opt;
    popt.tol = 1e-9;
    CoreOut res = barrier_max(bprog, z, popt, budget,
                              [&](double s) { return s >= kFeasTarget; });
    out.newtons += res.newtons;
    for (size_t b = 0; b < out.y.size(); ++b) out.y[b] = z[b];
    if (res.status == SolveStatus::NumericalFailure || res.f0 <= kFeasEps) {
      double worst = -kInf;
      for (const auto& iq : p.ineqs)
        if (!iq.logs.empty() && -log_ineq_value(iq, out.y) > worst) {
          worst = -log_ineq_value(iq, out.y);
          out.blocking = iq.label;
        }
      if (res.f0 <= kFeasEps) return out;
    }
  }

  out.feasible = true;
  return out;
}

}  // namespace

// ------------------------------------------------------------------ solve --

ConeSolution solve(const ConeProgram& program, const SolverOptions& options) {
  program.validate();
  ConeSolution sol;
  Embedded em = embed_program(program);
  EProg& p = em.prog;

  int budget = options.max_newton;
  CoreOptions copt;
  copt.tol = options.tol;

  Phase1Out ph1 = phase1(p, copt, &budget);
  sol.newton_iterations = ph1.newtons;
  if (!ph1.feasible) {
    sol.status = SolveStatus::Infeasible;
    sol.infeasible_family = ph1.blocking;
    return sol;
  }

  BlockMats y = std::move(ph1.y);
  CoreOut res = barrier_max(p, y, copt, &budget, nullptr);
  sol.newton_iterations += res.newtons;
  sol.status = res.status;
  sol.mu_final = res.mu;
  sol.dual_residual = res.grad_residual;
  if (options.collect_path) sol.path = std::move(res.path);

  // Recover the complex blocks and report exact values on them.
  sol.x.resize(program.blocks.size());
  for (size_t b = 0; b < program.blocks.size(); ++b)
    sol.x[b] = recover_hermitian(y[b]);
  sol.objective = program.objective.value(sol.x);
  // gap certificate with the standard inexact-centering correction
  const double lam = std::min(res.decrement, 0.9);
  const double theta = p.theta();
  sol.dual_bound =
      sol.objective + res.mu * (theta + std::sqrt(theta) * lam / (1.0 - lam));
  double prim = 0.0;
  for (const auto& c : program.constraints) {
    const double v = c.expr.value(sol.x);
    if (c.sense == Sense::EqualZero)
      prim = std::max(prim, std::abs(v));
    else
      prim = std::max(prim, -v);
  }
  for (const auto& f : program.fixed)
    prim = std::max(prim, std::abs(sol.x[f.block](f.row, f.col) - f.value));
  sol.primal_residual = prim;
  return sol;
}

}  // namespace irsee::cone
