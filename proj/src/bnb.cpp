// SPDX-License-Identifier: Apache-2.0
//
// Surface-to-user association by branch and bound. Nodes carry ternary
// fixing matrices; bounds come from the box relaxation solved as a conic
// program over scalar blocks, after a constraint-propagation pass that
// substitutes every forced entry (users with a single remaining candidate,
// surfaces at capacity) and a flow presolve that turns forced-tight
// capacity rows into equalities. Substitution rather than pinning keeps
// the relaxation strictly interior wherever it is feasible at all.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <tuple>

#include "irsee/bnb.hpp"
#include "irsee/cone.hpp"

namespace irsee {

namespace {

using FixMat = Eigen::Matrix<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>;

// Fixed-point propagation of the assignment logic. Returns false on a
// conflict (user with no candidate left, surface over capacity).
bool propagate(const AssociationProblem& pb, FixMat& s) {
  const int n_rows = static_cast<int>(s.rows());
  const int n_users = static_cast<int>(s.cols());
  bool changed = true;
  while (changed) {
    changed = false;
    for (int k = 0; k < n_users; ++k) {
      int free_n = -1, free_count = 0;
      bool has_one = false;
      for (int n = 0; n < n_rows; ++n) {
        if (s(n, k) == 1) has_one = true;
        if (s(n, k) == -1) {
          ++free_count;
          free_n = n;
        }
      }
      if (has_one) {
        for (int n = 0; n < n_rows; ++n)
          if (s(n, k) == -1) {
            s(n, k) = 0;
            changed = true;
          }
      } else if (free_count == 0) {
        return false;
      } else if (free_count == 1) {
        s(free_n, k) = 1;
        changed = true;
      }
    }
    for (int n = 0; n < n_rows; ++n) {
      int ones = 0;
      for (int k = 0; k < n_users; ++k) ones += s(n, k) == 1;
      if (ones > pb.capacity) return false;
      if (ones == pb.capacity)
        for (int k = 0; k < n_users; ++k)
          if (s(n, k) == -1) {
            s(n, k) = 0;
            changed = true;
          }
    }
  }
  return true;
}

// Flow presolve on top of propagate(). Whenever the users confined to a
// subset of surfaces exactly match that subset's remaining capacity, every
// row of the subset is forced to fill up completely at every completion of
// the node (the subset's rows jointly cannot hold more, and the confined
// users jointly need all of it). Those capacity rows are recorded as tight
// so the relaxation can carry them as equalities - inequalities that are
// tight at every feasible point have no strict interior and would make the
// interior-point bound misreport the node as infeasible. The same counting
// argument pins every entry of a non-confined user inside the subset to
// zero, and detects genuinely over-subscribed subsets as conflicts.
bool flow_presolve(const AssociationProblem& pb, FixMat& s,
                   std::vector<bool>& tight) {
  const int n_rows = static_cast<int>(s.rows());
  const int n_users = static_cast<int>(s.cols());
  while (true) {
    if (!propagate(pb, s)) return false;
    tight.assign(n_rows, false);

    std::vector<int> res(n_rows, 0);
    for (int n = 0; n < n_rows; ++n) {
      int ones = 0;
      for (int k = 0; k < n_users; ++k) ones += s(n, k) == 1;
      res[n] = pb.capacity - ones;
    }
    std::vector<unsigned> candidates(n_users, 0);  // row bitmask of free entries
    std::vector<bool> undecided(n_users, false);
    for (int k = 0; k < n_users; ++k) {
      bool has_one = false;
      unsigned mask = 0;
      for (int n = 0; n < n_rows; ++n) {
        if (s(n, k) == 1) has_one = true;
        if (s(n, k) == -1) mask |= 1u << n;
      }
      undecided[k] = !has_one;
      candidates[k] = mask;
    }

    bool changed = false;
    for (unsigned sub = 1; sub < (1u << n_rows); ++sub) {
      int cap = 0;
      for (int n = 0; n < n_rows; ++n)
        if (sub & (1u << n)) cap += res[n];
      int confined = 0;
      for (int k = 0; k < n_users; ++k)
        if (undecided[k] && (candidates[k] | sub) == sub) ++confined;
      if (confined > cap) return false;
      if (confined < cap) continue;
      for (int n = 0; n < n_rows; ++n) {
        if (!(sub & (1u << n))) continue;
        if (res[n] > 0) tight[n] = true;
        for (int k = 0; k < n_users; ++k)
          if (s(n, k) == -1 && (candidates[k] | sub) != sub) {
            s(n, k) = 0;
            changed = true;
          }
      }
    }
    if (!changed) return true;
  }
}

double exact_objective(const AssociationProblem& pb, const FixMat& s) {
  double v = 0.0;
  for (int n = 0; n < s.rows(); ++n) {
    bool active = false;
    for (int k = 0; k < s.cols(); ++k)
      if (s(n, k) == 1) {
        v += pb.gain(n, k);
        active = true;
      }
    if (active) v -= pb.penalty;
  }
  return v;
}

}  // namespace

RelaxationResult solve_association_relaxation(const AssociationProblem& problem,
                                              const BnbNode& node) {
  RelaxationResult out;
  const int rows = static_cast<int>(problem.gain.rows());
  const int users = static_cast<int>(problem.gain.cols());
  FixMat s = node.fixed;
  std::vector<bool> tight;
  if (!flow_presolve(problem, s, tight)) return out;

  // index free entries and the rows that still need an activity variable
  MatI var(rows, users);
  var.setConstant(-1);
  cone::ConeProgram p;
  std::vector<std::pair<int, int>> free_list;
  for (int n = 0; n < rows; ++n)
    for (int k = 0; k < users; ++k)
      if (s(n, k) == -1) {
        var(n, k) = p.add_block(
            "w_" + std::to_string(n) + "_" + std::to_string(k), 1);
        free_list.emplace_back(n, k);
      }

  std::vector<int> y_block(rows, -1);
  std::vector<bool> row_committed(rows, false);
  for (int n = 0; n < rows; ++n) {
    bool any_one = false, any_free = false;
    for (int k = 0; k < users; ++k) {
      any_one = any_one || s(n, k) == 1;
      any_free = any_free || s(n, k) == -1;
    }
    row_committed[n] = any_one;
    if (!any_one && any_free)
      y_block[n] = p.add_block("y_" + std::to_string(n), 1);
  }

  if (free_list.empty()) {
    // fully decided by propagation: the bound is the exact value
    out.feasible = true;
    out.value = exact_objective(problem, s);
    out.omega = s.cast<double>();
    return out;
  }

  p.objective.affine = p.zero_affine();
  for (const auto& [n, k] : free_list)
    p.objective.affine.coeff[var(n, k)] = MatC::Constant(1, 1, problem.gain(n, k));
  for (int n = 0; n < rows; ++n) {
    if (row_committed[n]) p.objective.affine.offset -= problem.penalty;
    if (y_block[n] >= 0)
      p.objective.affine.coeff[y_block[n]] = MatC::Constant(1, 1, -problem.penalty);
    for (int k = 0; k < users; ++k)
      if (s(n, k) == 1) p.objective.affine.offset += problem.gain(n, k);
  }

  for (int k = 0; k < users; ++k) {
    bool any_free = false;
    cone::Constraint assign;
    assign.label = "assign_user_" + std::to_string(k);
    assign.sense = cone::Sense::EqualZero;
    assign.expr.affine = p.zero_affine();
    assign.expr.affine.offset = -1.0;
    for (int n = 0; n < rows; ++n)
      if (var(n, k) >= 0) {
        assign.expr.affine.coeff[var(n, k)] = MatC::Constant(1, 1, 1.0);
        any_free = true;
      }
    if (any_free) p.constraints.push_back(std::move(assign));
  }

  for (int n = 0; n < rows; ++n) {
    int ones = 0, free_in_row = 0;
    for (int k = 0; k < users; ++k) {
      ones += s(n, k) == 1;
      free_in_row += s(n, k) == -1;
    }
    if (free_in_row == 0) continue;
    cone::Constraint cap;
    cap.label = "capacity_" + std::to_string(n);
    // rows the flow presolve proved tight become equalities, which the
    // solver handles without needing interior in that direction
    cap.sense = tight[n] ? cone::Sense::EqualZero : cone::Sense::GreaterEqualZero;
    cap.expr.affine = p.zero_affine();
    cap.expr.affine.offset = problem.capacity - ones;
    for (int k = 0; k < users; ++k)
      if (var(n, k) >= 0)
        cap.expr.affine.coeff[var(n, k)] = MatC::Constant(1, 1, -1.0);
    p.constraints.push_back(std::move(cap));

    if (y_block[n] >= 0) {
      cone::Constraint lid;
      lid.label = "activity_cap_" + std::to_string(n);
      lid.expr.affine = p.zero_affine();
      lid.expr.affine.offset = 1.0;
      lid.expr.affine.coeff[y_block[n]] = MatC::Constant(1, 1, -1.0);
      p.constraints.push_back(std::move(lid));
      for (int k = 0; k < users; ++k) {
        if (var(n, k) < 0) continue;
        cone::Constraint epi;
        epi.label = "activity_floor_" + std::to_string(n) + "_" + std::to_string(k);
        epi.expr.affine = p.zero_affine();
        epi.expr.affine.coeff[y_block[n]] = MatC::Constant(1, 1, 1.0);
        epi.expr.affine.coeff[var(n, k)] = MatC::Constant(1, 1, -1.0);
        p.constraints.push_back(std::move(epi));
      }
    }
  }

  cone::SolverOptions opt;
  opt.tol = problem.solver_tol;
  const cone::ConeSolution sol = cone::solve(p, opt);
  if (sol.status != cone::SolveStatus::Optimal &&
      sol.status != cone::SolveStatus::MaxIter)
    return out;

  out.feasible = true;
  out.value = sol.objective;
  out.omega = s.cast<double>();
  for (const auto& [n, k] : free_list)
    out.omega(n, k) =
        std::clamp(sol.x[var(n, k)](0, 0).real(), 0.0, 1.0);
  return out;
}

MatI round_association(const AssociationProblem& problem, const MatD& omega,
                       const BnbNode& node) {
  const int rows = static_cast<int>(problem.gain.rows());
  const int users = static_cast<int>(problem.gain.cols());
  MatI r = MatI::Zero(rows, users);
  for (int k = 0; k < users; ++k) {
    int pick = -1;
    double best = -1.0;
    for (int n = 0; n < rows; ++n) {
      if (node.fixed(n, k) == 0) continue;
      if (node.fixed(n, k) == 1) {
        pick = n;
        break;
      }
      if (omega(n, k) > best + 1e-15) {
        best = omega(n, k);
        pick = n;
      }
    }
    if (pick < 0) return MatI();
    r(pick, k) = 1;
  }

  // capacity repair: peel the cheapest movable user off crowded surfaces
  for (int guard = 0; guard < rows * users + 1; ++guard) {
    int worst_row = -1;
    for (int n = 0; n < rows; ++n)
      if (r.row(n).sum() > problem.capacity) {
        worst_row = n;
        break;
      }
    if (worst_row < 0) break;
    int move_k = -1, move_to = -1;
    double best_loss = 0.0;
    for (int k = 0; k < users; ++k) {
      if (r(worst_row, k) != 1 || node.fixed(worst_row, k) == 1) continue;
      for (int n = 0; n < rows; ++n) {
        if (n == worst_row || node.fixed(n, k) == 0) continue;
        if (r.row(n).sum() >= problem.capacity) continue;
        const double loss = problem.gain(worst_row, k) - problem.gain(n, k);
        if (move_k < 0 || loss < best_loss - 1e-15) {
          move_k = k;
          move_to = n;
          best_loss = loss;
        }
      }
    }
    if (move_k < 0) return MatI();
    r(worst_row, move_k) = 0;
    r(move_to, move_k) = 1;
  }
  for (int n = 0; n < rows; ++n)
    if (r.row(n).sum() > problem.capacity) return MatI();
  return r;
}

std::pair<int, int> pick_branch_entry(const MatD& omega, const MatI& rounded,
                                      const BnbNode& node) {
  std::pair<int, int> best{-1, -1};
  double gap = -1.0;
  for (int n = 0; n < omega.rows(); ++n)
    for (int k = 0; k < omega.cols(); ++k) {
      if (node.fixed(n, k) != -1) continue;
      const double g = std::abs(omega(n, k) - rounded(n, k));
      if (g > gap + 1e-15) {
        gap = g;
        best = {n, k};
      }
    }
  return best;
}

double association_objective(const AssociationProblem& problem, const MatI& omega) {
  double v = 0.0;
  for (int n = 0; n < omega.rows(); ++n) {
    bool active = false;
    for (int k = 0; k < omega.cols(); ++k)
      if (omega(n, k) == 1) {
        v += problem.gain(n, k);
        active = true;
      }
    if (active) v -= problem.penalty;
  }
  return v;
}

BnbResult solve_association(const AssociationProblem& problem) {
  BnbResult res;
  const int rows = static_cast<int>(problem.gain.rows());
  const int users = static_cast<int>(problem.gain.cols());

  std::vector<BnbNode> store;
  std::vector<int> parent;
  auto make_node = [&](const FixMat& fixed, int depth, int par) {
    BnbNode nd;
    nd.fixed = fixed;
    nd.depth = depth;
    nd.id = static_cast<int>(store.size());
    store.push_back(std::move(nd));
    parent.push_back(par);
    return store.back().id;
  };

  const int root = make_node(FixMat::Constant(rows, users, -1), 0, -1);
  {
    const RelaxationResult rel = solve_association_relaxation(problem, store[root]);
    store[root].feasible = rel.feasible;
    store[root].upper = rel.feasible ? rel.value : -1e300;
    store[root].relaxed = rel.omega;
  }
  auto trace_of = [&](const BnbNode& nd, bool pruned) {
    BnbTraceRow row;
    row.id = nd.id;
    row.parent = parent[nd.id];
    row.depth = nd.depth;
    row.fixed_count = static_cast<int>((nd.fixed.array() != -1).count());
    row.upper = nd.upper;
    row.lower = nd.lower;
    row.pruned = pruned;
    return row;
  };
  if (!store[root].feasible) {
    res.trace.push_back(trace_of(store[root], true));
    res.nodes = 1;
    return res;
  }

  const double eps = problem.eps_rel * (1.0 + std::abs(store[root].upper));
  double best = -1e300;
  MatI best_omega;
  auto try_incumbent = [&](int id) {
    const MatI r = round_association(problem, store[id].relaxed, store[id]);
    if (r.size() == 0) return;
    const double v = association_objective(problem, r);
    store[id].lower = v;
    if (v > best) {
      best = v;
      best_omega = r;
    }
  };
  try_incumbent(root);

  // best-first: largest bound first, oldest node on ties
  using QEntry = std::tuple<double, int, int>;  // (upper, -id, id)
  std::priority_queue<QEntry> queue;
  queue.emplace(store[root].upper, -root, root);

  constexpr int kNodeBudget = 5000;
  double open_bound = -1e300;
  while (!queue.empty() && static_cast<int>(store.size()) < kNodeBudget) {
    const auto [upper, neg, id] = queue.top();
    queue.pop();
    if (upper <= best + eps) {
      // best-first: every remaining node is bounded by this one
      res.trace.push_back(trace_of(store[id], true));
      open_bound = std::max(open_bound, upper);
      break;
    }
    const bool integral =
        (store[id].relaxed.array() - store[id].relaxed.array().round())
            .abs()
            .maxCoeff() < 1e-9;
    MatI rounded = round_association(problem, store[id].relaxed, store[id]);
    if (rounded.size() == 0) {
      // repair failed; branch on plain elementwise rounding instead
      rounded = store[id].relaxed.array().round().cast<int>();
    }
    const std::pair<int, int> pick =
        pick_branch_entry(store[id].relaxed, rounded, store[id]);
    if (pick.first < 0 || integral) {
      // integral relaxation (or nothing left to fix): solved exactly
      res.trace.push_back(trace_of(store[id], false));
      continue;
    }
    res.trace.push_back(trace_of(store[id], false));
    for (int bit = 0; bit <= 1; ++bit) {
      FixMat child_fixed = store[id].fixed;
      child_fixed(pick.first, pick.second) = static_cast<std::int8_t>(bit);
      const int child = make_node(child_fixed, store[id].depth + 1, id);
      const RelaxationResult rel = solve_association_relaxation(problem, store[child]);
      store[child].feasible = rel.feasible;
      if (!rel.feasible) {
        store[child].upper = -1e300;
        res.trace.push_back(trace_of(store[child], true));
        continue;
      }
      store[child].upper = rel.value;
      store[child].relaxed = rel.omega;
      try_incumbent(child);
      if (rel.value <= best + eps) {
        res.trace.push_back(trace_of(store[child], true));
        continue;
      }
      queue.emplace(rel.value, -child, child);
    }
  }
  while (!queue.empty()) {
    open_bound = std::max(open_bound, std::get<0>(queue.top()));
    queue.pop();
  }

  res.nodes = static_cast<int>(store.size());
  res.feasible = best_omega.size() != 0;
  res.omega = best_omega;
  res.objective = best;
  res.lower = best;
  res.upper = std::max(best, open_bound);
  return res;
}

void dump_bnb_trace_csv(const BnbResult& result, std::ostream& os) {
  os << "id,parent,depth,fixed,upper,lower,pruned\n";
  for (const auto& row : result.trace)
    os << row.id << ',' << row.parent << ',' << row.depth << ',' << row.fixed_count
       << ',' << row.upper << ',' << row.lower << ',' << (row.pruned ? 1 : 0)
       << '\n';
}

}  // namespace irsee
