// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irsee/scenario.hpp"

namespace irsee {

// Transmit beamformers: one common stream vector plus one per user, each of
// length M.
struct BeamformingSet {
  VecC common;
  std::vector<VecC> user;

  double transmit_power_mw() const;
};

// Unit-modulus reflection coefficients, one vector of length L per surface.
struct PhaseConfig {
  std::vector<VecC> f;

  // Stacked [f_1; ...; f_N; 1] used against CompositeChannels::a.
  VecC extended() const;
  // Extended vector for a single surface: [f_n; 1].
  VecC extended_one(int n) const;
};

// Nonnegative shares C_k of the common stream rate.
struct CommonRateSplit {
  VecD c;
  double total() const { return c.sum(); }
};

// Binary surface-to-user assignment, omega(n, k) in {0, 1}. Column sums are
// 1 (every user served by exactly one surface), row sums at most the
// capacity.
struct AssociationMatrix {
  MatI omega;

  int assigned_surface(int k) const;        // -1 when column k is empty
  std::vector<int> active_surfaces() const; // surfaces serving >= 1 user
};

// Rates in bit/s/Hz. common(k) is the rate at which user k can decode the
// common stream; priv(k) the rate of its private stream after the common
// stream is removed.
struct RatesEia {
  VecD common;
  VecD priv;
};

// Per-pair rates for the opportunistic scheme: entry (n, k) is the rate
// user k would see if served by surface n (all pairs are filled, active or
// not, since the association step scores every candidate pair).
struct RatesOia {
  MatD common;
  MatD priv;
};

RatesEia rates_eia(const CompositeChannels& composites, const PhaseConfig& phases,
                   const BeamformingSet& beams, double noise_mw);

RatesOia rates_oia(const CompositeChannels& composites, const PhaseConfig& phases,
                   const BeamformingSet& beams, double noise_mw);

// Total consumed power in mW: transmit + per-user static + access point
// static + reflecting element consumption. The element term covers all N*L
// elements in the exhaustive scheme; with an association only surfaces that
// serve at least one user burn element power; with include_irs false the
// term is dropped entirely (no surfaces deployed).
double power_total_eia(const BeamformingSet& beams, const SystemConfig& config,
                       bool include_irs = true);
double power_total_oia(const BeamformingSet& beams, const AssociationMatrix& assoc,
                       const SystemConfig& config, bool include_irs = true);

// Weighted sum rate in bit/s: bandwidth * sum_k priority_k * user_rate_k.
double weighted_sum_rate(const SystemConfig& config, const VecD& user_rates);

// Energy efficiency in Mbit/J given a weighted sum rate in bit/s and a power
// in mW; megabit per joule is the reporting unit for every efficiency figure.
double weighted_ee(double weighted_rate_bps, double power_mw);

// Per-user total rates: C_k + private rate (exhaustive), or C_k + private
// rate through the assigned surface (opportunistic).
VecD user_rates_eia(const RatesEia& rates, const CommonRateSplit& split);
VecD user_rates_oia(const RatesOia& rates, const CommonRateSplit& split,
                    const AssociationMatrix& assoc);

// Largest share budget the split must respect: min over users of the common
// rate (exhaustive), or min over served pairs (opportunistic).
double common_budget_eia(const RatesEia& rates);
double common_budget_oia(const RatesOia& rates, const AssociationMatrix& assoc);

struct FeasibilityRow {
  std::string constraint;
  double violation = 0.0;  // max(0, amount by which the constraint is broken)
  bool ok = true;
};

struct FeasibilityReport {
  std::vector<FeasibilityRow> rows;
  double worst = 0.0;
  bool ok(double tol) const;
};

// Checks every constraint family of the respective design problem: power
// budget, rate floors, split validity, unit modulus, and (opportunistic)
// association shape. Violations are reported in natural units.
FeasibilityReport check_feasibility_eia(const SystemConfig& config,
                                        const CompositeChannels& composites,
                                        const PhaseConfig& phases,
                                        const BeamformingSet& beams,
                                        const CommonRateSplit& split);
FeasibilityReport check_feasibility_oia(const SystemConfig& config,
                                        const CompositeChannels& composites,
                                        const PhaseConfig& phases,
                                        const BeamformingSet& beams,
                                        const CommonRateSplit& split,
                                        const AssociationMatrix& assoc);

void dump_feasibility_csv(const FeasibilityReport& report, std::ostream& os);

}  // namespace irsee
