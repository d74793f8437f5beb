// SPDX-License-Identifier: Apache-2.0
#include "irsee/metrics.hpp"

#include <cstdio>
#include <limits>
#include <ostream>

namespace irsee {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// |row^H * beam|^2 for every beam, common first.
VecD received_powers(const Eigen::RowVectorXcd& row, const BeamformingSet& beams) {
  VecD p(1 + static_cast<int>(beams.user.size()));
  p(0) = std::norm((row * beams.common)(0));
  for (size_t k = 0; k < beams.user.size(); ++k)
    p(1 + static_cast<int>(k)) = std::norm((row * beams.user[k])(0));
  return p;
}

void rates_from_powers(const VecD& p, int k, double noise_mw, double* common,
                       double* priv) {
  const int users = p.size() - 1;
  double all_private = 0.0;
  for (int i = 1; i <= users; ++i) all_private += p(i);
  const double other = all_private - p(1 + k);
  *common = std::log2(1.0 + p(0) / (all_private + noise_mw));
  *priv = std::log2(1.0 + p(1 + k) / (other + noise_mw));
}

}  // namespace

double BeamformingSet::transmit_power_mw() const {
  double p = common.squaredNorm();
  for (const auto& w : user) p += w.squaredNorm();
  return p;
}

VecC PhaseConfig::extended() const {
  int total = 0;
  for (const auto& fn : f) total += static_cast<int>(fn.size());
  VecC out(total + 1);
  int at = 0;
  for (const auto& fn : f) {
    out.segment(at, fn.size()) = fn;
    at += static_cast<int>(fn.size());
  }
  out(total) = cxd{1.0, 0.0};
  return out;
}

VecC PhaseConfig::extended_one(int n) const {
  const VecC& fn = f[n];
  VecC out(fn.size() + 1);
  out.head(fn.size()) = fn;
  out(fn.size()) = cxd{1.0, 0.0};
  return out;
}

int AssociationMatrix::assigned_surface(int k) const {
  for (int n = 0; n < omega.rows(); ++n)
    if (omega(n, k) == 1) return n;
  return -1;
}

std::vector<int> AssociationMatrix::active_surfaces() const {
  std::vector<int> active;
  for (int n = 0; n < omega.rows(); ++n)
    if (omega.row(n).sum() > 0) active.push_back(n);
  return active;
}

RatesEia rates_eia(const CompositeChannels& composites, const PhaseConfig& phases,
                   const BeamformingSet& beams, double noise_mw) {
  const int users = static_cast<int>(composites.a.size());
  const VecC fbar = phases.extended();
  RatesEia r{VecD(users), VecD(users)};
  for (int k = 0; k < users; ++k) {
    const Eigen::RowVectorXcd row = fbar.adjoint() * composites.a[k];
    const VecD p = received_powers(row, beams);
    rates_from_powers(p, k, noise_mw, &r.common(k), &r.priv(k));
  }
  return r;
}

RatesOia rates_oia(const CompositeChannels& composites, const PhaseConfig& phases,
                   const BeamformingSet& beams, double noise_mw) {
  const int users = static_cast<int>(composites.a.size());
  const int n_irs = static_cast<int>(phases.f.size());
  RatesOia r{MatD(n_irs, users), MatD(n_irs, users)};
  for (int n = 0; n < n_irs; ++n) {
    const VecC ftilde = phases.extended_one(n);
    for (int k = 0; k < users; ++k) {
      const Eigen::RowVectorXcd row = ftilde.adjoint() * pair_composite(composites, n, k);
      const VecD p = received_powers(row, beams);
      rates_from_powers(p, k, noise_mw, &r.common(n, k), &r.priv(n, k));
    }
  }
  return r;
}

double power_total_eia(const BeamformingSet& beams, const SystemConfig& config,
                       bool include_irs) {
  double p = beams.transmit_power_mw() + config.users * config.p_user_mw +
             config.p_ap_mw;
  if (include_irs) p += config.irs_count * config.elements * config.p_element_mw;
  return p;
}

double power_total_oia(const BeamformingSet& beams, const AssociationMatrix& assoc,
                       const SystemConfig& config, bool include_irs) {
  double p = beams.transmit_power_mw() + config.users * config.p_user_mw +
             config.p_ap_mw;
  if (include_irs)
    p += static_cast<double>(assoc.active_surfaces().size()) * config.elements *
         config.p_element_mw;
  return p;
}

double weighted_sum_rate(const SystemConfig& config, const VecD& user_rates) {
  return config.bandwidth_hz * config.priority.dot(user_rates);
}

double weighted_ee(double weighted_rate_bps, double power_mw) {
  return weighted_rate_bps / (power_mw / 1000.0) / 1e6;
}

VecD user_rates_eia(const RatesEia& rates, const CommonRateSplit& split) {
  return split.c + rates.priv;
}

VecD user_rates_oia(const RatesOia& rates, const CommonRateSplit& split,
                    const AssociationMatrix& assoc) {
  const int users = static_cast<int>(rates.priv.cols());
  VecD out(users);
  for (int k = 0; k < users; ++k) {
    const int n = assoc.assigned_surface(k);
    out(k) = split.c(k) + (n >= 0 ? rates.priv(n, k) : 0.0);
  }
  return out;
}

double common_budget_eia(const RatesEia& rates) {
  return rates.common.size() ? rates.common.minCoeff() : 0.0;
}

double common_budget_oia(const RatesOia& rates, const AssociationMatrix& assoc) {
  double budget = kInf;
  for (int k = 0; k < rates.common.cols(); ++k) {
    const int n = assoc.assigned_surface(k);
    if (n >= 0) budget = std::min(budget, rates.common(n, k));
  }
  return budget == kInf ? 0.0 : budget;
}

bool FeasibilityReport::ok(double tol) const { return worst <= tol; }

namespace {

void add_row(FeasibilityReport* rep, std::string name, double violation) {
  rep->rows.push_back({std::move(name), violation, violation <= 0.0});
  rep->worst = std::max(rep->worst, violation);
}

void common_rows(FeasibilityReport* rep, const SystemConfig& config,
                 const PhaseConfig& phases, const BeamformingSet& beams,
                 const CommonRateSplit& split, const VecD& user_rates,
                 double split_budget) {
  add_row(rep, "power_budget", beams.transmit_power_mw() - config.p_max_mw);
  for (int k = 0; k < config.users; ++k)
    add_row(rep, "rate_floor_" + std::to_string(k),
            config.min_rate(k) - user_rates(k));
  add_row(rep, "split_budget", split.total() - split_budget);
  for (int k = 0; k < config.users; ++k)
    add_row(rep, "split_nonneg_" + std::to_string(k), -split.c(k));
  double modulus = 0.0;
  for (const auto& fn : phases.f)
    for (int i = 0; i < fn.size(); ++i)
      modulus = std::max(modulus, std::abs(std::abs(fn(i)) - 1.0));
  add_row(rep, "unit_modulus", modulus);
}

}  // namespace

FeasibilityReport check_feasibility_eia(const SystemConfig& config,
                                        const CompositeChannels& composites,
                                        const PhaseConfig& phases,
                                        const BeamformingSet& beams,
                                        const CommonRateSplit& split) {
  FeasibilityReport rep;
  const RatesEia rates = rates_eia(composites, phases, beams, config.noise_mw);
  common_rows(&rep, config, phases, beams, split, user_rates_eia(rates, split),
              common_budget_eia(rates));
  return rep;
}

FeasibilityReport check_feasibility_oia(const SystemConfig& config,
                                        const CompositeChannels& composites,
                                        const PhaseConfig& phases,
                                        const BeamformingSet& beams,
                                        const CommonRateSplit& split,
                                        const AssociationMatrix& assoc) {
  FeasibilityReport rep;
  const RatesOia rates = rates_oia(composites, phases, beams, config.noise_mw);
  common_rows(&rep, config, phases, beams, split,
              user_rates_oia(rates, split, assoc), common_budget_oia(rates, assoc));
  double binary = 0.0;
  for (int n = 0; n < assoc.omega.rows(); ++n)
    for (int k = 0; k < assoc.omega.cols(); ++k) {
      const double v = assoc.omega(n, k);
      binary = std::max(binary, std::min(std::abs(v), std::abs(v - 1.0)));
    }
  add_row(&rep, "assoc_binary", binary);
  for (int k = 0; k < assoc.omega.cols(); ++k)
    add_row(&rep, "assoc_user_" + std::to_string(k),
            std::abs(assoc.omega.col(k).sum() - 1.0));
  for (int n = 0; n < assoc.omega.rows(); ++n)
    add_row(&rep, "assoc_capacity_" + std::to_string(n),
            static_cast<double>(assoc.omega.row(n).sum() - config.irs_capacity));
  return rep;
}

void dump_feasibility_csv(const FeasibilityReport& report, std::ostream& os) {
  os << "constraint,violation,ok\n";
  char buf[96];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), ",%.12g,%d\n", std::max(row.violation, 0.0),
                  row.ok ? 1 : 0);
    os << row.constraint << buf;
  }
}

}  // namespace irsee
