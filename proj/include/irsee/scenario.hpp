// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "irsee/common.hpp"

namespace irsee {

// Geometry of the deployment: one access point, K single-antenna users
// drawn uniformly from a disc, N reflecting surfaces drawn uniformly from
// another disc. Coordinates in meters.
struct GeometryConfig {
  Eigen::Vector2d ap{0.0, 0.0};
  Eigen::Vector2d user_center{200.0, 30.0};
  double user_radius = 20.0;
  Eigen::Vector2d irs_center{100.0, 30.0};
  double irs_radius = 20.0;
};

struct SystemConfig {
  int antennas = 4;       // M, transmit antennas at the access point
  int users = 4;          // K
  int irs_count = 4;      // N, number of reflecting surfaces
  int elements = 30;      // L, reflecting elements per surface

  double bandwidth_hz = 180.0e3;
  double p_max_mw = dbm_to_mw(34.0);     // transmit power budget
  double p_user_mw = dbm_to_mw(10.0);    // static power per user terminal
  double p_ap_mw = dbm_to_mw(37.0);      // static power at the access point
  double p_element_mw = 6.0;             // per reflecting element
  double noise_mw = dbm_to_mw(-94.0);    // receiver noise power

  VecD priority;   // upsilon_k, weight of user k in the objective (default 1)
  VecD min_rate;   // per-user rate floor in bit/s/Hz (default 0)
  int irs_capacity = 2;  // max users one surface may serve in the
                         // opportunistic scheme

  double dinkelbach_tol = 1e-3;  // stationarity bar on the fractional
                                 // parameter, in Mbit/J (the efficiency unit)
  int dinkelbach_max_iter = 50;
  double sca_tol = 1e-5;
  int sca_max_iter = 30;
  double solver_tol = 1e-7;

  GeometryConfig geometry;

  // Fills priority/min_rate with defaults when left empty and checks basic
  // sanity (positive dimensions, powers, solver size guardrail). Throws
  // std::invalid_argument on violation.
  void finalize();
};

struct Placement {
  Eigen::Vector2d ap;
  std::vector<Eigen::Vector2d> users;  // K
  std::vector<Eigen::Vector2d> irss;   // N
};

// Fading realizations for every link. Entry scaling: each coefficient is
// complex Gaussian with mean power 10^(-PL/10) for that link's path loss.
struct ChannelSet {
  std::vector<VecC> direct;              // per user k: M
  std::vector<MatC> ap_to_irs;           // per surface n: L x M
  std::vector<std::vector<VecC>> irs_to_user;  // [n][k]: L
};

// Per-user stacked matrix A_k of size (L*N + 1) x M. The first N*L rows are
// diag(conj(h_{n,k})) * G_n blocks in surface order, the last row is the
// direct channel conjugate-transposed. With the extended phase vector
// [f_1; ...; f_N; 1] the effective downlink channel row is f^H A_k.
struct CompositeChannels {
  std::vector<MatC> a;  // per user k
  int elements = 0;     // L, kept so per-surface sub-blocks can be sliced
};

enum class PathKind { Direct, IrsHop };

// Distance-dependent path loss in dB. Distances below 1 m are clamped to
// 1 m so the model stays finite at degenerate placements.
double path_loss_db(PathKind kind, double distance_m);

Placement place_nodes(const SystemConfig& config, std::mt19937_64& rng);

ChannelSet sample_channels(const SystemConfig& config, const Placement& placement,
                           std::mt19937_64& rng);

CompositeChannels assemble_composites(const SystemConfig& config,
                                      const ChannelSet& channels);

// Slice of A_k for one surface: rows [n*L, n*L+L) plus the direct row,
// giving the (L+1) x M stack used by the opportunistic per-pair model.
MatC pair_composite(const CompositeChannels& composites, int n, int k);

// CSV round trip for fading realizations (one row per coefficient with
// its indices and real/imag parts printed to full precision).
void dump_channels_csv(const ChannelSet& channels, std::ostream& os);
ChannelSet load_channels_csv(std::istream& is);

}  // namespace irsee
