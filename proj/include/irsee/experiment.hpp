// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "irsee/baselines.hpp"
#include "irsee/config.hpp"

namespace irsee {

struct TraceRow {
  std::string run_id;
  int iteration = 0;
  double rho = 0.0;
  double assoc_objective = 0.0;  // 0 for the exhaustive scheme
  double beam_objective = 0.0;
  double phase_objective = 0.0;
  double power_mw = 0.0;
  double min_rank_ratio = 1.0;
};

struct ExperimentRecord {
  std::string run_id;
  SchemeLabel scheme = SchemeLabel::Eia;
  double sweep_value = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  bool converged = false;
  double final_ee = 0.0;    // Mbit/J
  double final_rate = 0.0;  // bit/s
  double max_violation = 0.0;
  double wall_ms = 0.0;     // timing column, excluded from reproducibility
  std::vector<TraceRow> trace;
};

struct ExperimentOutput {
  std::vector<ExperimentRecord> records;
  std::string results_path;
  std::string trace_path;
  std::string summary_path;  // empty for convergence runs
};

// Runs every (sweep value, scheme, seed) combination on a small worker
// pool, then writes results.csv (one row per run, deterministic order and
// formatting; wall time is the final column), trace.csv (per-iteration
// rows), and for sweeps summary.csv (median and quartiles per sweep value
// and scheme).
ExperimentOutput run_experiment(const ParsedConfig& config);

// Applies a sweep value to a copy of the base system config.
SystemConfig apply_sweep(const SystemConfig& base, ExperimentKind kind, double value);

ExperimentRecord run_single(const SystemConfig& config, SchemeLabel scheme,
                            std::uint64_t seed, ExperimentKind kind,
                            double sweep_value, bool bnb_audit);

// Median / lower / upper quartile via sorted midpoints (Tukey hinges).
struct Quartiles {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
};
Quartiles quartiles(std::vector<double> values);

}  // namespace irsee
