// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: expands a parsed spec into (sweep value, scheme,
// seed) runs, executes them on a small worker pool, and writes
// deterministic CSV outputs (results, per-iteration traces, and for sweeps
// a per-value summary with Tukey quartiles).

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "irsee/experiment.hpp"

namespace irsee {

namespace {

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string make_run_id(SchemeLabel scheme, double sweep_value, std::uint64_t seed) {
  std::ostringstream os;
  os << to_string(scheme) << "_v" << fmt(sweep_value) << "_s" << seed;
  return os.str();
}

struct SingleOutcome {
  ExperimentRecord record;
  std::vector<BnbResult> audits;
};

SingleOutcome run_one(const SystemConfig& base, SchemeLabel scheme,
                      std::uint64_t seed, ExperimentKind kind, double sweep_value,
                      bool bnb_audit) {
  SystemConfig cfg = apply_sweep(base, kind, sweep_value);
  cfg.finalize();

  std::mt19937_64 prng = substream(seed, Stream::Placement);
  const Placement placement = place_nodes(cfg, prng);
  std::mt19937_64 frng = substream(seed, Stream::Fading);
  const ChannelSet channels = sample_channels(cfg, placement, frng);

  SingleOutcome out;
  ExperimentRecord& rec = out.record;
  rec.run_id = make_run_id(scheme, sweep_value, seed);
  rec.scheme = scheme;
  rec.sweep_value = sweep_value;
  rec.seed = seed;

  const auto t0 = std::chrono::steady_clock::now();
  auto take_eia = [&](const EiaResult& r) {
    rec.iterations = r.iterations;
    rec.converged = r.reason == StopReason::Converged;
    rec.final_ee = r.final_ee;
    rec.final_rate = r.final_rate;
    rec.max_violation = r.feasibility.worst;
    for (const auto& it : r.trace)
      rec.trace.push_back({rec.run_id, it.iteration, it.rho, 0.0, it.beam_objective,
                           it.phase_objective, it.power_mw, it.min_rank_ratio});
  };
  auto take_oia = [&](const OiaResult& r) {
    rec.iterations = r.iterations;
    rec.converged = r.reason == StopReason::Converged;
    rec.final_ee = r.final_ee;
    rec.final_rate = r.final_rate;
    rec.max_violation = r.feasibility.worst;
    for (const auto& it : r.trace)
      rec.trace.push_back({rec.run_id, it.iteration, it.rho, it.assoc_objective,
                           it.beam_objective, it.phase_objective, it.power_mw,
                           it.min_rank_ratio});
    out.audits = r.bnb_audit;
  };

  switch (scheme) {
    case SchemeLabel::Eia:
      take_eia(run_eia(cfg, channels, seed));
      break;
    case SchemeLabel::EiaRandomBeam:
      take_eia(run_baseline_eia(BaselineKind::RandomBeamforming, cfg, channels, seed));
      break;
    case SchemeLabel::EiaRandomPhase:
      take_eia(run_baseline_eia(BaselineKind::RandomPhase, cfg, channels, seed));
      break;
    case SchemeLabel::EiaNoIrs:
      take_eia(run_baseline_eia(BaselineKind::NoIrs, cfg, channels, seed));
      break;
    case SchemeLabel::Oia: {
      OiaOptions opts;
      opts.keep_bnb_audit = bnb_audit;
      take_oia(run_oia(cfg, channels, seed, opts));
      break;
    }
    case SchemeLabel::OiaRandomBeam:
      take_oia(run_baseline_oia(BaselineKind::RandomBeamforming, cfg, channels, seed));
      break;
    case SchemeLabel::OiaRandomPhase:
      take_oia(run_baseline_oia(BaselineKind::RandomPhase, cfg, channels, seed));
      break;
    case SchemeLabel::OiaNoIrs:
      take_oia(run_baseline_oia(BaselineKind::NoIrs, cfg, channels, seed));
      break;
  }
  rec.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

int resolve_workers(int requested, size_t jobs) {
  int w = requested;
  if (w <= 0) {
    if (const char* env = std::getenv("IRSEE_WORKERS")) w = std::atoi(env);
  }
  if (w <= 0) w = static_cast<int>(std::thread::hardware_concurrency());
  if (w <= 0) w = 1;
  return static_cast<int>(std::min<size_t>(w, std::max<size_t>(jobs, 1)));
}

}  // namespace

SystemConfig apply_sweep(const SystemConfig& base, ExperimentKind kind, double value) {
  SystemConfig cfg = base;
  switch (kind) {
    case ExperimentKind::Convergence:
      break;
    case ExperimentKind::SweepElements:
      cfg.elements = static_cast<int>(std::lround(value));
      break;
    case ExperimentKind::SweepIrsX:
      cfg.geometry.irs_center.x() = value;
      break;
    case ExperimentKind::SweepPmaxEe:
    case ExperimentKind::SweepPmaxRate:
      cfg.p_max_mw = dbm_to_mw(value);  // grid given in dBm
      break;
  }
  return cfg;
}

ExperimentRecord run_single(const SystemConfig& config, SchemeLabel scheme,
                            std::uint64_t seed, ExperimentKind kind,
                            double sweep_value, bool bnb_audit) {
  return run_one(config, scheme, seed, kind, sweep_value, bnb_audit).record;
}

Quartiles quartiles(std::vector<double> values) {
  Quartiles q;
  if (values.empty()) return q;
  std::sort(values.begin(), values.end());
  const auto median_of = [&](size_t lo, size_t hi) {  // [lo, hi)
    const size_t n = hi - lo;
    const size_t mid = lo + n / 2;
    return n % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
  };
  const size_t n = values.size();
  q.median = median_of(0, n);
  // Tukey hinges: odd counts share the middle element with both halves
  const size_t half = n / 2;
  q.q1 = median_of(0, n % 2 == 1 ? half + 1 : half);
  q.q3 = median_of(n % 2 == 1 ? half : half, n);
  return q;
}

ExperimentOutput run_experiment(const ParsedConfig& config) {
  const ExperimentSpec& spec = config.experiment;

  struct Job {
    double sweep_value;
    SchemeLabel scheme;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  const std::vector<double> values =
      spec.grid.empty() ? std::vector<double>{0.0} : spec.grid;
  for (double v : values)
    for (SchemeLabel s : spec.schemes)
      for (std::uint64_t seed : spec.seeds) jobs.push_back({v, s, seed});

  std::vector<SingleOutcome> outcomes(jobs.size());
  std::atomic<size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        outcomes[i] = run_one(config.system, jobs[i].scheme, jobs[i].seed, spec.kind,
                              jobs[i].sweep_value, spec.bnb_audit);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const int workers = resolve_workers(spec.workers, jobs.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  namespace fs = std::filesystem;
  fs::create_directories(spec.output_dir);

  ExperimentOutput out;
  out.records.reserve(outcomes.size());
  for (auto& o : outcomes) out.records.push_back(std::move(o.record));

  out.results_path = (fs::path(spec.output_dir) / "results.csv").string();
  {
    std::ofstream os(out.results_path);
    if (!os) throw ConfigError(out.results_path + ": cannot write");
    os << "run_id,scheme,sweep_value,seed,iterations,converged,final_ee_bit_per_joule,"
          "final_rate_bps,max_violation,wall_ms\n";
    for (const auto& r : out.records)
      os << r.run_id << ',' << to_string(r.scheme) << ',' << fmt(r.sweep_value) << ','
         << r.seed << ',' << r.iterations << ',' << (r.converged ? 1 : 0) << ','
         << fmt(r.final_ee) << ',' << fmt(r.final_rate) << ',' << fmt(r.max_violation)
         << ',' << fmt(r.wall_ms) << '\n';
  }

  out.trace_path = (fs::path(spec.output_dir) / "trace.csv").string();
  {
    std::ofstream os(out.trace_path);
    if (!os) throw ConfigError(out.trace_path + ": cannot write");
    os << "run_id,scheme,iteration,rho,assoc_objective,beam_objective,"
          "phase_objective,power_mw,min_rank_ratio\n";
    for (const auto& r : out.records)
      for (const auto& t : r.trace)
        os << t.run_id << ',' << to_string(r.scheme) << ',' << t.iteration << ','
           << fmt(t.rho) << ',' << fmt(t.assoc_objective) << ','
           << fmt(t.beam_objective) << ',' << fmt(t.phase_objective) << ','
           << fmt(t.power_mw) << ',' << fmt(t.min_rank_ratio) << '\n';
  }

  if (spec.kind != ExperimentKind::Convergence) {
    out.summary_path = (fs::path(spec.output_dir) / "summary.csv").string();
    std::ofstream os(out.summary_path);
    if (!os) throw ConfigError(out.summary_path + ": cannot write");
    os << "sweep_value,scheme,runs,ee_q1,ee_median,ee_q3,rate_q1,rate_median,"
          "rate_q3\n";
    for (double v : values)
      for (SchemeLabel s : spec.schemes) {
        std::vector<double> ee, rate;
        for (const auto& r : out.records)
          if (r.sweep_value == v && r.scheme == s) {
            ee.push_back(r.final_ee);
            rate.push_back(r.final_rate);
          }
        const Quartiles qe = quartiles(ee);
        const Quartiles qr = quartiles(rate);
        os << fmt(v) << ',' << to_string(s) << ',' << ee.size() << ',' << fmt(qe.q1)
           << ',' << fmt(qe.median) << ',' << fmt(qe.q3) << ',' << fmt(qr.q1) << ','
           << fmt(qr.median) << ',' << fmt(qr.q3) << '\n';
      }
  }

  if (spec.bnb_audit) {
    size_t idx = 0;
    for (const auto& o : outcomes) {
      for (size_t q = 0; q < o.audits.size(); ++q) {
        const fs::path p = fs::path(spec.output_dir) /
                           ("bnb_" + out.records[idx].run_id + "_iter" +
                            std::to_string(q + 1) + ".csv");
        std::ofstream os(p);
        if (!os) throw ConfigError(p.string() + ": cannot write");
        dump_bnb_trace_csv(o.audits[q], os);
      }
      ++idx;
    }
  }

  return out;
}

}  // namespace irsee
