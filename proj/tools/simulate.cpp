// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end.
//
//   run <spec-file>       parse an experiment description and execute it
//   validate <spec-file>  parse and sanity-check only, then print a summary
//   oracle <suite>        run the independent reference checks and write a
//                         provenance report
//
// Exit codes: 0 success, 1 bad configuration or arguments, 2 runtime error.

#include <CLI11.hpp>

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "irsee/config.hpp"
#include "irsee/experiment.hpp"
#include "oracles.hpp"

namespace {

void print_spec_summary(const irsee::ParsedConfig& parsed) {
  const irsee::SystemConfig& sys = parsed.system;
  const irsee::ExperimentSpec& exp = parsed.experiment;
  std::cout << "scenario: antennas=" << sys.antennas << " users=" << sys.users
            << " surfaces=" << sys.irs_count << " elements=" << sys.elements
            << " bandwidth_hz=" << sys.bandwidth_hz << "\n";
  std::cout << "experiment: kind=" << static_cast<int>(exp.kind)
            << " schemes=" << exp.schemes.size() << " grid=" << exp.grid.size()
            << " seeds=" << exp.seeds.size() << " output_dir=" << exp.output_dir
            << "\n";
  std::size_t jobs = exp.seeds.size() * exp.schemes.size();
  if (!exp.grid.empty()) jobs *= exp.grid.size();
  std::cout << "jobs: " << jobs << "\n";
}

int cmd_validate(const std::string& path) {
  const irsee::ParsedConfig parsed = irsee::parse_config_file(path);
  std::cout << "ok: " << path << "\n";
  print_spec_summary(parsed);
  return 0;
}

int cmd_run(const std::string& path) {
  const irsee::ParsedConfig parsed = irsee::parse_config_file(path);
  print_spec_summary(parsed);
  const irsee::ExperimentOutput out = irsee::run_experiment(parsed);
  int converged = 0;
  for (const auto& r : out.records) converged += r.converged ? 1 : 0;
  std::cout << "runs: " << out.records.size() << " (" << converged
            << " converged)\n";
  std::cout << "wrote: " << out.results_path << "\n";
  std::cout << "wrote: " << out.trace_path << "\n";
  if (!out.summary_path.empty()) std::cout << "wrote: " << out.summary_path << "\n";
  return 0;
}

int cmd_oracle(const std::string& suite, const std::string& out_dir,
               std::uint64_t seed) {
  const std::vector<irsee::oracle::CheckRow> rows =
      irsee::oracle::run_suite(suite, seed);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path report =
      std::filesystem::path(out_dir) / ("oracle_report_" + suite + ".csv");
  std::ofstream os(report);
  if (!os) throw std::runtime_error("cannot write " + report.string());
  irsee::oracle::write_report_csv(rows, os);

  bool all_pass = true;
  for (const auto& r : rows) {
    std::printf("[%s] %-28s %-4s worst=%.3e tol=%.1e (%d instances)\n",
                r.suite.c_str(), r.name.c_str(), r.pass ? "ok" : "FAIL",
                r.worst, r.tolerance, r.instances);
    all_pass = all_pass && r.pass;
  }
  std::cout << "report: " << report.string() << "\n";
  if (!all_pass) {
    std::cerr << "error: at least one reference check failed\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-surface reflection-aided rate-splitting energy-efficiency simulator"};
  app.require_subcommand(1);

  std::string run_path;
  CLI::App* run = app.add_subcommand("run", "execute an experiment description");
  run->add_option("spec-file", run_path, "experiment description file")->required();

  std::string val_path;
  CLI::App* validate =
      app.add_subcommand("validate", "parse and check an experiment description");
  validate->add_option("spec-file", val_path, "experiment description file")->required();

  std::string suite;
  std::string oracle_out = "out";
  std::uint64_t oracle_seed = 1;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "run independent reference checks and write a provenance report");
  oracle->add_option("suite", suite, "channel | solver | assignment | all")->required();
  oracle->add_option("--out", oracle_out, "report directory (default: out)");
  oracle->add_option("--seed", oracle_seed, "root seed for the reference checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(run_path);
    if (*validate) return cmd_validate(val_path);
    if (*oracle) return cmd_oracle(suite, oracle_out, oracle_seed);
  } catch (const irsee::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
