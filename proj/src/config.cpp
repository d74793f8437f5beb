// SPDX-License-Identifier: Apache-2.0
//
// Flat key = value configuration with [scenario] and [experiment] sections.
// Parsing is strict: unknown keys, malformed numbers, and inconsistent
// vector lengths all raise ConfigError with the offending file and line.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "irsee/config.hpp"

namespace irsee {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Cursor {
  std::string file;
  int line = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError(file + ":" + std::to_string(line) + ": " + msg);
  }
};

double to_double(const Cursor& at, const std::string& s) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) at.fail("trailing characters in number '" + s + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    at.fail("expected a number, got '" + s + "'");
  }
}

int to_int(const Cursor& at, const std::string& s) {
  try {
    size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) at.fail("trailing characters in integer '" + s + "'");
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    at.fail("expected an integer, got '" + s + "'");
  }
}

std::uint64_t to_u64(const Cursor& at, const std::string& s) {
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used != s.size()) at.fail("trailing characters in integer '" + s + "'");
    return static_cast<std::uint64_t>(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    at.fail("expected a nonnegative integer, got '" + s + "'");
  }
}

bool to_bool(const Cursor& at, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  at.fail("expected a boolean (true/false), got '" + s + "'");
}

std::vector<double> to_double_list(const Cursor& at, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(to_double(at, item));
  if (out.empty()) at.fail("expected a comma-separated list of numbers");
  return out;
}

ExperimentKind to_kind(const Cursor& at, const std::string& s) {
  static const std::map<std::string, ExperimentKind> table = {
      {"convergence", ExperimentKind::Convergence},
      {"sweep_elements", ExperimentKind::SweepElements},
      {"sweep_irs_x", ExperimentKind::SweepIrsX},
      {"sweep_pmax_ee", ExperimentKind::SweepPmaxEe},
      {"sweep_pmax_rate", ExperimentKind::SweepPmaxRate},
  };
  const auto it = table.find(s);
  if (it == table.end()) at.fail("unknown experiment kind '" + s + "'");
  return it->second;
}

SchemeLabel to_scheme(const Cursor& at, const std::string& s) {
  static const std::map<std::string, SchemeLabel> table = {
      {"eia", SchemeLabel::Eia},
      {"oia", SchemeLabel::Oia},
      {"eia_random_beam", SchemeLabel::EiaRandomBeam},
      {"eia_random_phase", SchemeLabel::EiaRandomPhase},
      {"eia_no_irs", SchemeLabel::EiaNoIrs},
      {"oia_random_beam", SchemeLabel::OiaRandomBeam},
      {"oia_random_phase", SchemeLabel::OiaRandomPhase},
      {"oia_no_irs", SchemeLabel::OiaNoIrs},
  };
  const auto it = table.find(s);
  if (it == table.end()) at.fail("unknown scheme '" + s + "'");
  return it->second;
}

}  // namespace

std::string to_string(SchemeLabel label) {
  switch (label) {
    case SchemeLabel::Eia: return "eia";
    case SchemeLabel::Oia: return "oia";
    case SchemeLabel::EiaRandomBeam: return "eia_random_beam";
    case SchemeLabel::EiaRandomPhase: return "eia_random_phase";
    case SchemeLabel::EiaNoIrs: return "eia_no_irs";
    case SchemeLabel::OiaRandomBeam: return "oia_random_beam";
    case SchemeLabel::OiaRandomPhase: return "oia_random_phase";
    case SchemeLabel::OiaNoIrs: return "oia_no_irs";
  }
  return "unknown";
}

ParsedConfig parse_config(std::istream& is, const std::string& filename) {
  ParsedConfig cfg;
  SystemConfig& sys = cfg.system;
  ExperimentSpec& exp = cfg.experiment;

  // vector-valued scenario keys are resolved after the whole file is read,
  // so a single value broadcasts over however many users end up configured
  std::vector<double> priority_list, min_rate_list;
  Cursor priority_at, min_rate_at;
  bool grid_seen = false;

  Cursor at{filename, 0};
  std::string section;
  std::string raw;
  while (std::getline(is, raw)) {
    ++at.line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') at.fail("unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "scenario" && section != "experiment")
        at.fail("unknown section [" + section + "]");
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) at.fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) at.fail("empty key");
    if (value.empty()) at.fail("empty value for key '" + key + "'");
    if (section.empty()) at.fail("key '" + key + "' appears before any section");

    if (section == "scenario") {
      if (key == "antennas") sys.antennas = to_int(at, value);
      else if (key == "users") sys.users = to_int(at, value);
      else if (key == "irs_count") sys.irs_count = to_int(at, value);
      else if (key == "elements") sys.elements = to_int(at, value);
      else if (key == "bandwidth_hz") sys.bandwidth_hz = to_double(at, value);
      else if (key == "p_max_dbm") sys.p_max_mw = dbm_to_mw(to_double(at, value));
      else if (key == "p_max_mw") sys.p_max_mw = to_double(at, value);
      else if (key == "p_user_dbm") sys.p_user_mw = dbm_to_mw(to_double(at, value));
      else if (key == "p_user_mw") sys.p_user_mw = to_double(at, value);
      else if (key == "p_ap_dbm") sys.p_ap_mw = dbm_to_mw(to_double(at, value));
      else if (key == "p_ap_mw") sys.p_ap_mw = to_double(at, value);
      else if (key == "p_element_mw") sys.p_element_mw = to_double(at, value);
      else if (key == "noise_dbm") sys.noise_mw = dbm_to_mw(to_double(at, value));
      else if (key == "noise_mw") sys.noise_mw = to_double(at, value);
      else if (key == "priority") { priority_list = to_double_list(at, value); priority_at = at; }
      else if (key == "min_rate") { min_rate_list = to_double_list(at, value); min_rate_at = at; }
      else if (key == "irs_capacity") sys.irs_capacity = to_int(at, value);
      else if (key == "dinkelbach_tol") sys.dinkelbach_tol = to_double(at, value);
      else if (key == "dinkelbach_max_iter") sys.dinkelbach_max_iter = to_int(at, value);
      else if (key == "sca_tol") sys.sca_tol = to_double(at, value);
      else if (key == "sca_max_iter") sys.sca_max_iter = to_int(at, value);
      else if (key == "solver_tol") sys.solver_tol = to_double(at, value);
      else if (key == "ap_x") sys.geometry.ap.x() = to_double(at, value);
      else if (key == "ap_y") sys.geometry.ap.y() = to_double(at, value);
      else if (key == "user_center_x") sys.geometry.user_center.x() = to_double(at, value);
      else if (key == "user_center_y") sys.geometry.user_center.y() = to_double(at, value);
      else if (key == "user_radius") sys.geometry.user_radius = to_double(at, value);
      else if (key == "irs_center_x") sys.geometry.irs_center.x() = to_double(at, value);
      else if (key == "irs_center_y") sys.geometry.irs_center.y() = to_double(at, value);
      else if (key == "irs_radius") sys.geometry.irs_radius = to_double(at, value);
      else at.fail("unknown key '" + key + "' in [scenario]");
    } else {
      if (key == "kind") exp.kind = to_kind(at, value);
      else if (key == "schemes") {
        exp.schemes.clear();
        for (const auto& item : split_list(value)) exp.schemes.push_back(to_scheme(at, item));
        if (exp.schemes.empty()) at.fail("schemes list is empty");
      } else if (key == "grid") {
        exp.grid = to_double_list(at, value);
        grid_seen = true;
      } else if (key == "seeds") {
        exp.seeds.clear();
        for (const auto& item : split_list(value)) exp.seeds.push_back(to_u64(at, item));
        if (exp.seeds.empty()) at.fail("seeds list is empty");
      } else if (key == "output_dir") exp.output_dir = value;
      else if (key == "bnb_audit") exp.bnb_audit = to_bool(at, value);
      else if (key == "workers") exp.workers = to_int(at, value);
      else at.fail("unknown key '" + key + "' in [experiment]");
    }
  }

  Cursor end{filename, at.line};
  auto resolve = [&](std::vector<double>& list, const Cursor& where, VecD* out) {
    if (list.empty()) return;
    if (list.size() == 1) {
      *out = VecD::Constant(sys.users, list.front());
    } else if (static_cast<int>(list.size()) == sys.users) {
      *out = Eigen::Map<VecD>(list.data(), static_cast<int>(list.size()));
    } else {
      where.fail("list has " + std::to_string(list.size()) + " entries but users = " +
                 std::to_string(sys.users));
    }
  };
  resolve(priority_list, priority_at, &sys.priority);
  resolve(min_rate_list, min_rate_at, &sys.min_rate);

  if (exp.kind == ExperimentKind::Convergence) {
    if (grid_seen) end.fail("convergence runs take no grid");
  } else if (exp.grid.empty()) {
    end.fail("sweep experiments need a non-empty grid");
  }

  try {
    sys.finalize();
  } catch (const std::invalid_argument& e) {
    end.fail(std::string("invalid scenario: ") + e.what());
  }
  return cfg;
}

ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path + ": cannot open file");
  return parse_config(is, path);
}

}  // namespace irsee
