// SPDX-License-Identifier: Apache-2.0
#include "irsee/scenario.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace irsee {

namespace {

constexpr int kMaxEmbeddedDim = 400;  // solver guardrail, real dimension

double uniform(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

Eigen::Vector2d sample_disc(const Eigen::Vector2d& center, double radius,
                            std::mt19937_64& rng) {
  const double r = radius * std::sqrt(uniform(rng));
  const double ang = 2.0 * M_PI * uniform(rng);
  return center + r * Eigen::Vector2d(std::cos(ang), std::sin(ang));
}

// Complex Gaussian entry with mean power `power`.
cxd cn_entry(double power, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(power / 2.0));
  const double re = gauss(rng);
  const double im = gauss(rng);
  return {re, im};
}

double link_power(PathKind kind, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return dbm_to_mw(-path_loss_db(kind, (a - b).norm()));  // relative gain
}

}  // namespace

void SystemConfig::finalize() {
  if (antennas < 1 || users < 1 || irs_count < 1 || elements < 1)
    throw std::invalid_argument("config: dimensions must be positive");
  if (bandwidth_hz <= 0 || p_max_mw <= 0 || noise_mw <= 0)
    throw std::invalid_argument("config: powers and bandwidth must be positive");
  if (p_user_mw < 0 || p_ap_mw < 0 || p_element_mw < 0)
    throw std::invalid_argument("config: static powers must be nonnegative");
  if (irs_capacity < 1)
    throw std::invalid_argument("config: surface capacity must be positive");
  if (priority.size() == 0) priority = VecD::Ones(users);
  if (min_rate.size() == 0) min_rate = VecD::Zero(users);
  if (priority.size() != users || min_rate.size() != users)
    throw std::invalid_argument("config: priority/min_rate length must equal users");
  if (priority.minCoeff() < 0)
    throw std::invalid_argument("config: priorities must be nonnegative");
  if (min_rate.minCoeff() < 0)
    throw std::invalid_argument("config: rate floors must be nonnegative");
  const int phase_dim = 2 * (elements * irs_count + 1);
  if (phase_dim > kMaxEmbeddedDim)
    throw std::invalid_argument(
        "config: elements * irs_count too large for the solver guardrail (" +
        std::to_string(phase_dim) + " > " + std::to_string(kMaxEmbeddedDim) + ")");
}

double path_loss_db(PathKind kind, double distance_m) {
  const double d = std::max(distance_m, 1.0);
  switch (kind) {
    case PathKind::Direct:
      return 32.6 + 36.7 * std::log10(d);
    case PathKind::IrsHop:
      return 35.6 + 22.0 * std::log10(d);
  }
  return 0.0;  // unreachable
}

Placement place_nodes(const SystemConfig& config, std::mt19937_64& rng) {
  Placement p;
  p.ap = config.geometry.ap;
  p.users.reserve(config.users);
  for (int k = 0; k < config.users; ++k)
    p.users.push_back(sample_disc(config.geometry.user_center,
                                  config.geometry.user_radius, rng));
  p.irss.reserve(config.irs_count);
  for (int n = 0; n < config.irs_count; ++n)
    p.irss.push_back(sample_disc(config.geometry.irs_center,
                                 config.geometry.irs_radius, rng));
  return p;
}

ChannelSet sample_channels(const SystemConfig& config, const Placement& placement,
                           std::mt19937_64& rng) {
  const int m = config.antennas;
  const int k_users = config.users;
  const int n_irs = config.irs_count;
  const int l = config.elements;

  ChannelSet ch;
  ch.direct.resize(k_users);
  for (int k = 0; k < k_users; ++k) {
    const double pw = link_power(PathKind::Direct, placement.ap, placement.users[k]);
    ch.direct[k] = VecC(m);
    for (int i = 0; i < m; ++i) ch.direct[k](i) = cn_entry(pw, rng);
  }
  ch.ap_to_irs.resize(n_irs);
  for (int n = 0; n < n_irs; ++n) {
    const double pw = link_power(PathKind::IrsHop, placement.ap, placement.irss[n]);
    ch.ap_to_irs[n] = MatC(l, m);
    for (int r = 0; r < l; ++r)
      for (int c = 0; c < m; ++c) ch.ap_to_irs[n](r, c) = cn_entry(pw, rng);
  }
  ch.irs_to_user.assign(n_irs, std::vector<VecC>(k_users));
  for (int n = 0; n < n_irs; ++n)
    for (int k = 0; k < k_users; ++k) {
      const double pw =
          link_power(PathKind::IrsHop, placement.irss[n], placement.users[k]);
      ch.irs_to_user[n][k] = VecC(l);
      for (int i = 0; i < l; ++i) ch.irs_to_user[n][k](i) = cn_entry(pw, rng);
    }
  return ch;
}

CompositeChannels assemble_composites(const SystemConfig& config,
                                      const ChannelSet& channels) {
  const int m = config.antennas;
  const int l = config.elements;
  const int n_irs = config.irs_count;
  CompositeChannels out;
  out.elements = l;
  out.a.resize(config.users);
  for (int k = 0; k < config.users; ++k) {
    MatC a(n_irs * l + 1, m);
    for (int n = 0; n < n_irs; ++n)
      a.middleRows(n * l, l) =
          channels.irs_to_user[n][k].conjugate().asDiagonal() * channels.ap_to_irs[n];
    a.row(n_irs * l) = channels.direct[k].adjoint();
    out.a[k] = std::move(a);
  }
  return out;
}

MatC pair_composite(const CompositeChannels& composites, int n, int k) {
  const MatC& a = composites.a[k];
  const int l = composites.elements;
  MatC e(l + 1, a.cols());
  e.topRows(l) = a.middleRows(n * l, l);
  e.row(l) = a.row(a.rows() - 1);
  return e;
}

void dump_channels_csv(const ChannelSet& channels, std::ostream& os) {
  char buf[128];
  auto emit = [&](const char* tag, int i0, int i1, int i2, cxd v) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%d,%.17g,%.17g\n", tag, i0, i1, i2,
                  v.real(), v.imag());
    os << buf;
  };
  const int k_users = static_cast<int>(channels.direct.size());
  const int n_irs = static_cast<int>(channels.ap_to_irs.size());
  os << "link,i,j,l,re,im\n";
  for (int k = 0; k < k_users; ++k)
    for (int i = 0; i < channels.direct[k].size(); ++i)
      emit("direct", k, i, 0, channels.direct[k](i));
  for (int n = 0; n < n_irs; ++n)
    for (int r = 0; r < channels.ap_to_irs[n].rows(); ++r)
      for (int c = 0; c < channels.ap_to_irs[n].cols(); ++c)
        emit("ap_irs", n, r, c, channels.ap_to_irs[n](r, c));
  for (int n = 0; n < n_irs; ++n)
    for (int k = 0; k < k_users; ++k)
      for (int i = 0; i < channels.irs_to_user[n][k].size(); ++i)
        emit("irs_user", n, k, i, channels.irs_to_user[n][k](i));
}

ChannelSet load_channels_csv(std::istream& is) {
  ChannelSet ch;
  std::string line;
  if (!std::getline(is, line) || line.rfind("link,", 0) != 0)
    throw std::runtime_error("channel csv: missing header");
  auto need = [](bool cond, const char* what) {
    if (!cond) throw std::runtime_error(std::string("channel csv: ") + what);
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag, field;
    std::getline(ss, tag, ',');
    int idx[3];
    for (int& v : idx) {
      need(static_cast<bool>(std::getline(ss, field, ',')), "truncated row");
      v = std::stoi(field);
    }
    need(static_cast<bool>(std::getline(ss, field, ',')), "truncated row");
    const double re = std::stod(field);
    need(static_cast<bool>(std::getline(ss, field, ',')), "truncated row");
    const double im = std::stod(field);
    const cxd v{re, im};
    if (tag == "direct") {
      if (static_cast<int>(ch.direct.size()) <= idx[0]) ch.direct.resize(idx[0] + 1);
      VecC& g = ch.direct[idx[0]];
      if (g.size() <= idx[1]) g.conservativeResizeLike(VecC::Zero(idx[1] + 1));
      g(idx[1]) = v;
    } else if (tag == "ap_irs") {
      if (static_cast<int>(ch.ap_to_irs.size()) <= idx[0]) ch.ap_to_irs.resize(idx[0] + 1);
      MatC& g = ch.ap_to_irs[idx[0]];
      if (g.rows() <= idx[1] || g.cols() <= idx[2]) {
        MatC grown = MatC::Zero(std::max<Eigen::Index>(g.rows(), idx[1] + 1),
                                std::max<Eigen::Index>(g.cols(), idx[2] + 1));
        grown.topLeftCorner(g.rows(), g.cols()) = g;
        g = std::move(grown);
      }
      g(idx[1], idx[2]) = v;
    } else if (tag == "irs_user") {
      if (static_cast<int>(ch.irs_to_user.size()) <= idx[0])
        ch.irs_to_user.resize(idx[0] + 1);
      auto& per_user = ch.irs_to_user[idx[0]];
      if (static_cast<int>(per_user.size()) <= idx[1]) per_user.resize(idx[1] + 1);
      VecC& h = per_user[idx[1]];
      if (h.size() <= idx[2]) h.conservativeResizeLike(VecC::Zero(idx[2] + 1));
      h(idx[2]) = v;
    } else {
      need(false, "unknown link tag");
    }
  }
  return ch;
}

}  // namespace irsee
