#pragma once

// Flat `section.key = value` run configuration.
//
//   # comment
//   model.rho = 0.3
//   control.kind = variance
//   control.nu0 = 0.1
//
// Unknown or repeated keys are rejected. Every applicable default is
// materialized in the manifest, and to_config_text() echoes it in a form
// that parses back to an equal manifest.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "ktraffic/engine.hpp"
#include "ktraffic/errors.hpp"
#include "ktraffic/experiments.hpp"

namespace ktraffic {

inline constexpr std::string_view kVersion = "0.1.0";

struct RunManifest {
  SimConfig sim{};

  // sweep.* (fundamental diagrams; nu0_list is shared with `compare`)
  double sweep_rho_min = 0.0;
  double sweep_rho_max = 1.0;
  std::size_t sweep_rho_points = 21;
  double sweep_tau_end = 100.0;
  std::vector<double> nu0_list{std::numeric_limits<double>::infinity(), 0.1, 10.0};

  // sim.* extras for contours and relax-check
  std::size_t n_bins = 50;
  std::vector<double> contour_taus;  // empty: every sampled time
  double relax_tau_min = 0.1;

  // provenance, not part of the config text
  std::string version{kVersion};
  std::string timestamp = "unset";

  friend bool operator==(const RunManifest&, const RunManifest&) = default;

  SweepSpec sweep_spec() const;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

inline const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys{
      "model.rho",         "model.gamma",      "model.delta_v",     "scaling.epsilon",
      "scaling.dtau",      "control.kind",     "control.nu0",       "control.vd",
      "sim.n_particles",   "sim.tau_end",      "sim.sample_stride", "sim.seed",
      "sim.n_bins",        "sim.contour_taus", "sim.relax_tau_min", "init.kind",
      "init.v0",           "init.mean",        "init.stddev",       "sweep.rho_min",
      "sweep.rho_max",     "sweep.rho_points", "sweep.tau_end",     "sweep.nu0_list",
  };
  return keys;
}

class KeyValues {
 public:
  explicit KeyValues(std::map<std::string, std::string, std::less<>> kv) : kv_(std::move(kv)) {}

  bool has(std::string_view key) const { return kv_.find(key) != kv_.end(); }

  const std::string& raw(std::string_view key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required key " + std::string(key));
    return it->second;
  }

  double real(std::string_view key, double fallback) const {
    return has(key) ? to_real(key, raw(key)) : fallback;
  }
  double real(std::string_view key) const { return to_real(key, raw(key)); }

  std::uint64_t u64(std::string_view key, std::uint64_t fallback) const {
    return has(key) ? to_u64(key, raw(key)) : fallback;
  }

  std::vector<double> reals(std::string_view key, std::vector<double> fallback) const {
    if (!has(key)) return fallback;
    std::vector<double> out;
    std::string_view text = raw(key);
    if (trim(text).empty()) return out;
    while (true) {
      const auto comma = text.find(',');
      out.push_back(to_real(key, trim(text.substr(0, comma))));
      if (comma == std::string_view::npos) break;
      text.remove_prefix(comma + 1);
    }
    return out;
  }

  static double to_real(std::string_view key, std::string_view text) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || std::isnan(value)) {
      throw ConfigError("key " + std::string(key) + ": not a number: '" + std::string(text) + "'");
    }
    return value;
  }

  static std::uint64_t to_u64(std::string_view key, std::string_view text) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ConfigError("key " + std::string(key) + ": not an unsigned integer: '" +
                        std::string(text) + "'");
    }
    return value;
  }

 private:
  std::map<std::string, std::string, std::less<>> kv_;
};

inline std::size_t to_count(std::string_view key, std::uint64_t v) {
  if (v > std::numeric_limits<std::size_t>::max() / 2) {
    throw ConfigError("key " + std::string(key) + " is too large");
  }
  return static_cast<std::size_t>(v);
}

inline std::string join_reals(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (k) out += ",";
    out += fmt_value(xs[k]);
  }
  return out;
}

}  // namespace detail

inline SweepSpec RunManifest::sweep_spec() const {
  SweepSpec spec;
  spec.rho_grid = uniform_grid(sweep_rho_min, sweep_rho_max, sweep_rho_points);
  spec.tau_end = sweep_tau_end;
  spec.base = sim;
  spec.strategies.clear();
  const ControlKind family = sim.strategy.kind();
  const DesiredSpeedSpec vd = sim.strategy.vd().value_or(DesiredSpeedSpec{});
  for (double nu0 : nu0_list) {
    const ControlStrategy s = ControlStrategy::of_kind(family, nu0, vd);
    bool seen = false;
    for (const auto& t : spec.strategies) seen = seen || t == s;
    if (!seen) spec.strategies.push_back(s);
  }
  return spec;
}

/// Parses config text. `origin` names the source in diagnostics.
inline RunManifest parse_config_text(std::string_view text, std::string_view origin = "<config>") {
  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = detail::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    std::string key = detail::trim(std::string_view(body).substr(0, eq));
    std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (!detail::known_keys().contains(key)) throw ConfigError(where + ": unknown key " + key);
    if (kv.contains(key)) throw ConfigError(where + ": duplicate key " + key);
    kv.emplace(std::move(key), std::move(value));
  }
  const detail::KeyValues cfg(std::move(kv));

  RunManifest m;
  SimConfig& sim = m.sim;
  sim.rho = Density(cfg.real("model.rho"));
  sim.kernel.gamma = cfg.real("model.gamma", 1.0);
  sim.kernel.delta_v = cfg.real("model.delta_v", 0.2);
  sim.kernel.validate();

  sim.scaling.epsilon = cfg.real("scaling.epsilon", 1e-2);
  sim.scaling.dtau = cfg.real("scaling.dtau", sim.scaling.epsilon);

  const std::string& kind = cfg.raw("control.kind");
  if (kind == "none") {
    for (const char* k : {"control.nu0", "control.vd"}) {
      if (cfg.has(k)) throw ConfigError(std::string(k) + " is not used with control.kind=none");
    }
    sim.strategy = ControlStrategy::none();
  } else if (kind == "variance") {
    if (cfg.has("control.vd")) throw ConfigError("control.vd is only used with control.kind=desired");
    sim.strategy = ControlStrategy::binary_variance(cfg.real("control.nu0"));
  } else if (kind == "desired") {
    const double nu0 = cfg.real("control.nu0");
    const std::string& vd = cfg.raw("control.vd");
    const DesiredSpeedSpec spec =
        vd == "1-rho" ? DesiredSpeedSpec::linear_congestion()
                      : DesiredSpeedSpec::constant(detail::KeyValues::to_real("control.vd", vd));
    sim.strategy = ControlStrategy::desired_speed(nu0, spec);
  } else {
    throw ConfigError("control.kind must be none, variance or desired, got '" + kind + "'");
  }

  sim.n_particles = detail::to_count("sim.n_particles", cfg.u64("sim.n_particles", 10000));
  sim.tau_end = cfg.real("sim.tau_end", 10.0);
  sim.sample_stride = detail::to_count("sim.sample_stride", cfg.u64("sim.sample_stride", 1));
  sim.seed = cfg.u64("sim.seed", 1);
  m.n_bins = detail::to_count("sim.n_bins", cfg.u64("sim.n_bins", 50));
  m.contour_taus = cfg.reals("sim.contour_taus", {});
  m.relax_tau_min = cfg.real("sim.relax_tau_min", 0.1);

  const std::string init_kind = cfg.has("init.kind") ? cfg.raw("init.kind") : "uniform01";
  auto reject_unused = [&](std::initializer_list<const char*> keys) {
    for (const char* k : keys) {
      if (cfg.has(k)) throw ConfigError(std::string(k) + " is not used with init.kind=" + init_kind);
    }
  };
  if (init_kind == "uniform01") {
    reject_unused({"init.v0", "init.mean", "init.stddev"});
    sim.init = InitDist::uniform01();
  } else if (init_kind == "dirac") {
    reject_unused({"init.mean", "init.stddev"});
    sim.init = InitDist::dirac(cfg.real("init.v0"));
  } else if (init_kind == "truncated_gaussian") {
    reject_unused({"init.v0"});
    sim.init = InitDist::truncated_gaussian(cfg.real("init.mean"), cfg.real("init.stddev"));
  } else {
    throw ConfigError("init.kind must be uniform01, dirac or truncated_gaussian, got '" +
                      init_kind + "'");
  }

  m.sweep_rho_min = cfg.real("sweep.rho_min", 0.0);
  m.sweep_rho_max = cfg.real("sweep.rho_max", 1.0);
  m.sweep_rho_points = detail::to_count("sweep.rho_points", cfg.u64("sweep.rho_points", 21));
  m.sweep_tau_end = cfg.real("sweep.tau_end", 100.0);
  m.nu0_list = cfg.reals("sweep.nu0_list", m.nu0_list);

  sim.validate();
  if (!(m.sweep_rho_min >= 0.0 && m.sweep_rho_min <= m.sweep_rho_max && m.sweep_rho_max <= 1.0)) {
    throw ConfigError("sweep.rho_min/rho_max must satisfy 0 <= min <= max <= 1");
  }
  if (m.sweep_rho_points < 1) throw ConfigError("sweep.rho_points must be at least 1");
  if (!(m.sweep_tau_end >= 0.0) || !std::isfinite(m.sweep_tau_end)) {
    throw ConfigError("sweep.tau_end must be non-negative");
  }
  for (double nu0 : m.nu0_list) {
    if (!(nu0 > 0.0)) throw ConfigError("sweep.nu0_list entries must be positive or inf");
  }
  if (m.n_bins < 1) throw ConfigError("sim.n_bins must be at least 1");
  return m;
}

inline RunManifest parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str(), path);
}

/// Ordered (key, value) pairs of the fully resolved configuration.
inline std::vector<std::pair<std::string, std::string>> config_entries(const RunManifest& m) {
  using detail::fmt_value;
  const SimConfig& s = m.sim;
  std::vector<std::pair<std::string, std::string>> e{
      {"model.rho", fmt_value(s.rho.value())},
      {"model.gamma", fmt_value(s.kernel.gamma)},
      {"model.delta_v", fmt_value(s.kernel.delta_v)},
      {"scaling.epsilon", fmt_value(s.scaling.epsilon)},
      {"scaling.dtau", fmt_value(s.scaling.dtau)},
      {"control.kind", std::string(to_string(s.strategy.kind()))},
  };
  if (s.strategy.kind() != ControlKind::none) e.emplace_back("control.nu0", fmt_value(s.strategy.nu0()));
  if (const auto& vd = s.strategy.vd()) {
    e.emplace_back("control.vd", vd->mode == DesiredSpeedSpec::Mode::linear_congestion
                                     ? std::string("1-rho")
                                     : fmt_value(vd->value));
  }
  e.emplace_back("sim.n_particles", std::to_string(s.n_particles));
  e.emplace_back("sim.tau_end", fmt_value(s.tau_end));
  e.emplace_back("sim.sample_stride", std::to_string(s.sample_stride));
  e.emplace_back("sim.seed", std::to_string(s.seed));
  e.emplace_back("sim.n_bins", std::to_string(m.n_bins));
  e.emplace_back("sim.contour_taus", detail::join_reals(m.contour_taus));
  e.emplace_back("sim.relax_tau_min", fmt_value(m.relax_tau_min));
  switch (s.init.kind) {
    case InitDist::Kind::uniform01:
      e.emplace_back("init.kind", "uniform01");
      break;
    case InitDist::Kind::dirac:
      e.emplace_back("init.kind", "dirac");
      e.emplace_back("init.v0", fmt_value(s.init.v0));
      break;
    case InitDist::Kind::truncated_gaussian:
      e.emplace_back("init.kind", "truncated_gaussian");
      e.emplace_back("init.mean", fmt_value(s.init.mean));
      e.emplace_back("init.stddev", fmt_value(s.init.stddev));
      break;
  }
  e.emplace_back("sweep.rho_min", fmt_value(m.sweep_rho_min));
  e.emplace_back("sweep.rho_max", fmt_value(m.sweep_rho_max));
  e.emplace_back("sweep.rho_points", std::to_string(m.sweep_rho_points));
  e.emplace_back("sweep.tau_end", fmt_value(m.sweep_tau_end));
  e.emplace_back("sweep.nu0_list", detail::join_reals(m.nu0_list));
  return e;
}

inline std::string to_config_text(const RunManifest& m) {
  std::string out = "# ktraffic " + m.version + " resolved configuration\n";
  for (const auto& [key, value] : config_entries(m)) out += key + " = " + value + "\n";
  return out;
}

}  // namespace ktraffic
