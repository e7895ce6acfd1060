#pragma once

// Reproduction harness: fundamental diagrams, paired variance trajectories,
// distribution evolution and the monokinetic relaxation check.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "ktraffic/engine.hpp"

namespace ktraffic {

/// `points` equally spaced values from lo to hi inclusive.
inline std::vector<double> uniform_grid(double lo, double hi, std::size_t points) {
  if (points == 0) return {};
  if (points == 1) return {lo};
  std::vector<double> grid(points);
  for (std::size_t k = 0; k < points; ++k) {
    grid[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  grid.back() = hi;
  return grid;
}

/// Time average of the trailing `fraction` of samples (at least one).
inline MomentSample steady_state(const MomentSeries& series, double fraction = 0.1) {
  if (series.empty()) throw std::invalid_argument("steady state of an empty series");
  const std::size_t n = series.size();
  const auto window = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n))));
  MomentSample avg{series.samples.back().tau, 0.0, 0.0, 0.0};
  for (std::size_t k = n - window; k < n; ++k) {
    avg.mean += series.samples[k].mean;
    avg.energy += series.samples[k].energy;
    avg.variance += series.samples[k].variance;
  }
  const auto w = static_cast<double>(window);
  avg.mean /= w;
  avg.energy /= w;
  avg.variance /= w;
  return avg;
}

// --- fundamental diagrams ---------------------------------------------------

struct DiagramRow {
  double rho = 0.0;
  ControlKind strategy = ControlKind::none;
  double nu0 = std::numeric_limits<double>::infinity();
  double mean = 0.0;      // steady V
  double flux = 0.0;      // rho * steady V
  double variance = 0.0;  // steady E - V^2

  friend bool operator==(const DiagramRow&, const DiagramRow&) = default;
};

inline bool diagram_order(const DiagramRow& a, const DiagramRow& b) {
  return std::tuple(a.rho, static_cast<int>(a.strategy), a.nu0) <
         std::tuple(b.rho, static_cast<int>(b.strategy), b.nu0);
}

struct SweepSpec {
  std::vector<double> rho_grid = uniform_grid(0.0, 1.0, 21);
  double tau_end = 100.0;
  SimConfig base{};
  /// ControlStrategy::none() stands for nu0 = +inf.
  std::vector<ControlStrategy> strategies{ControlStrategy::none()};

  void validate() const {
    if (!std::is_sorted(rho_grid.begin(), rho_grid.end())) {
      throw ConfigError("sweep rho grid must be sorted");
    }
    for (double rho : rho_grid) {
      if (!(rho >= 0.0 && rho <= 1.0)) {
        throw ConfigError("sweep rho grid value outside [0,1]: " + detail::fmt_value(rho));
      }
    }
    if (strategies.empty()) throw ConfigError("sweep needs at least one strategy");
  }
};

/// Runs every (rho, strategy) point to tau_end and averages the trailing 10%
/// of samples. Rows are sorted by (rho, strategy, nu0).
inline std::vector<DiagramRow> fundamental_diagram(const SweepSpec& spec, unsigned workers = 1) {
  spec.validate();
  const std::size_t n_strat = spec.strategies.size();
  std::vector<DiagramRow> rows(spec.rho_grid.size() * n_strat);
  parallel_for(rows.size(), workers, [&](std::size_t job) {
    const double rho = spec.rho_grid[job / n_strat];
    const ControlStrategy& strategy = spec.strategies[job % n_strat];
    try {
      SimConfig cfg = spec.base;
      cfg.rho = Density(rho);
      cfg.strategy = strategy;
      cfg.tau_end = spec.tau_end;
      const MomentSample s = steady_state(run(cfg).series);
      rows[job] = {rho, strategy.kind(), strategy.nu0(), s.mean, rho * s.mean, s.variance};
    } catch (const std::exception& e) {
      throw std::runtime_error("sweep point rho=" + detail::fmt_value(rho) + " strategy=" +
                               std::string(to_string(strategy.kind())) + ": " + e.what());
    }
  });
  std::sort(rows.begin(), rows.end(), diagram_order);
  return rows;
}

// --- paired variance trajectories -------------------------------------------

struct ComparisonLeg {
  ControlStrategy strategy;
  MomentSeries series;
};

/// Unconstrained leg first, then one leg per nu0 of `family`. All legs share
/// the seed, so every leg sees the same initial ensemble and the same
/// interaction flags and partners (identical to paired_run leg by leg).
inline std::vector<ComparisonLeg> variance_comparison(const SimConfig& base,
                                                      const std::vector<double>& nu0_list,
                                                      unsigned workers = 1) {
  const ControlKind family =
      base.strategy.kind() == ControlKind::none ? ControlKind::binary_variance : base.strategy.kind();
  const DesiredSpeedSpec vd = base.strategy.vd().value_or(DesiredSpeedSpec{});
  std::vector<ComparisonLeg> legs{{ControlStrategy::none(), {}}};
  for (double nu0 : nu0_list) {
    if (std::isinf(nu0)) continue;
    legs.push_back({ControlStrategy::of_kind(family, nu0, vd), {}});
  }
  parallel_for(legs.size(), workers, [&](std::size_t k) {
    SimConfig cfg = base;
    cfg.strategy = legs[k].strategy;
    legs[k].series = run(cfg).series;
  });
  return legs;
}

// --- distribution evolution -------------------------------------------------

/// Histograms of the ensemble at the first step reaching each grid time.
inline HistogramGrid distribution_evolution(const SimConfig& cfg, std::size_t n_bins,
                                            const std::vector<double>& tau_grid,
                                            unsigned workers = 1) {
  cfg.validate();
  if (n_bins < 1) throw ConfigError("contours need at least one bin");
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end()) ||
      (!tau_grid.empty() && tau_grid.front() < 0.0)) {
    throw ConfigError("contour time grid must be sorted and non-negative");
  }
  HistogramGrid grid{unit_bin_edges(n_bins), {}};
  Ensemble ens = init_ensemble(cfg);
  Stepper stepper(cfg, workers);
  const double slack = 1e-9 * cfg.scaling.dtau;
  for (double tau : tau_grid) {
    while (ens.tau < tau - slack) stepper(ens);
    grid.slices.push_back(histogram(ens, n_bins));
  }
  return grid;
}

// --- monokinetic relaxation under desired-speed control ---------------------

/// V(tau) = v_d + (v0 - v_d) exp(-rho tau / (2 nu0)).
inline double relaxation_closed_form(double tau, double v0, double vd, double rho, double nu0) {
  return vd + (v0 - vd) * std::exp(-rho * tau / (2.0 * nu0));
}

struct RelaxationSpec {
  double v0 = 1.0;
  double vd = 0.4;
  double rho = 0.6;
  double nu0 = 0.1;
  double epsilon = 1e-3;
  double tau_end = 5.0;
  double tau_min = 0.1;  // error is measured for tau in [tau_min, tau_end]
  std::size_t n_particles = 64;
  std::size_t sample_stride = 1;
  std::uint64_t seed = 1;
  KernelParams kernel{};
};

struct RelaxationReport {
  MomentSeries measured;
  std::vector<double> closed_form;  // aligned with measured.samples
  double max_rel_error = 0.0;
  bool monokinetic = true;  // all speeds equal at every sample
};

/// Config used by the relaxation check: Dirac data, constant v_d and
/// dtau = 2 eps / rho so that every particle interacts at every step.
inline SimConfig relaxation_config(const RelaxationSpec& r) {
  SimConfig cfg;
  cfg.n_particles = r.n_particles;
  cfg.rho = Density(r.rho);
  cfg.kernel = r.kernel;
  cfg.scaling.epsilon = r.epsilon;
  cfg.scaling.dtau = r.rho > 0.0 ? 2.0 * r.epsilon / r.rho : r.epsilon;
  cfg.strategy = ControlStrategy::desired_speed(r.nu0, DesiredSpeedSpec::constant(r.vd));
  cfg.tau_end = r.tau_end;
  cfg.sample_stride = r.sample_stride;
  cfg.seed = r.seed;
  cfg.init = InitDist::dirac(r.v0);
  return cfg;
}

inline RelaxationReport relaxation_oracle(const RelaxationSpec& r) {
  detail::require_unit(r.v0, "v0");
  detail::require_unit(r.vd, "vd");
  RelaxationReport report;
  RunOptions opts;
  opts.observer = [&](const Ensemble& ens) {
    const double first = ens.speeds.front();
    for (double v : ens.speeds) {
      if (v != first) report.monokinetic = false;
    }
  };
  report.measured = run(relaxation_config(r), opts).series;
  for (const MomentSample& s : report.measured.samples) {
    const double exact = relaxation_closed_form(s.tau, r.v0, r.vd, r.rho, r.nu0);
    report.closed_form.push_back(exact);
    if (s.tau >= r.tau_min - 1e-12 && s.tau <= r.tau_end + 1e-12) {
      const double err = std::abs(s.mean - exact);
      report.max_rel_error =
          std::max(report.max_rel_error, exact != 0.0 ? err / std::abs(exact) : err);
    }
  }
  return report;
}

}  // namespace ktraffic
