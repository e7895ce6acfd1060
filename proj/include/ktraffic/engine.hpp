#pragma once

// Stochastic particle solver for the scaled Boltzmann-type equation
//
//   d/dtau <phi, g> = rho/(2 eps) <<phi(v') - phi(v), g g>>
//
// Each step of length dtau lets every particle (follower) interact with
// probability p = rho dtau / (2 eps) with a leader drawn uniformly among the
// other N-1 particles. Leader speeds are read from the pre-step state and
// only the follower changes. The binary rule uses dt = eps, nu = nu0 eps.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ktraffic/control.hpp"
#include "ktraffic/errors.hpp"
#include "ktraffic/kernel.hpp"
#include "ktraffic/observables.hpp"
#include "ktraffic/parallel.hpp"
#include "ktraffic/random.hpp"

namespace ktraffic {

struct InitDist {
  enum class Kind { uniform01, dirac, truncated_gaussian };

  Kind kind = Kind::uniform01;
  double v0 = 0.0;      // dirac
  double mean = 0.5;    // truncated_gaussian
  double stddev = 0.1;  // truncated_gaussian

  static InitDist uniform01() { return {}; }
  static InitDist dirac(double v0) { return {Kind::dirac, v0, 0.5, 0.1}; }
  static InitDist truncated_gaussian(double mean, double stddev) {
    return {Kind::truncated_gaussian, 0.0, mean, stddev};
  }

  void validate() const {
    switch (kind) {
      case Kind::uniform01: break;
      case Kind::dirac: detail::require_unit(v0, "init.v0"); break;
      case Kind::truncated_gaussian:
        detail::require_unit(mean, "init.mean");
        if (!(stddev > 0.0) || !std::isfinite(stddev)) {
          throw DomainError("init.stddev must be positive, got " + detail::fmt_value(stddev));
        }
        break;
    }
  }

  friend bool operator==(const InitDist&, const InitDist&) = default;
};

struct ScalingParams {
  double epsilon = 1e-2;  // binary time step and quasi-invariant scale
  double dtau = 1e-2;     // simulation step in kinetic time

  static ScalingParams with_epsilon(double eps) { return {eps, eps}; }
  friend bool operator==(const ScalingParams&, const ScalingParams&) = default;
};

struct SimConfig {
  std::size_t n_particles = 10000;
  Density rho{};
  KernelParams kernel{};
  ScalingParams scaling{};
  ControlStrategy strategy = ControlStrategy::none();
  double tau_end = 10.0;
  std::size_t sample_stride = 1;
  std::uint64_t seed = 1;
  InitDist init{};

  /// Per-particle interaction probability per step, rho dtau / (2 eps).
  double interaction_probability() const {
    return rho.value() * scaling.dtau / (2.0 * scaling.epsilon);
  }

  void validate() const;

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

inline void SimConfig::validate() const {
  if (n_particles < 2) throw ConfigError("sim.n_particles must be at least 2");
  kernel.validate();
  init.validate();
  if (!(scaling.epsilon > 0.0 && scaling.epsilon <= 1.0)) {
    throw ConfigError("scaling.epsilon must lie in (0,1], got " +
                      detail::fmt_value(scaling.epsilon));
  }
  if (!(scaling.dtau > 0.0) || !std::isfinite(scaling.dtau)) {
    throw ConfigError("scaling.dtau must be positive, got " + detail::fmt_value(scaling.dtau));
  }
  const double p = interaction_probability();
  if (p > 1.0 + kBoundTolerance) {
    throw ConfigError("interaction probability rho*dtau/(2*epsilon) = " + detail::fmt_value(p) +
                      " violates p <= 1");
  }
  if (!(tau_end >= 0.0) || !std::isfinite(tau_end)) {
    throw ConfigError("sim.tau_end must be non-negative, got " + detail::fmt_value(tau_end));
  }
  if (sample_stride < 1) throw ConfigError("sim.sample_stride must be at least 1");
  if (strategy.kind() == ControlKind::desired_speed && !strategy.vd()) {
    throw ConfigError("desired-speed control needs a desired speed");
  }
}

/// Number of steps needed to reach tau_end.
inline std::uint64_t steps_to(double tau_end, double dtau) {
  if (tau_end <= 0.0) return 0;
  return static_cast<std::uint64_t>(std::ceil(tau_end / dtau - 1e-9));
}

/// Binary rule with the quasi-invariant scaling dt = eps, nu = nu0 eps applied.
inline BinaryRule make_rule(const SimConfig& cfg) {
  const ControlStrategy& s = cfg.strategy;
  const double eps = cfg.scaling.epsilon;
  const double vd = s.vd() ? resolve_vd(*s.vd(), cfg.rho).value() : 0.0;
  return BinaryRule(s.kind(), s.nu0() * eps, vd, cfg.rho, cfg.kernel, eps);
}

inline Ensemble init_ensemble(const SimConfig& cfg) {
  cfg.init.validate();
  Ensemble ens;
  ens.speeds.resize(cfg.n_particles);
  const random::CounterRng rng(cfg.seed, random::Stream::init);
  const InitDist& init = cfg.init;
  for (std::size_t i = 0; i < cfg.n_particles; ++i) {
    switch (init.kind) {
      case InitDist::Kind::uniform01:
        ens.speeds[i] = random::to_unit(rng.words(i, 0)[0]);
        break;
      case InitDist::Kind::dirac:
        ens.speeds[i] = init.v0;
        break;
      case InitDist::Kind::truncated_gaussian: {
        constexpr std::uint64_t kMaxAttempts = 1'000'000;
        std::uint64_t attempt = 0;
        for (;; ++attempt) {
          if (attempt == kMaxAttempts) {
            throw DomainError("truncated gaussian rejection did not terminate");
          }
          const auto [a, b] = rng.words(i, attempt);
          const double radius = std::sqrt(-2.0 * std::log1p(-random::to_unit(a)));
          const double v =
              init.mean + init.stddev * radius * std::cos(2.0 * std::numbers::pi * random::to_unit(b));
          if (v >= 0.0 && v <= 1.0) {
            ens.speeds[i] = v;
            break;
          }
        }
        break;
      }
    }
  }
  return ens;
}

namespace detail {

// Visits every (follower, leader) pair that interacts during step
// `step_index`. Draws depend only on (seed, step_index, follower).
template <class Visit>
void for_each_interaction(const random::CounterRng& rng, std::uint64_t step_index,
                          std::size_t n, double p, unsigned workers, Visit&& visit) {
  if (p <= 0.0) return;
  const std::uint64_t others = n - 1;
  parallel_chunks(n, workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [flag_bits, partner_bits] = rng.words(i, step_index);
      if (!(random::to_unit(flag_bits) < p)) continue;
      std::size_t j = random::to_index(partner_bits, others);
      if (j >= i) ++j;
      visit(i, j);
    }
  });
}

inline double checked_probability(const SimConfig& cfg) {
  const double p = cfg.interaction_probability();
  if (p > 1.0 + kBoundTolerance) {
    throw ConfigError("interaction probability rho*dtau/(2*epsilon) = " + fmt_value(p) +
                      " violates p <= 1");
  }
  return std::abs(p - 1.0) <= kBoundTolerance ? 1.0 : p;
}

}  // namespace detail

/// Advances one or several ensembles that share the interaction draws.
class Stepper {
 public:
  Stepper(const SimConfig& cfg, unsigned workers = 1)
      : rng_(cfg.seed, random::Stream::interaction),
        rule_(make_rule(cfg)),
        p_(detail::checked_probability(cfg)),
        dtau_(cfg.scaling.dtau),
        workers_(workers) {}

  void operator()(Ensemble& ens) {
    if (p_ > 0.0) {
      previous_ = ens.speeds;
      detail::for_each_interaction(rng_, ens.steps, ens.size(), p_, workers_,
                                   [&](std::size_t i, std::size_t j) {
                                     ens.speeds[i] = rule_(previous_[i], previous_[j]);
                                   });
    }
    advance_clock(ens);
  }

  /// Steps two ensembles with identical interaction flags and partners.
  /// Both must be at the same step; `other` uses its own rule.
  void paired(Ensemble& a, Stepper& other, Ensemble& b) {
    if (a.steps != b.steps || a.size() != b.size()) {
      throw std::logic_error("paired ensembles out of sync");
    }
    if (p_ > 0.0) {
      previous_ = a.speeds;
      other.previous_ = b.speeds;
      detail::for_each_interaction(rng_, a.steps, a.size(), p_, workers_,
                                   [&](std::size_t i, std::size_t j) {
                                     a.speeds[i] = rule_(previous_[i], previous_[j]);
                                     b.speeds[i] = other.rule_(other.previous_[i],
                                                               other.previous_[j]);
                                   });
    }
    advance_clock(a);
    advance_clock(b);
  }

  const BinaryRule& rule() const noexcept { return rule_; }
  double probability() const noexcept { return p_; }

 private:
  void advance_clock(Ensemble& ens) const {
    ++ens.steps;
    ens.tau = static_cast<double>(ens.steps) * dtau_;
  }

  random::CounterRng rng_;
  BinaryRule rule_;
  double p_;
  double dtau_;
  unsigned workers_;
  std::vector<double> previous_;
};

/// Advances `ens` by one step of length dtau.
inline void step(Ensemble& ens, const SimConfig& cfg, unsigned workers = 1) {
  if (ens.size() < 2) throw ConfigError("ensemble needs at least 2 particles");
  Stepper stepper(cfg, workers);
  stepper(ens);
}

struct RunOptions {
  unsigned workers = 1;
  bool keep_snapshots = false;
  /// Called with the ensemble at every sampled step, including step 0.
  std::function<void(const Ensemble&)> observer;
};

struct RunResult {
  MomentSeries series;
  std::vector<Ensemble> snapshots;  // filled when keep_snapshots
};

namespace detail {

inline bool is_sample_step(std::uint64_t s, std::uint64_t total, std::size_t stride) {
  return s % stride == 0 || s == total;
}

}  // namespace detail

/// Steps until tau >= tau_end, sampling every `sample_stride` steps and at
/// the final step.
inline RunResult run(const SimConfig& cfg, const RunOptions& opts = {}) {
  cfg.validate();
  RunResult result;
  Ensemble ens = init_ensemble(cfg);
  auto record = [&] {
    result.series.samples.push_back(moments(ens));
    if (opts.keep_snapshots) result.snapshots.push_back(ens);
    if (opts.observer) opts.observer(ens);
  };
  record();
  Stepper stepper(cfg, opts.workers);
  const std::uint64_t total = steps_to(cfg.tau_end, cfg.scaling.dtau);
  for (std::uint64_t s = 1; s <= total; ++s) {
    stepper(ens);
    if (detail::is_sample_step(s, total, cfg.sample_stride)) record();
  }
  return result;
}

inline bool differ_only_in_strategy(SimConfig a, const SimConfig& b) {
  a.strategy = b.strategy;
  return a == b;
}

/// Runs two configurations from the same initial ensemble with the same
/// interaction flags and partners at every step (common random numbers).
inline std::pair<MomentSeries, MomentSeries> paired_run(const SimConfig& cfg_a,
                                                        const SimConfig& cfg_b,
                                                        unsigned workers = 1) {
  if (!differ_only_in_strategy(cfg_a, cfg_b)) {
    throw ConfigError("paired_run configurations must differ only in strategy");
  }
  cfg_a.validate();
  cfg_b.validate();
  Ensemble a = init_ensemble(cfg_a);
  Ensemble b = a;
  std::pair<MomentSeries, MomentSeries> out;
  auto record = [&] {
    out.first.samples.push_back(moments(a));
    out.second.samples.push_back(moments(b));
  };
  record();
  Stepper step_a(cfg_a, workers);
  Stepper step_b(cfg_b, workers);
  const std::uint64_t total = steps_to(cfg_a.tau_end, cfg_a.scaling.dtau);
  for (std::uint64_t s = 1; s <= total; ++s) {
    step_a.paired(a, step_b, b);
    if (detail::is_sample_step(s, total, cfg_a.sample_stride)) record();
  }
  return out;
}

}  // namespace ktraffic
