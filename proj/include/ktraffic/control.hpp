#pragma once

// Closed-form feedback controls for the one-interaction horizon and the
// resulting constrained binary update rules.
//
// With beta = dt^2 / (nu + dt^2) both constrained schemes read
//   v' = v + (nu dt / (nu + dt^2)) I(v,w;rho) + beta (target - v)
// where target is the leader speed w (binary variance) or v_d (desired speed).

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "ktraffic/kernel.hpp"

namespace ktraffic {

/// Control penalisation nu > 0 (unscaled).
class Penalization {
 public:
  explicit Penalization(double nu) : nu_(nu) {
    if (!(nu > 0.0) || std::isnan(nu)) {
      throw DomainError("penalisation must be positive, got " + detail::fmt_value(nu));
    }
  }
  double value() const noexcept { return nu_; }

 private:
  double nu_;
};

struct DesiredSpeedSpec {
  enum class Mode { constant, linear_congestion };

  Mode mode = Mode::linear_congestion;
  double value = 0.0;  // used in constant mode only

  static DesiredSpeedSpec constant(double vd) {
    detail::require_unit(vd, "desired speed");
    return {Mode::constant, vd};
  }
  static DesiredSpeedSpec linear_congestion() { return {Mode::linear_congestion, 0.0}; }

  friend bool operator==(const DesiredSpeedSpec&, const DesiredSpeedSpec&) = default;
};

/// v_d for the given density: the constant, or 1 - rho.
inline UnitSpeed resolve_vd(const DesiredSpeedSpec& spec, Density rho) {
  if (spec.mode == DesiredSpeedSpec::Mode::constant) return UnitSpeed(spec.value);
  return UnitSpeed(1.0 - rho.value());
}

enum class ControlKind { none, binary_variance, desired_speed };

inline std::string_view to_string(ControlKind kind) {
  switch (kind) {
    case ControlKind::none: return "none";
    case ControlKind::binary_variance: return "variance";
    case ControlKind::desired_speed: return "desired";
  }
  return "?";
}

/// Strategy selection. nu0 is the kinetic-scale penalisation; the binary
/// penalisation is nu0 * epsilon.
class ControlStrategy {
 public:
  static ControlStrategy none() { return ControlStrategy(); }

  static ControlStrategy binary_variance(double nu0) {
    ControlStrategy s;
    s.kind_ = ControlKind::binary_variance;
    s.nu0_ = Penalization(nu0).value();
    return s;
  }

  static ControlStrategy desired_speed(double nu0, DesiredSpeedSpec vd) {
    ControlStrategy s;
    s.kind_ = ControlKind::desired_speed;
    s.nu0_ = Penalization(nu0).value();
    s.vd_ = vd;
    return s;
  }

  /// Family `kind` with penalisation nu0; an infinite nu0 means no control.
  static ControlStrategy of_kind(ControlKind kind, double nu0, DesiredSpeedSpec vd = {}) {
    if (kind == ControlKind::none || std::isinf(nu0)) return none();
    if (kind == ControlKind::binary_variance) return binary_variance(nu0);
    return desired_speed(nu0, vd);
  }

  ControlKind kind() const noexcept { return kind_; }
  /// +inf for the unconstrained strategy.
  double nu0() const noexcept { return nu0_; }
  const std::optional<DesiredSpeedSpec>& vd() const noexcept { return vd_; }

  friend bool operator==(const ControlStrategy&, const ControlStrategy&) = default;

 private:
  ControlStrategy() = default;

  ControlKind kind_ = ControlKind::none;
  double nu0_ = std::numeric_limits<double>::infinity();
  std::optional<DesiredSpeedSpec> vd_;
};

/// The two weights of the constrained schemes.
struct ControlWeights {
  double drift;  // nu dt / (nu + dt^2), multiplies I
  double pull;   // dt^2 / (nu + dt^2), multiplies (target - v)
};

inline ControlWeights control_weights(double dt, double nu) noexcept {
  const double denom = nu + dt * dt;
  return {nu * dt / denom, dt * dt / denom};
}

namespace detail {

inline double feedback(double v, double target, double dt, double nu, double i) noexcept {
  const double denom = nu + dt * dt;
  return dt / denom * (target - v) - dt * dt / denom * i;
}

inline double interaction_checked(UnitSpeed v, UnitSpeed w, double dt, Density rho,
                                  const KernelParams& kp) {
  require_time_step(dt);
  return interaction_function(v, w, rho, kp);
}

}  // namespace detail

/// u = dt/(nu+dt^2) (w-v) - dt^2/(nu+dt^2) I.
inline double variance_feedback(UnitSpeed v, UnitSpeed w, double dt, Penalization nu,
                                Density rho, const KernelParams& kp) {
  const double i = detail::interaction_checked(v, w, dt, rho, kp);
  return detail::feedback(v.value(), w.value(), dt, nu.value(), i);
}

/// u = dt/(nu+dt^2) (v_d-v) - dt^2/(nu+dt^2) I.
inline double desired_feedback(UnitSpeed v, UnitSpeed vd, UnitSpeed w, double dt,
                               Penalization nu, Density rho, const KernelParams& kp) {
  const double i = detail::interaction_checked(v, w, dt, rho, kp);
  return detail::feedback(v.value(), vd.value(), dt, nu.value(), i);
}

inline UnitSpeed constrained_update_variance(UnitSpeed v, UnitSpeed w, double dt,
                                             Penalization nu, Density rho,
                                             const KernelParams& kp) {
  const double i = detail::interaction_checked(v, w, dt, rho, kp);
  const auto [drift, pull] = control_weights(dt, nu.value());
  return UnitSpeed(saturate_unit(v.value() + drift * i + pull * (w.value() - v.value())));
}

inline UnitSpeed constrained_update_desired(UnitSpeed v, UnitSpeed w, UnitSpeed vd, double dt,
                                            Penalization nu, Density rho,
                                            const KernelParams& kp) {
  const double i = detail::interaction_checked(v, w, dt, rho, kp);
  const auto [drift, pull] = control_weights(dt, nu.value());
  return UnitSpeed(saturate_unit(v.value() + drift * i + pull * (vd.value() - v.value())));
}

/// Binary rule with every parameter resolved for one run; the engine's hot
/// path. The control value is fixed per interaction, so each call evaluates
/// I once and applies the fused scheme.
class BinaryRule {
 public:
  /// `nu` is ignored for ControlKind::none and `vd` unless desired_speed.
  BinaryRule(ControlKind kind, double nu, double vd, Density rho, const KernelParams& kp,
             double dt)
      : kind_(kind), delta_v_(kp.delta_v) {
    kp.validate();
    require_time_step(dt);
    p_acc_ = acceleration_probability(rho, kp.gamma);
    if (kind_ == ControlKind::none) {
      weights_ = {dt, 0.0};
    } else {
      weights_ = control_weights(dt, Penalization(nu).value());
    }
    if (kind_ == ControlKind::desired_speed) vd_ = UnitSpeed(vd).value();
  }

  double operator()(double v, double w) const {
    const double i = detail::interaction(v, w, p_acc_, delta_v_);
    const double target = kind_ == ControlKind::desired_speed ? vd_ : w;
    const double gap = kind_ == ControlKind::none ? 0.0 : target - v;
    return saturate_unit(v + weights_.drift * i + weights_.pull * gap);
  }

  ControlKind kind() const noexcept { return kind_; }
  ControlWeights weights() const noexcept { return weights_; }
  double desired_speed() const noexcept { return vd_; }

 private:
  ControlKind kind_;
  double p_acc_ = 1.0;
  double delta_v_;
  ControlWeights weights_{};
  double vd_ = 0.0;
};

}  // namespace ktraffic
