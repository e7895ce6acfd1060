#pragma once

// Microscopic binary interaction between a follower (speed v) and its
// leader (speed w). Speeds and densities are dimensionless, in [0,1].

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "ktraffic/errors.hpp"

namespace ktraffic {

// Round-off allowance when saturating an updated speed back into [0,1].
inline constexpr double kBoundTolerance = 1e-12;

namespace detail {

inline std::string fmt_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline double require_unit(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError(std::string(what) + " must lie in [0,1], got " + fmt_value(x));
  }
  return x;
}

}  // namespace detail

/// Dimensionless speed in [0,1].
class UnitSpeed {
 public:
  constexpr UnitSpeed() = default;
  explicit UnitSpeed(double v) : value_(detail::require_unit(v, "speed")) {}
  constexpr double value() const noexcept { return value_; }
  friend constexpr bool operator==(UnitSpeed, UnitSpeed) = default;

 private:
  double value_ = 0.0;
};

/// Dimensionless macroscopic density in [0,1].
class Density {
 public:
  constexpr Density() = default;
  explicit Density(double rho) : value_(detail::require_unit(rho, "density")) {}
  constexpr double value() const noexcept { return value_; }
  friend constexpr bool operator==(Density, Density) = default;

 private:
  double value_ = 0.0;
};

struct KernelParams {
  double gamma = 1.0;    // exponent of the acceleration probability
  double delta_v = 0.2;  // speed increment on acceleration

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw DomainError("gamma must be positive, got " + detail::fmt_value(gamma));
    }
    if (!(delta_v > 0.0) || !std::isfinite(delta_v)) {
      throw DomainError("delta_v must be positive, got " + detail::fmt_value(delta_v));
    }
  }

  friend bool operator==(const KernelParams&, const KernelParams&) = default;
};

inline void require_time_step(double dt) {
  if (!(dt > 0.0 && dt <= 1.0)) {
    throw DomainError("time step must lie in (0,1], got " + detail::fmt_value(dt));
  }
}

/// Saturates x into [0,1]. Excursions beyond kBoundTolerance are bugs.
inline double saturate_unit(double x) {
  if (x < -kBoundTolerance || x > 1.0 + kBoundTolerance || std::isnan(x)) {
    throw BoundViolation("updated speed left [0,1]: " + detail::fmt_value(x));
  }
  return std::clamp(x, 0.0, 1.0);
}

/// P(rho) = 1 - rho^gamma.
inline double acceleration_probability(Density rho, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw DomainError("gamma must be positive, got " + detail::fmt_value(gamma));
  }
  return 1.0 - std::pow(rho.value(), gamma);
}

namespace detail {

// Interaction function with P(rho) precomputed; no validation.
inline double interaction(double v, double w, double p_acc, double delta_v) noexcept {
  if (v < w) return p_acc * (std::min(v + delta_v, 1.0) - v);
  if (v > w) return (1.0 - p_acc) * (p_acc * w - v);
  return 0.0;
}

}  // namespace detail

/// Follower's acceleration response I(v,w;rho). Zero when v == w.
inline double interaction_function(UnitSpeed v, UnitSpeed w, Density rho,
                                   const KernelParams& kp) {
  kp.validate();
  const double p = acceleration_probability(rho, kp.gamma);
  return detail::interaction(v.value(), w.value(), p, kp.delta_v);
}

/// v' = v + dt * I(v,w;rho). The leader is never modified.
inline UnitSpeed unconstrained_update(UnitSpeed v, UnitSpeed w, double dt, Density rho,
                                      const KernelParams& kp) {
  require_time_step(dt);
  const double i = interaction_function(v, w, rho, kp);
  return UnitSpeed(saturate_unit(v.value() + dt * i));
}

}  // namespace ktraffic
