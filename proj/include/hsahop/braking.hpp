#pragma once

// Static load holding: the leg motor resists a blocked force with torque
// (Joule heating, quadratic in force) while a jammed HSA resists it through the
// twist servo (empirically linear in force).

#include <algorithm>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "hsahop/actuator.hpp"
#include "hsahop/errors.hpp"
#include "hsahop/hsa_model.hpp"
#include "hsahop/statistics.hpp"

namespace hsahop {

struct BrakingConfig {
  double twist_gear_ratio = 4.0;
  double twist_linear_coefficient = 0.02;  // W/N at the 1:4 baseline
  double leg_moment_arm = 0.05;            // m/rad
  double hold_twist = 135.0;               // deg, servo frame
  bool worm_gear = false;                  // self-locking twist drive
  MotorParams motor{};
  HsaGeometry geometry{};

  void validate() const {
    if (!(twist_gear_ratio > 0.0)) throw ConfigError("braking: twist_gear_ratio must be > 0");
    if (!(twist_linear_coefficient > 0.0))
      throw ConfigError("braking: twist_linear_coefficient must be > 0");
    if (!(leg_moment_arm > 0.0)) throw ConfigError("braking: leg_moment_arm must be > 0");
    motor.validate();
  }
};

inline double leg_motor_holding_power(double force, const BrakingConfig& c) {
  if (!(force >= 0.0)) throw DomainError(fmt::format("blocked force must be >= 0, got {}", force));
  const double current = torque_to_current(force * c.leg_moment_arm, c.motor);
  return c.motor.winding_resistance * current * current;
}

inline double twist_motor_holding_power(double force, const BrakingConfig& c) {
  if (!(force >= 0.0)) throw DomainError(fmt::format("blocked force must be >= 0, got {}", force));
  if (!is_jammed(c.hold_twist, c.geometry))
    throw BrakeNotEngagedError(fmt::format("HSA at {} deg is below the jam twist {} deg",
                                           c.hold_twist, c.geometry.jam_twist));
  if (c.worm_gear) return 0.0;
  return c.twist_linear_coefficient * force * (4.0 / c.twist_gear_ratio);
}

struct BrakingSample {
  double blocked_force;      // N
  double leg_motor_power;    // W
  double twist_motor_power;  // W
};

struct BrakingSweep {
  std::vector<BrakingSample> samples;
  OriginFit leg_fit;    // P = c * F^2
  OriginFit twist_fit;  // P = c * F
  double crossover_force;        // N, closed form c_lin / c_quad
  double sweep_crossover_force;  // N, first grid force with twist < leg; NaN if none
};

/// Force at which the two holding powers are equal; above it the jammed HSA is cheaper.
inline double braking_crossover_force(const BrakingConfig& c) {
  const double kt = c.motor.output_torque_per_amp();
  const double quad = c.motor.winding_resistance * c.leg_moment_arm * c.leg_moment_arm / (kt * kt);
  const double lin = c.worm_gear ? 0.0 : c.twist_linear_coefficient * 4.0 / c.twist_gear_ratio;
  return lin / quad;
}

inline BrakingSweep braking_sweep(std::span<const double> forces, const BrakingConfig& c) {
  c.validate();
  std::vector<double> sorted(forces.begin(), forces.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 3)
    throw InputError("braking sweep needs at least 3 distinct forces");

  BrakingSweep out;
  std::vector<double> f, leg, twist;
  for (double force : forces) {
    BrakingSample s{force, 0.0, 0.0};
    try {
      s.leg_motor_power = leg_motor_holding_power(force, c);
    } catch (const SaturationError& e) {
      throw SaturationError(fmt::format("at blocked force {} N: {}", force, e.what()), e.clamped());
    }
    s.twist_motor_power = twist_motor_holding_power(force, c);
    out.samples.push_back(s);
    f.push_back(force);
    leg.push_back(s.leg_motor_power);
    twist.push_back(s.twist_motor_power);
  }
  out.leg_fit = fit_power_through_origin(f, leg, 2);
  out.twist_fit = fit_power_through_origin(f, twist, 1);
  out.crossover_force = braking_crossover_force(c);
  out.sweep_crossover_force = std::numeric_limits<double>::quiet_NaN();
  for (double force : sorted) {
    if (force > 0.0 && twist_motor_holding_power(force, c) < leg_motor_holding_power(force, c)) {
      out.sweep_crossover_force = force;
      break;
    }
  }
  return out;
}

}  // namespace hsahop
