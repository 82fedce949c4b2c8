#pragma once

// Quasi-direct-drive leg motor: torque/current map, rating clamps and the
// thermal + mechanical electrical power split.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hsahop/errors.hpp"

namespace hsahop {

// Motor side torque constant from a velocity constant given in rpm/V.
constexpr double torque_constant_from_kv(double kv_rpm_per_volt) {
  return 60.0 / (2.0 * std::numbers::pi * kv_rpm_per_volt);
}

struct MotorParams {
  double winding_resistance = 0.143;                     // ohm
  double torque_constant = torque_constant_from_kv(105);  // N m / A, motor side
  double gear_ratio = 6.0;
  double reflected_inertia = 3.5e-3;  // kg m^2 at the output
  double peak_torque = 16.0;          // N m at the output
  double peak_power = 500.0;          // W
  double supply_voltage = 24.0;       // V

  void validate() const {
    if (!(winding_resistance > 0 && torque_constant > 0 && gear_ratio > 0 &&
          reflected_inertia >= 0 && peak_torque > 0 && peak_power > 0 && supply_voltage > 0))
      throw ConfigError("motor parameters must be strictly positive");
  }

  // Output torque per winding amp.
  double output_torque_per_amp() const { return gear_ratio * torque_constant; }
};

struct TelemetrySample {
  double time = 0.0;             // s
  double joint_angle = 0.0;      // rad
  double joint_rate = 0.0;       // rad/s
  double joint_torque = 0.0;     // N m
  double current = 0.0;          // A
  double thermal_power = 0.0;    // W
  double mechanical_power = 0.0; // W
  double electrical_power = 0.0; // W
};

inline double torque_to_current(double joint_torque, const MotorParams& m) {
  if (std::abs(joint_torque) > m.peak_torque)
    throw SaturationError(
        fmt::format("joint torque {} N m exceeds peak rating {} N m", joint_torque, m.peak_torque),
        std::copysign(m.peak_torque, joint_torque));
  return joint_torque / m.output_torque_per_amp();
}

struct PowerSplit {
  double thermal;     // W, R I^2
  double mechanical;  // W, tau * theta_dot (negative = regenerating)
  double electrical;  // W, thermal + mechanical
};

/// P_elec = R I^2 + tau * theta_dot, with negative mechanical power fully credited.
inline PowerSplit electrical_power(double joint_torque, double joint_rate, const MotorParams& m) {
  const double current = torque_to_current(joint_torque, m);
  const double thermal = m.winding_resistance * current * current;
  const double mechanical = joint_torque * joint_rate;
  return {thermal, mechanical, thermal + mechanical};
}

/// Limits |torque| to the peak torque and to peak_power / |rate|. Sign preserved.
inline double clamp_command(double requested_torque, double joint_rate, const MotorParams& m) {
  double limit = m.peak_torque;
  if (joint_rate != 0.0) limit = std::min(limit, m.peak_power / std::abs(joint_rate));
  return std::clamp(requested_torque, -limit, limit);
}

inline TelemetrySample make_sample(double time, double angle, double rate, double torque,
                                   const MotorParams& m) {
  const PowerSplit p = electrical_power(torque, rate, m);
  return {time, angle, rate, torque, torque_to_current(torque, m), p.thermal, p.mechanical,
          p.electrical};
}

}  // namespace hsahop
