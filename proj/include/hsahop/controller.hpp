#pragma once

// Two-mode hybrid PD hopping controller.
//
// Flight: PD on the motor angle toward the touchdown angle.
// Stance: pure damping while the leg compresses, then a fixed push-off torque
// once the leg starts extending, applied while the leg is shorter than its
// touchdown length. The virtual-compliance variant replaces the HSA with a
// joint-space spring whose task-space stiffness at the neutral pose matches
// virtual_stiffness.

#include <cmath>
#include <string_view>

#include <fmt/format.h>

#include "hsahop/actuator.hpp"
#include "hsahop/errors.hpp"
#include "hsahop/leg_kinematics.hpp"
#include "hsahop/state.hpp"

namespace hsahop {

enum class ComplianceSource { PhysicalHsa, VirtualCompliance };

inline std::string_view to_string(ComplianceSource c) {
  return c == ComplianceSource::PhysicalHsa ? "PhysicalHsa" : "VirtualCompliance";
}

struct ControllerConfig {
  double flight_kp = 11.0;   // N m / rad
  double flight_kd = 0.45;   // N m s / rad
  double touchdown_angle = inverse_kinematics(0.184, RobotParams{});  // rad
  double pushoff_torque = 2.171875;  // N m
  double stance_kd = 0.08;      // N m s / rad
  double virtual_stiffness = 912.0;  // N/m
  ComplianceSource compliance_source = ComplianceSource::PhysicalHsa;

  void validate() const {
    if (flight_kp < 0 || flight_kd < 0 || stance_kd < 0)
      throw ConfigError("controller: gains must be >= 0");
    if (pushoff_torque < 0) throw ConfigError("controller: pushoff_torque must be >= 0");
    if (compliance_source == ComplianceSource::VirtualCompliance && !(virtual_stiffness > 0))
      throw ConfigError("controller: virtual_stiffness must be > 0 for virtual compliance");
  }
};

// Pose-dependent constants the stance law needs.
struct LegReference {
  double touchdown_length;    // m
  double neutral_angle;       // rad
  double virtual_joint_gain;  // N m / rad
};

inline LegReference make_leg_reference(const ControllerConfig& c, const RobotParams& robot,
                                       double neutral_leg_length) {
  LegReference ref{};
  ref.touchdown_length = leg_length(c.touchdown_angle, robot);
  ref.neutral_angle = inverse_kinematics(neutral_leg_length, robot);
  const double arm = jacobian(ref.neutral_angle, robot);
  ref.virtual_joint_gain = c.virtual_stiffness * arm * arm;
  return ref;
}

inline double flight_torque(const SimState& s, const ControllerConfig& c) {
  return c.flight_kp * (c.touchdown_angle - s.motor_angle) - c.flight_kd * s.motor_rate;
}

/// Requested stance torque (before actuator clamping).
inline double stance_torque(const SimState& s, const ControllerConfig& c, StancePhase phase,
                            const LegReference& ref) {
  double tau = 0.0;
  if (c.compliance_source == ComplianceSource::VirtualCompliance)
    tau += ref.virtual_joint_gain * (ref.neutral_angle - s.motor_angle);
  if (phase == StancePhase::Compression) {
    tau -= c.stance_kd * s.motor_rate;
  } else if (s.leg_length < ref.touchdown_length) {
    // Negative torque lowers theta, which lengthens the leg.
    tau -= c.pushoff_torque;
  }
  return tau;
}

inline double commanded_torque(const SimState& s, const ControllerConfig& c,
                               const LegReference& ref, const MotorParams& m) {
  const double raw =
      s.mode == Mode::Flight ? flight_torque(s, c) : stance_torque(s, c, s.phase, ref);
  return clamp_command(raw, s.motor_rate, m);
}

struct PushoffCalibration {
  double torque;  // N m
  double apex;    // m
  int iterations;
};

struct PushoffSearch {
  double max_torque = 16.0;  // N m
  double tolerance = 2e-4;   // m on the apex
  int max_iterations = 40;
};

/// Bisection on push-off torque so that apex_of(torque) == target_apex.
/// apex_of should report 0 for torques that do not sustain hopping.
/// apex_of must be non-decreasing in torque; a violation aborts.
template <class ApexOracle>
PushoffCalibration calibrate_pushoff(double target_apex, ApexOracle&& apex_of,
                                     const PushoffSearch& opt = {}) {
  double lo = 0.0, hi = opt.max_torque;
  double apex_lo = apex_of(lo);
  if (apex_lo >= target_apex - opt.tolerance) {
    if (apex_lo > target_apex + opt.tolerance)
      throw CalibrationError(
          fmt::format("apex target {:.4f} m below the unpowered apex {:.4f} m", target_apex,
                      apex_lo),
          apex_lo, apex_lo);
    return {0.0, apex_lo, 0};
  }
  double apex_hi = apex_of(hi);
  if (apex_hi < target_apex - opt.tolerance)
    throw CalibrationError(
        fmt::format("apex target {:.4f} m unreachable: push-off in [0, {}] N m gives apex in "
                    "[{:.4f}, {:.4f}] m",
                    target_apex, hi, apex_lo, apex_hi),
        apex_lo, apex_hi);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double apex = apex_of(mid);
    if (apex < apex_lo - 1e-9 || apex > apex_hi + 1e-9)
      throw CalibrationError(
          fmt::format("apex not monotone in push-off: apex({:.5f})={:.5f} outside [{:.5f}, {:.5f}]",
                      mid, apex, apex_lo, apex_hi),
          apex_lo, apex_hi);
    if (std::abs(apex - target_apex) <= opt.tolerance) return {mid, apex, it};
    if (apex < target_apex) {
      lo = mid;
      apex_lo = apex;
    } else {
      hi = mid;
      apex_hi = apex;
    }
  }
  throw CalibrationError(
      fmt::format("push-off bisection did not reach {:.4f} m within {} iterations", target_apex,
                  opt.max_iterations),
      apex_lo, apex_hi);
}

}  // namespace hsahop
