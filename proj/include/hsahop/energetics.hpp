#pragma once

// Energy ledgers, cost of transport and spring efficiency over telemetry.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

#include <fmt/format.h>

#include "hsahop/actuator.hpp"
#include "hsahop/errors.hpp"

namespace hsahop {

struct EnergyLedger {
  double thermal_energy = 0.0;       // J
  double positive_motor_work = 0.0;  // J
  double negative_motor_work = 0.0;  // J, <= 0
  double impact_losses = 0.0;        // J
  double regen_efficiency = 1.0;     // fraction of negative work credited back
  double net_electrical = 0.0;       // J

  double net_mechanical() const {
    return positive_motor_work + regen_efficiency * negative_motor_work;
  }
};

namespace detail {
inline void check_time_order(std::span<const TelemetrySample> t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i].time < t[i - 1].time)
      throw InputError(fmt::format("telemetry not time-ordered at sample {} ({} s after {} s)", i,
                                   t[i].time, t[i - 1].time));
}
}  // namespace detail

/// Trapezoidal integration of thermal power and of the positive and negative
/// parts of mechanical power.
inline EnergyLedger integrate_ledger(std::span<const TelemetrySample> t, double impact_losses,
                                     double regen_efficiency = 1.0) {
  if (!(regen_efficiency >= 0.0 && regen_efficiency <= 1.0))
    throw DomainError("regen efficiency must lie in [0, 1]");
  if (impact_losses < 0.0) throw DomainError("impact losses must be >= 0");
  detail::check_time_order(t);
  EnergyLedger l;
  l.impact_losses = impact_losses;
  l.regen_efficiency = regen_efficiency;
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double dt = t[i].time - t[i - 1].time;
    const double p0 = t[i - 1].mechanical_power, p1 = t[i].mechanical_power;
    l.thermal_energy += 0.5 * dt * (t[i - 1].thermal_power + t[i].thermal_power);
    l.positive_motor_work += 0.5 * dt * (std::max(0.0, p0) + std::max(0.0, p1));
    l.negative_motor_work += 0.5 * dt * (std::min(0.0, p0) + std::min(0.0, p1));
  }
  l.net_electrical = l.thermal_energy + l.net_mechanical();
  return l;
}

/// Vertical-hop cost of transport E / (m g h).
inline double cost_of_transport(double electrical_energy, double mass, double height,
                                double gravity = 9.81) {
  if (!(height > 0.0)) throw DomainError(fmt::format("COT needs height > 0, got {}", height));
  if (!(mass > 0.0)) throw DomainError(fmt::format("COT needs mass > 0, got {}", mass));
  return electrical_energy / (mass * gravity * height);
}

// Joint-side motion at one instant of stance, accelerations taken from the
// dynamics rather than from differentiated telemetry.
struct JointMotion {
  double motor_rate = 0.0;   // rad/s
  double motor_accel = 0.0;  // rad/s^2
  double leg_rate = 0.0;     // m/s
  double leg_accel = 0.0;    // m/s^2
};

/// P_joint = (J theta_dd) theta_d + M (x_dd + g) x_d, M = cart + added mass.
inline double joint_power(const JointMotion& q, double reflected_inertia, double body_mass,
                          double gravity = 9.81) {
  return reflected_inertia * q.motor_accel * q.motor_rate +
         body_mass * (q.leg_accel + gravity) * q.leg_rate;
}

struct StanceWindow {
  double begin;  // s
  double end;    // s
};

struct SpringEfficiency {
  double eta;
  double motor_positive_work;  // J
  double joint_positive_work;  // J
  bool consistent;             // eta in [0, 1] and motor share <= joint share
};

/// eta = 1 - int max(0, P_motor) / int max(0, P_joint) over the stance window.
/// joint_power[i] belongs to telemetry[i].
inline SpringEfficiency spring_efficiency(std::span<const TelemetrySample> telemetry,
                                          std::span<const double> joint_power,
                                          const StanceWindow& w) {
  if (telemetry.size() != joint_power.size())
    throw InputError("spring efficiency: telemetry and joint power series differ in length");
  if (telemetry.empty() || telemetry.front().time > w.begin + 1e-12 ||
      telemetry.back().time < w.end - 1e-12)
    throw InputError("spring efficiency: series do not cover the stance window");
  detail::check_time_order(telemetry);
  double motor = 0.0, joint = 0.0;
  for (std::size_t i = 1; i < telemetry.size(); ++i) {
    const double t0 = telemetry[i - 1].time, t1 = telemetry[i].time;
    if (t0 < w.begin || t1 > w.end) continue;
    const double dt = t1 - t0;
    motor += 0.5 * dt *
             (std::max(0.0, telemetry[i - 1].mechanical_power) +
              std::max(0.0, telemetry[i].mechanical_power));
    joint += 0.5 * dt * (std::max(0.0, joint_power[i - 1]) + std::max(0.0, joint_power[i]));
  }
  if (!(joint > 0.0))
    throw UndefinedEfficiencyError("spring efficiency undefined: no positive joint work in stance");
  const double eta = 1.0 - motor / joint;
  return {eta, motor, joint, eta >= 0.0 && eta <= 1.0};
}

struct HopSummary {
  double apex_height = 0.0;      // m, ballistic rise above the liftoff height
  double stance_duration = 0.0;  // s
  double flight_duration = 0.0;  // s
  EnergyLedger ledger{};
  double cot_total = 0.0;
  double cot_thermal = 0.0;
  double cot_mechanical = 0.0;
  double spring_efficiency = 0.0;  // NaN when undefined

  double period() const { return stance_duration + flight_duration; }
};

/// COT split from a ledger; cot_total is the sum of the two parts.
inline void assign_cot(HopSummary& h, double mass, double gravity) {
  h.cot_thermal = cost_of_transport(h.ledger.thermal_energy, mass, h.apex_height, gravity);
  h.cot_mechanical = cost_of_transport(h.ledger.net_mechanical(), mass, h.apex_height, gravity);
  h.cot_total = h.cot_thermal + h.cot_mechanical;
}

}  // namespace hsahop
