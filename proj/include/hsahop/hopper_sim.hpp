#pragma once

// Hybrid stance/flight simulation of the cart-leg-HSA hopper.
//
// Generalized coordinates are the cart height y and the motor angle theta.
// In flight the cart is ballistic and the leg swings against the reflected
// rotor inertia plus the foot mass. In stance the foot is pinned, y equals the
// leg length x(theta), and the single remaining degree of freedom obeys
//
//   (M J^2 + I) theta_dd + M J J' theta_d^2 = tau + J (F_spring - M g)
//
// with J = dx/dtheta, I the reflected inertia and M = cart + added mass.
// Integration is fixed-step RK4; guard crossings are refined by bisection on
// the sub-step length so the step grid itself never moves.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <limits>
#include <string_view>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "hsahop/actuator.hpp"
#include "hsahop/controller.hpp"
#include "hsahop/energetics.hpp"
#include "hsahop/errors.hpp"
#include "hsahop/hsa_model.hpp"
#include "hsahop/leg_kinematics.hpp"
#include "hsahop/state.hpp"

namespace hsahop {

// ---------------------------------------------------------------------------
// Leg compliance models

template <class T>
concept LegCompliance = requires(const T& c, double x, double xdot) {
  { c.force(x, xdot) } -> std::convertible_to<double>;
  { c.twist() } -> std::convertible_to<double>;
};

// Baseline with the HSA removed.
struct NoCompliance {
  double force(double, double) const { return 0.0; }
  double twist() const { return 0.0; }
};

// Two-sided linear spring along the leg, F = k (rest - x).
struct LinearSpring {
  double stiffness = 1000.0;  // N/m
  double rest_length = 0.184;  // m

  double force(double x, double) const { return stiffness * (rest_length - x); }
  double twist() const { return 0.0; }
  double potential(double x) const {
    return 0.5 * stiffness * (rest_length - x) * (rest_length - x);
  }
};

struct HsaCompliance {
  HsaForceParams params{};
  double twist_deg = 0.0;  // servo frame

  double force(double x, double xdot) const {
    return hsa_force(hsa_state_from_leg(x, xdot, twist_deg, params.geometry), params);
  }
  double twist() const { return twist_deg; }
};

// ---------------------------------------------------------------------------
// Continuous dynamics

/// Stance leg acceleration. M_eff x_dd = F_motor + F_hsa - M g + I J' theta_d^2 / J^2,
/// where F_motor = tau / J and M_eff = M + I / J^2.
inline double stance_dynamics(const SimState& s, double motor_torque, double hsa_force,
                              const RobotParams& robot, const MotorParams& motor) {
  const double j = jacobian(s.motor_angle, robot);
  if (std::abs(j) < 1e-6)
    throw SingularityError(
        fmt::format("stance Jacobian {} m/rad too small at theta = {} rad", j, s.motor_angle));
  const double jp = jacobian_rate(s.motor_angle, robot);
  const double inertia = motor.reflected_inertia;
  const double m = robot.body_mass();
  const double m_eff = m + inertia / (j * j);
  const double velocity_term = inertia * jp * s.motor_rate * s.motor_rate / (j * j);
  return (motor_torque / j + hsa_force - m * robot.gravity + velocity_term) / m_eff;
}

inline double effective_mass(double theta, const RobotParams& robot, const MotorParams& motor) {
  const double j = jacobian(theta, robot);
  return robot.body_mass() + motor.reflected_inertia / (j * j);
}

struct FlightAccel {
  double cart_accel;   // m/s^2
  double motor_accel;  // rad/s^2
};

inline FlightAccel flight_dynamics(const SimState& s, double motor_torque, double hsa_force,
                                   const RobotParams& robot, const MotorParams& motor) {
  const double j = jacobian(s.motor_angle, robot);
  const double inertia = motor.reflected_inertia + robot.foot_mass * j * j;
  if (!(inertia > 0.0)) throw SingularityError("flight leg inertia vanishes");
  return {-robot.gravity, (motor_torque + hsa_force * j) / inertia};
}

struct ImpactResult {
  SimState state;
  double energy_loss;  // J
};

/// Perfectly inelastic touchdown. The ground impulse stops the foot; the
/// generalized momentum along the stance manifold is conserved, so the
/// post-impact leg rate is the inertia-weighted mix of cart and leg rates.
inline ImpactResult touchdown_impact(const SimState& s, const RobotParams& robot,
                                     const MotorParams& motor) {
  const double j = jacobian(s.motor_angle, robot);
  const double m = robot.body_mass();
  const double inertia = motor.reflected_inertia;
  const double foot_speed = s.cart_rate - j * s.motor_rate;
  const double ke_before = 0.5 * m * s.cart_rate * s.cart_rate +
                           0.5 * inertia * s.motor_rate * s.motor_rate +
                           0.5 * robot.foot_mass * foot_speed * foot_speed;
  const double stance_inertia = m * j * j + inertia;
  const double theta_rate = (m * j * s.cart_rate + inertia * s.motor_rate) / stance_inertia;

  ImpactResult r{s, 0.0};
  r.state.mode = Mode::Stance;
  r.state.phase = StancePhase::Compression;
  r.state.motor_rate = theta_rate;
  r.state.leg_length = leg_length(s.motor_angle, robot);
  r.state.leg_rate = j * theta_rate;
  r.state.cart_height = r.state.leg_length;
  r.state.cart_rate = r.state.leg_rate;
  const double ke_after = 0.5 * stance_inertia * theta_rate * theta_rate;
  r.energy_loss = std::max(0.0, ke_before - ke_after);
  return r;
}

/// Kinetic plus gravitational energy of the moving body (springs excluded).
inline double mechanical_energy(const SimState& s, const RobotParams& robot,
                                const MotorParams& motor) {
  const double m = robot.body_mass();
  double e = 0.5 * motor.reflected_inertia * s.motor_rate * s.motor_rate +
             0.5 * m * s.cart_rate * s.cart_rate + m * robot.gravity * s.cart_height;
  if (s.mode == Mode::Flight) {
    const double foot_speed = s.cart_rate - s.leg_rate;
    e += 0.5 * robot.foot_mass * foot_speed * foot_speed;
  }
  return e;
}

// ---------------------------------------------------------------------------
// Simulator

struct IntegratorConfig {
  double step = 1e-4;              // s
  double guard_tolerance = 1e-6;   // m (touchdown), N (liftoff), m/s (mid-stance)
  int max_bisection_iters = 60;

  void validate() const {
    if (!(step > 0.0)) throw ConfigError("integrator: step must be > 0");
    if (!(guard_tolerance > 0.0)) throw ConfigError("integrator: guard_tolerance must be > 0");
    if (max_bisection_iters < 1) throw ConfigError("integrator: max_bisection_iters must be >= 1");
  }
};

enum class EventKind { Touchdown, Liftoff };

inline std::string_view to_string(EventKind k) {
  return k == EventKind::Touchdown ? "Touchdown" : "Liftoff";
}

struct HybridEvent {
  EventKind kind;
  double time;         // s
  double residual;     // m for touchdown, N for liftoff
  double energy_loss;  // J dissipated by the transition
};

// One telemetry row plus the dynamics quantities behind it.
struct SimRecord {
  TelemetrySample sample;
  Mode mode;
  StancePhase phase;
  double cart_height;
  double cart_rate;
  double leg_length;
  double leg_rate;
  double leg_accel;
  double motor_accel;
  double hsa_force;
  double hsa_twist;
  double joint_power;
};

struct StepOutput {
  std::vector<HybridEvent> events;
  std::vector<SimRecord> records;           // time-ordered
  std::vector<std::size_t> event_records;   // records[event_records[k]] follows events[k]
  double midstance_time = std::numeric_limits<double>::quiet_NaN();
};

template <LegCompliance Spring>
struct HopperSetup {
  RobotParams robot{};
  MotorParams motor{};
  ControllerConfig controller{};
  Spring spring{};
  IntegratorConfig integrator{};
  double neutral_leg_length = 0.184;  // m
};

template <LegCompliance Spring>
class HopperSimulator {
 public:
  explicit HopperSimulator(HopperSetup<Spring> setup)
      : s_(std::move(setup)),
        ref_(make_leg_reference(s_.controller, s_.robot, s_.neutral_leg_length)) {
    s_.robot.validate();
    s_.motor.validate();
    s_.controller.validate();
    s_.integrator.validate();
  }

  const HopperSetup<Spring>& setup() const noexcept { return s_; }
  const LegReference& reference() const noexcept { return ref_; }
  const SimState& state() const noexcept { return state_; }

  /// Resting at the top of a drop: cart height = touchdown length + drop.
  SimState apex_state(double drop_height) const {
    SimState st;
    st.mode = Mode::Flight;
    st.motor_angle = s_.controller.touchdown_angle;
    st.leg_length = ref_.touchdown_length;
    st.cart_height = ref_.touchdown_length + drop_height;
    st.hsa_twist = s_.spring.twist();
    return st;
  }

  void reset(const SimState& st) {
    vec_ = {st.cart_height, st.cart_rate, st.motor_angle, st.motor_rate};
    mode_ = st.mode;
    phase_ = st.phase;
    t0_ = st.time;
    steps_ = 0;
    if (mode_ == Mode::Stance) project(vec_);
    state_ = make_state(mode_, phase_, vec_, st.time);
  }

  SimRecord current_record() const { return record(mode_, phase_, vec_, state_.time); }

  /// Advances one fixed step, handling any guard crossings inside it.
  const StepOutput& step() {
    out_.events.clear();
    out_.records.clear();
    out_.event_records.clear();
    out_.midstance_time = std::numeric_limits<double>::quiet_NaN();

    const double dt = s_.integrator.step;
    const double t_start = state_.time;
    const double t_end = t0_ + static_cast<double>(steps_ + 1) * dt;
    double elapsed = 0.0;
    int transitions = 0;
    while (true) {
      const double remaining = dt - elapsed;
      Vec v1 = rk4(vec_, remaining);
      Eval e1 = evaluate(mode_, phase_, v1);
      if (remaining <= 0.0 || !triggered(v1, e1)) {
        vec_ = v1;
        break;
      }
      // Bisection on the sub-step length.
      double lo = 0.0, hi = remaining;
      Vec vhi = v1;
      Eval ehi = e1;
      int it = 0;
      while (std::abs(residual(vhi, ehi)) >= s_.integrator.guard_tolerance &&
             it < s_.integrator.max_bisection_iters) {
        const double mid = 0.5 * (lo + hi);
        Vec vm = rk4(vec_, mid);
        Eval em = evaluate(mode_, phase_, vm);
        if (triggered(vm, em)) {
          hi = mid;
          vhi = vm;
          ehi = em;
        } else {
          lo = mid;
        }
        ++it;
      }
      const double res = residual(vhi, ehi);
      if (std::abs(res) >= s_.integrator.guard_tolerance)
        throw IntegratorError(fmt::format(
            "guard refinement failed in {} ({}) at t = {:.9f} s: residual {:.3e} after {} "
            "bisections, bracket [{:.3e}, {:.3e}] s",
            to_string(mode_), phase_ == StancePhase::Compression ? "compression" : "push-off",
            t_start + elapsed, res, it, lo, hi));
      vec_ = vhi;
      elapsed += hi;
      transition(std::min(t_start + elapsed, t_end), res);
      if (++transitions > 16)
        throw IntegratorError(
            fmt::format("more than 16 mode transitions within one step at t = {:.9f} s",
                        t_start + elapsed));
    }
    ++steps_;
    if (mode_ == Mode::Stance) project(vec_);
    state_ = make_state(mode_, phase_, vec_, t_end);
    out_.records.push_back(record(mode_, phase_, vec_, t_end));
    return out_;
  }

 private:
  using Vec = std::array<double, 4>;  // y, y_dot, theta, theta_dot

  struct Eval {
    double x, xdot, xddot;
    double ydot, yddot;
    double thddot;
    double torque;
    double spring_force;
  };

  SimState make_state(Mode mode, StancePhase phase, const Vec& v, double t) const {
    SimState st;
    st.mode = mode;
    st.phase = phase;
    st.motor_angle = v[2];
    st.motor_rate = v[3];
    st.leg_length = leg_length(v[2], s_.robot);
    st.leg_rate = jacobian(v[2], s_.robot) * v[3];
    st.cart_height = mode == Mode::Stance ? st.leg_length : v[0];
    st.cart_rate = mode == Mode::Stance ? st.leg_rate : v[1];
    st.hsa_twist = s_.spring.twist();
    st.time = t;
    return st;
  }

  void project(Vec& v) const {
    v[0] = leg_length(v[2], s_.robot);
    v[1] = jacobian(v[2], s_.robot) * v[3];
  }

  Eval evaluate(Mode mode, StancePhase phase, const Vec& v) const {
    const SimState st = make_state(mode, phase, v, 0.0);
    Eval e{};
    e.x = st.leg_length;
    e.xdot = st.leg_rate;
    e.spring_force = s_.spring.force(e.x, e.xdot);
    e.torque = commanded_torque(st, s_.controller, ref_, s_.motor);
    const double jp = jacobian_rate(v[2], s_.robot);
    if (mode == Mode::Stance) {
      e.xddot = stance_dynamics(st, e.torque, e.spring_force, s_.robot, s_.motor);
      e.thddot = (e.xddot - jp * v[3] * v[3]) / jacobian(v[2], s_.robot);
      e.ydot = e.xdot;
      e.yddot = e.xddot;
    } else {
      const FlightAccel a = flight_dynamics(st, e.torque, e.spring_force, s_.robot, s_.motor);
      e.thddot = a.motor_accel;
      e.xddot = jacobian(v[2], s_.robot) * a.motor_accel + jp * v[3] * v[3];
      e.ydot = v[1];
      e.yddot = a.cart_accel;
    }
    return e;
  }

  Vec derivative(const Vec& v) const {
    const Eval e = evaluate(mode_, phase_, v);
    return {e.ydot, e.yddot, v[3], e.thddot};
  }

  Vec rk4(const Vec& v, double h) const {
    auto axpy = [](const Vec& a, double s, const Vec& b) {
      return Vec{a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]};
    };
    const Vec k1 = derivative(v);
    const Vec k2 = derivative(axpy(v, 0.5 * h, k1));
    const Vec k3 = derivative(axpy(v, 0.5 * h, k2));
    const Vec k4 = derivative(axpy(v, h, k3));
    Vec r;
    for (std::size_t i = 0; i < 4; ++i)
      r[i] = v[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return r;
  }

  double ground_force(const Vec& v, const Eval& e) const {
    return e.spring_force + e.torque / jacobian(v[2], s_.robot);
  }

  double residual(const Vec& v, const Eval& e) const {
    if (mode_ == Mode::Flight) return v[0] - e.x;
    if (phase_ == StancePhase::Compression) return e.xdot;
    return ground_force(v, e);
  }

  bool triggered(const Vec& v, const Eval& e) const {
    if (mode_ == Mode::Flight) return v[0] - e.x <= 0.0 && v[1] - e.xdot < 0.0;
    if (phase_ == StancePhase::Compression) return e.xdot >= 0.0;
    return ground_force(v, e) <= 0.0;
  }

  void transition(double t, double res) {
    out_.records.push_back(record(mode_, phase_, vec_, t));
    if (mode_ == Mode::Flight) {
      const ImpactResult imp = touchdown_impact(make_state(mode_, phase_, vec_, t), s_.robot, s_.motor);
      mode_ = Mode::Stance;
      phase_ = StancePhase::Compression;
      vec_ = {imp.state.cart_height, imp.state.cart_rate, imp.state.motor_angle,
              imp.state.motor_rate};
      out_.events.push_back({EventKind::Touchdown, t, res, imp.energy_loss});
      if (imp.state.leg_rate >= 0.0) {
        phase_ = StancePhase::Pushoff;
        out_.midstance_time = t;
      }
    } else if (phase_ == StancePhase::Compression) {
      phase_ = StancePhase::Pushoff;
      out_.midstance_time = t;
      out_.records.push_back(record(mode_, phase_, vec_, t));
      return;
    } else {
      mode_ = Mode::Flight;
      project(vec_);  // cart leaves with the leg's height and rate
      out_.events.push_back({EventKind::Liftoff, t, res, 0.0});
    }
    out_.event_records.push_back(out_.records.size());
    out_.records.push_back(record(mode_, phase_, vec_, t));
  }

  SimRecord record(Mode mode, StancePhase phase, const Vec& v, double t) const {
    const Eval e = evaluate(mode, phase, v);
    SimRecord r{};
    r.sample = make_sample(t, v[2], v[3], e.torque, s_.motor);
    r.mode = mode;
    r.phase = phase;
    r.cart_height = mode == Mode::Stance ? e.x : v[0];
    r.cart_rate = mode == Mode::Stance ? e.xdot : v[1];
    r.leg_length = e.x;
    r.leg_rate = e.xdot;
    r.leg_accel = e.xddot;
    r.motor_accel = e.thddot;
    r.hsa_force = e.spring_force;
    r.hsa_twist = s_.spring.twist();
    r.joint_power = joint_power({v[3], e.thddot, e.xdot, e.xddot}, s_.motor.reflected_inertia,
                                s_.robot.body_mass(), s_.robot.gravity);
    return r;
  }

  HopperSetup<Spring> s_;
  LegReference ref_;
  Vec vec_{};
  Mode mode_ = Mode::Flight;
  StancePhase phase_ = StancePhase::Compression;
  double t0_ = 0.0;
  long long steps_ = 0;
  SimState state_{};
  StepOutput out_;
};

// ---------------------------------------------------------------------------
// Multi-hop runs

struct RunOptions {
  int n_hops = 64;
  int transient_discard = 5;
  double initial_drop = 0.052;   // m above touchdown length
  double stance_budget = 2.0;    // s without liftoff before declaring a stall
  double flight_budget = 5.0;    // s without touchdown
  double min_apex = 1e-3;        // m; smaller hops count as a stall
  double regen_efficiency = 1.0;
  bool cot_include_foot_mass = false;
  bool keep_telemetry = false;
};

struct HopRun {
  std::vector<HopSummary> hops;
  std::vector<SimRecord> telemetry;  // summarized hops only, when requested
  std::vector<HybridEvent> events;

  double mean_apex() const {
    double s = 0.0;
    for (const auto& h : hops) s += h.apex_height;
    return hops.empty() ? 0.0 : s / static_cast<double>(hops.size());
  }
  double mean_period() const {
    double s = 0.0;
    for (const auto& h : hops) s += h.period();
    return hops.empty() ? 0.0 : s / static_cast<double>(hops.size());
  }
  double hop_frequency() const { return hops.empty() ? 0.0 : 1.0 / mean_period(); }
  double mean_spring_efficiency() const {
    double s = 0.0;
    for (const auto& h : hops) s += h.spring_efficiency;
    return hops.empty() ? std::numeric_limits<double>::quiet_NaN()
                        : s / static_cast<double>(hops.size());
  }
};

namespace detail {

struct OpenHop {
  std::vector<SimRecord> records;
  double touchdown_time = 0.0;
  double liftoff_time = std::numeric_limits<double>::quiet_NaN();
  double liftoff_rate = 0.0;
  double impact_loss = 0.0;
  bool open = false;
};

template <LegCompliance Spring>
HopSummary summarize_hop(const OpenHop& hop, double next_touchdown,
                         const HopperSetup<Spring>& setup, const RunOptions& opt) {
  std::vector<TelemetrySample> samples;
  std::vector<double> pj;
  samples.reserve(hop.records.size());
  pj.reserve(hop.records.size());
  for (const auto& r : hop.records) {
    samples.push_back(r.sample);
    pj.push_back(r.joint_power);
  }
  HopSummary h;
  const double g = setup.robot.gravity;
  h.apex_height = hop.liftoff_rate > 0.0 ? hop.liftoff_rate * hop.liftoff_rate / (2.0 * g) : 0.0;
  h.stance_duration = hop.liftoff_time - hop.touchdown_time;
  h.flight_duration = next_touchdown - hop.liftoff_time;
  h.ledger = integrate_ledger(samples, hop.impact_loss, opt.regen_efficiency);
  try {
    h.spring_efficiency =
        spring_efficiency(samples, pj, {hop.touchdown_time, hop.liftoff_time}).eta;
  } catch (const UndefinedEfficiencyError&) {
    h.spring_efficiency = std::numeric_limits<double>::quiet_NaN();
  }
  if (h.apex_height > 0.0) {
    double mass = setup.robot.body_mass();
    if (opt.cot_include_foot_mass) mass += setup.robot.foot_mass;
    assign_cot(h, mass, g);
  }
  return h;
}

}  // namespace detail

/// Drops the hopper from rest, discards the transient hops and summarizes the
/// next n_hops. A hop runs from one touchdown to the next.
template <LegCompliance Spring>
HopRun run_hops(const HopperSetup<Spring>& setup, const RunOptions& opt) {
  HopRun run;
  if (opt.n_hops <= 0) return run;
  HopperSimulator<Spring> sim(setup);
  sim.reset(sim.apex_state(opt.initial_drop));

  const int total = opt.transient_discard + opt.n_hops;
  int completed = 0;
  detail::OpenHop hop;
  double last_liftoff = 0.0;

  while (completed < total) {
    const StepOutput& out = sim.step();
    std::size_t next_event = 0;
    for (std::size_t i = 0; i < out.records.size(); ++i) {
      const bool boundary =
          next_event < out.event_records.size() && out.event_records[next_event] == i;
      if (boundary) {
        const HybridEvent& ev = out.events[next_event++];
        run.events.push_back(ev);
        if (ev.kind == EventKind::Touchdown) {
          if (hop.open) {
            HopSummary h = detail::summarize_hop(hop, ev.time, setup, opt);
            if (h.apex_height < opt.min_apex)
              throw StallError(fmt::format("hop {} reached only {:.2e} m apex", completed + 1,
                                           h.apex_height));
            ++completed;
            if (completed > opt.transient_discard) {
              run.hops.push_back(h);
              if (opt.keep_telemetry)
                run.telemetry.insert(run.telemetry.end(), hop.records.begin(), hop.records.end());
            }
            if (completed >= total) {
              hop.open = false;
              break;
            }
          }
          hop.records.clear();
          hop.open = true;
          hop.touchdown_time = ev.time;
          hop.impact_loss = ev.energy_loss;
          hop.liftoff_time = std::numeric_limits<double>::quiet_NaN();
        } else {
          hop.liftoff_time = ev.time;
          hop.liftoff_rate = out.records[i].cart_rate;
          last_liftoff = ev.time;
        }
      }
      if (hop.open) hop.records.push_back(out.records[i]);
    }
    const SimState& st = sim.state();
    if (st.mode == Mode::Stance && hop.open && st.time - hop.touchdown_time > opt.stance_budget)
      throw StallError(fmt::format("no liftoff within {} s of touchdown at t = {:.4f} s",
                                   opt.stance_budget, hop.touchdown_time));
    if (st.mode == Mode::Flight && st.time - last_liftoff > opt.flight_budget)
      throw StallError(fmt::format("no touchdown within {} s of flight", opt.flight_budget));
  }
  return run;
}

}  // namespace hsahop
