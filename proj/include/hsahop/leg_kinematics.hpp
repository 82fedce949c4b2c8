#pragma once

// Crank-slider closure of the leg: the thigh pivots on the motor axis and the
// shank drives the foot along the vertical through that axis.
//
//   x(theta) = a cos(theta) + sqrt(b^2 - a^2 sin^2(theta)),  a = thigh, b = shank
//
// theta = 0 is full extension (a + b); theta = pi is fully folded (b - a).
// On (0, pi) the leg length is strictly decreasing in theta.

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "hsahop/errors.hpp"

namespace hsahop {

struct RobotParams {
  double thigh_length = 0.07;  // m
  double shank_length = 0.15;  // m
  double rod_length = 0.30;    // m
  double cart_mass = 1.1;      // kg
  double foot_mass = 0.2;      // kg
  double added_mass = 0.0;     // kg
  double gravity = 9.81;       // m/s^2

  void validate() const {
    if (!(thigh_length > 0.0 && shank_length > thigh_length))
      throw ConfigError("robot: require 0 < thigh_length < shank_length");
    if (!(cart_mass >= 0.0 && foot_mass >= 0.0 && added_mass >= 0.0))
      throw ConfigError("robot: masses must be >= 0");
    if (!(cart_mass + added_mass > 0.0)) throw ConfigError("robot: body mass must be > 0");
    if (!(gravity >= 0.0)) throw ConfigError("robot: gravity must be >= 0");
  }

  // Mass carried by the leg in stance.
  double body_mass() const { return cart_mass + added_mass; }
  double min_leg_length() const { return shank_length - thigh_length; }
  double max_leg_length() const { return shank_length + thigh_length; }
};

namespace detail {
inline double closure_root(double theta, const RobotParams& p) {
  const double a = p.thigh_length, b = p.shank_length;
  const double as = a * std::sin(theta);
  const double r2 = b * b - as * as;
  if (!(r2 > 0.0))
    throw DomainError(fmt::format("crank-slider singular at theta = {} rad", theta));
  return std::sqrt(r2);
}
}  // namespace detail

inline double leg_length(double theta, const RobotParams& p) {
  return p.thigh_length * std::cos(theta) + detail::closure_root(theta, p);
}

/// dx/dtheta.
inline double jacobian(double theta, const RobotParams& p) {
  const double a = p.thigh_length;
  const double s = std::sin(theta), c = std::cos(theta);
  const double r = detail::closure_root(theta, p);
  return -a * s - a * a * s * c / r;
}

/// d^2x/dtheta^2.
inline double jacobian_rate(double theta, const RobotParams& p) {
  const double a = p.thigh_length;
  const double s = std::sin(theta), c = std::cos(theta);
  const double r = detail::closure_root(theta, p);
  const double a2 = a * a;
  return -a * c - a2 * (c * c - s * s) / r - a2 * a2 * s * s * c * c / (r * r * r);
}

/// Branch theta in [0, pi] with leg_length(theta) == x.
inline double inverse_kinematics(double x, const RobotParams& p) {
  const double a = p.thigh_length, b = p.shank_length;
  if (!(x >= p.min_leg_length() && x <= p.max_leg_length()))
    throw DomainError(fmt::format("leg length {} m outside reachable range [{}, {}]", x,
                                  p.min_leg_length(), p.max_leg_length()));
  // Law of cosines on the thigh/shank/leg triangle.
  const double c = (x * x + a * a - b * b) / (2.0 * a * x);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace hsahop
