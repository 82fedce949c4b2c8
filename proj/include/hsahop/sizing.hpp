#pragma once

// Spring-mass sizing: stiffness needed to reach a hop height with a given
// compression, and the resulting stance/flight split.

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hsahop/errors.hpp"

namespace hsahop {

struct DesignPoint {
  double mass = 0.0;         // kg
  double hop_height = 0.0;   // m
  double compression = 0.0;  // m
  double stiffness = 0.0;    // N/m
  double frequency = 0.0;    // Hz
  double stance_time = 0.0;  // s
  double flight_time = 0.0;  // s
};

namespace detail {
inline void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw DomainError(fmt::format("{} must be > 0, got {}", name, v));
}
}  // namespace detail

/// K = 2 m g (h + dx) / dx^2: spring energy at full compression lifts the body by h + dx.
inline double required_stiffness(double mass, double height, double compression,
                                 double gravity = 9.81) {
  detail::require_positive(mass, "mass");
  detail::require_positive(compression, "compression");
  detail::require_positive(gravity, "gravity");
  if (!(height >= 0.0)) throw DomainError(fmt::format("height must be >= 0, got {}", height));
  return 2.0 * mass * gravity * (height + compression) / (compression * compression);
}

inline double flight_time(double height, double gravity = 9.81) {
  if (!(height >= 0.0)) throw DomainError(fmt::format("height must be >= 0, got {}", height));
  return 2.0 * std::sqrt(2.0 * height / gravity);
}

inline double stance_time(double mass, double stiffness) {
  detail::require_positive(mass, "mass");
  detail::require_positive(stiffness, "stiffness");
  return std::numbers::pi * std::sqrt(mass / stiffness);
}

inline double hop_frequency(double mass, double stiffness, double height, double gravity = 9.81) {
  detail::require_positive(height, "height");
  return 1.0 / (flight_time(height, gravity) + stance_time(mass, stiffness));
}

inline DesignPoint design_point(double mass, double height, double compression,
                                double gravity = 9.81) {
  detail::require_positive(height, "height");
  DesignPoint p{mass, height, compression, required_stiffness(mass, height, compression, gravity)};
  p.stance_time = stance_time(mass, p.stiffness);
  p.flight_time = flight_time(height, gravity);
  p.frequency = 1.0 / (p.stance_time + p.flight_time);
  return p;
}

struct DesignRequirements {
  double min_stroke = 0.05;           // m
  double nominal_stiffness = 1000.0;  // N/m
  double stiffness_band = 0.15;       // relative half-width around nominal
  double load_factor = 1.5;           // safety factor on K * min_stroke
  double available_stroke = 0.05;     // m, of the spring element
  double load_rating = 75.0;          // N, of the spring element
};

struct RequirementCheck {
  std::string name;
  double required;
  double actual;
  bool pass;
};

struct DesignReport {
  std::vector<RequirementCheck> checks;
  double required_load;  // N

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

inline DesignReport verify_design(const DesignPoint& p, const DesignRequirements& r) {
  DesignReport rep;
  rep.required_load = r.load_factor * p.stiffness * r.min_stroke;
  rep.checks.push_back({"stroke", r.min_stroke, r.available_stroke,
                        r.available_stroke >= r.min_stroke});
  const double rel = std::abs(p.stiffness - r.nominal_stiffness) / r.nominal_stiffness;
  rep.checks.push_back({"stiffness", r.nominal_stiffness, p.stiffness, rel <= r.stiffness_band});
  rep.checks.push_back({"load", rep.required_load, r.load_rating,
                        r.load_rating >= rep.required_load});
  return rep;
}

}  // namespace hsahop
