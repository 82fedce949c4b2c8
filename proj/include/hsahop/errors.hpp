#pragma once

#include <stdexcept>
#include <string>

namespace hsahop {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An argument lies outside the domain of a model or formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (files, series, sample sets).
class InputError : public Error {
 public:
  using Error::Error;
};

// Unknown keys, bad types or violated invariants in a configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Requested torque beyond the actuator rating. Carries the clamped value.
class SaturationError : public Error {
 public:
  SaturationError(const std::string& what, double clamped)
      : Error(what), clamped_(clamped) {}
  double clamped() const noexcept { return clamped_; }

 private:
  double clamped_;
};

// Jacobian too small to map a joint torque to a leg force.
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Base for failures detected while running the hybrid simulation.
class SimulationError : public Error {
 public:
  using Error::Error;
};

class IntegratorError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

// The hopper never left the ground within the stance time budget.
class StallError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class BrakeNotEngagedError : public Error {
 public:
  using Error::Error;
};

// A calibration target is unreachable, or the monotone premise broke.
class CalibrationError : public Error {
 public:
  CalibrationError(const std::string& what, double achieved_low,
                   double achieved_high)
      : Error(what), low_(achieved_low), high_(achieved_high) {}
  double achieved_low() const noexcept { return low_; }
  double achieved_high() const noexcept { return high_; }

 private:
  double low_;
  double high_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class UndefinedEfficiencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace hsahop
