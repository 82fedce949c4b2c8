#pragma once

#include <string_view>

namespace hsahop {

enum class Mode { Stance, Flight };
enum class StancePhase { Compression, Pushoff };

inline std::string_view to_string(Mode m) { return m == Mode::Stance ? "Stance" : "Flight"; }

// Hybrid state of the cart-leg system. In stance the foot is pinned, so
// cart_height == leg_length and cart_rate == leg_rate.
struct SimState {
  Mode mode = Mode::Flight;
  StancePhase phase = StancePhase::Compression;
  double cart_height = 0.0;  // m
  double cart_rate = 0.0;    // m/s
  double leg_length = 0.0;   // m
  double leg_rate = 0.0;     // m/s
  double motor_angle = 0.0;  // rad
  double motor_rate = 0.0;   // rad/s
  double hsa_twist = 0.0;    // deg, servo frame
  double time = 0.0;         // s
};

}  // namespace hsahop
