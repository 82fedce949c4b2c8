#pragma once

// Handed shearing auxetic (HSA) spring-brake model.
//
// The HSA behaves as a tension-only Kelvin-Voigt element whose stiffness is
// looked up on a measured (twist, extension) grid. Twisting it far enough in
// the contracting direction jams it against an inner cylinder, which is the
// brake state.
//
// Two twist frames are in play:
//   * servo twist: positive in the contracting (jamming) direction. This is
//     what HsaState::twist, is_jammed() and the braking module use.
//   * sweep twist: the signed rotation of the characterization sweep that
//     indexes StiffnessSurface. The default sweep runs from -150 to +120 deg
//     and its jammed region sits at the negative end.
// HsaGeometry::sweep_sign maps one onto the other.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "hsahop/errors.hpp"

namespace hsahop {

struct HsaGeometry {
  double rest_length = 0.116;         // m, printed part incl. mounting
  double neutral_leg_length = 0.184;  // m, leg length where the HSA is unloaded
  double rod_length = 0.30;           // m
  double max_stroke = 0.05;           // m
  double load_limit = 75.0;           // N
  double jam_twist = 135.0;           // deg, servo frame
  double sweep_sign = -1.0;           // sweep twist = sweep_sign * servo twist

  void validate() const {
    if (!(rest_length > 0.0)) throw ConfigError("hsa geometry: rest_length must be > 0");
    if (!(max_stroke > 0.0 && max_stroke < neutral_leg_length))
      throw ConfigError("hsa geometry: require 0 < max_stroke < neutral_leg_length");
    if (!(load_limit > 0.0)) throw ConfigError("hsa geometry: load_limit must be > 0");
    if (!(rod_length > neutral_leg_length))
      throw ConfigError("hsa geometry: rod_length must exceed neutral_leg_length");
    if (sweep_sign != 1.0 && sweep_sign != -1.0)
      throw ConfigError("hsa geometry: sweep_sign must be +1 or -1");
  }

  double sweep_twist(double servo_twist_deg) const { return sweep_sign * servo_twist_deg; }
};

// Stiffness (N/m) sampled on an ascending sweep-twist x extension grid.
class StiffnessSurface {
 public:
  StiffnessSurface(std::vector<double> twist_grid, std::vector<double> displacement_grid,
                   std::vector<double> stiffness)
      : twist_(std::move(twist_grid)),
        disp_(std::move(displacement_grid)),
        k_(std::move(stiffness)) {
    check_axis(twist_, "twist");
    check_axis(disp_, "displacement");
    if (k_.size() != twist_.size() * disp_.size())
      throw InputError(fmt::format("stiffness surface: expected {}x{} values, got {}",
                                   twist_.size(), disp_.size(), k_.size()));
    for (double v : k_)
      if (!(v > 0.0) || !std::isfinite(v))
        throw InputError("stiffness surface: every stiffness value must be finite and > 0");
  }

  const std::vector<double>& twist_grid() const noexcept { return twist_; }
  const std::vector<double>& displacement_grid() const noexcept { return disp_; }
  const std::vector<double>& values() const noexcept { return k_; }

  double at(std::size_t twist_index, std::size_t disp_index) const {
    return k_[twist_index * disp_.size() + disp_index];
  }

  double min_value() const { return *std::min_element(k_.begin(), k_.end()); }
  double max_value() const { return *std::max_element(k_.begin(), k_.end()); }

  // Mean over every node whose sweep twist is strictly positive.
  double positive_twist_mean() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < twist_.size(); ++i) {
      if (twist_[i] <= 0.0) continue;
      for (std::size_t j = 0; j < disp_.size(); ++j) {
        sum += at(i, j);
        ++n;
      }
    }
    if (n == 0) throw DomainError("stiffness surface has no positive-twist nodes");
    return sum / static_cast<double>(n);
  }

 private:
  static void check_axis(const std::vector<double>& axis, const char* name) {
    if (axis.size() < 2)
      throw InputError(fmt::format("stiffness surface: {} grid needs >= 2 nodes", name));
    for (std::size_t i = 1; i < axis.size(); ++i)
      if (!(axis[i] > axis[i - 1]))
        throw InputError(fmt::format("stiffness surface: {} grid not strictly ascending at index {}",
                                     name, i));
  }

  std::vector<double> twist_;
  std::vector<double> disp_;
  std::vector<double> k_;
};

namespace detail {

// Cell index and local coordinate for a query inside [axis.front(), axis.back()].
inline std::pair<std::size_t, double> locate(const std::vector<double>& axis, double q) {
  auto it = std::upper_bound(axis.begin(), axis.end(), q);
  std::size_t hi = static_cast<std::size_t>(it - axis.begin());
  if (hi >= axis.size()) hi = axis.size() - 1;  // q == back()
  if (hi == 0) hi = 1;
  std::size_t lo = hi - 1;
  return {lo, (q - axis[lo]) / (axis[hi] - axis[lo])};
}

}  // namespace detail

/// Bilinear interpolation of the surface at (sweep twist in deg, extension in m).
/// Exact at grid nodes; no extrapolation.
inline double stiffness_at(const StiffnessSurface& surface, double twist_deg, double extension) {
  const auto& tg = surface.twist_grid();
  const auto& dg = surface.displacement_grid();
  if (!(twist_deg >= tg.front() && twist_deg <= tg.back()))
    throw DomainError(fmt::format("stiffness query twist {} deg outside grid [{}, {}]", twist_deg,
                                  tg.front(), tg.back()));
  if (!(extension >= dg.front() && extension <= dg.back()))
    throw DomainError(fmt::format("stiffness query extension {} m outside grid [{}, {}]",
                                  extension, dg.front(), dg.back()));
  auto [i, u] = detail::locate(tg, twist_deg);
  auto [j, v] = detail::locate(dg, extension);
  if (u == 0.0 && v == 0.0) return surface.at(i, j);
  return (1.0 - u) * (1.0 - v) * surface.at(i, j) + u * (1.0 - v) * surface.at(i + 1, j) +
         (1.0 - u) * v * surface.at(i, j + 1) + u * v * surface.at(i + 1, j + 1);
}

// Shape constants of the synthetic default surface.
struct DefaultSurfaceShape {
  double peak = 16100.0;            // N/m at the fully jammed, fully stretched corner
  double peak_to_min = 21.0;
  double positive_mean = 912.0;     // N/m over positive sweep twist
  double jam_center = 135.0;        // deg of contracting twist at half rise
  double jam_width = 2.0;           // deg, logistic width
  double soften_start = -90.0;      // deg sweep twist where the plateau begins
  double stroke_gain = 0.02;        // relative stiffening across the stroke
};

/// Smooth parametric stand-in for the measured grid: flat at the positive-twist
/// mean for expanding twist, easing down to a low plateau, then a logistic
/// rise into the jammed region.
inline StiffnessSurface default_stiffness_surface(const DefaultSurfaceShape& s = {}) {
  std::vector<double> twist;
  for (int i = 0; i <= 27; ++i) twist.push_back(-150.0 + 10.0 * i);
  std::vector<double> disp;
  for (int j = 0; j <= 10; ++j) disp.push_back(0.005 * j);
  const double stroke = disp.back();

  auto logistic = [](double z) { return 1.0 / (1.0 + std::exp(-z)); };
  const double min_value = s.peak / s.peak_to_min;
  const double plateau = min_value / (1.0 - 0.5 * s.stroke_gain);
  const double corner_rise = logistic((-twist.front() - s.jam_center) / s.jam_width);
  const double jammed =
      plateau + (s.peak / (1.0 + 0.5 * s.stroke_gain) - plateau) / corner_rise;

  std::vector<double> k;
  k.reserve(twist.size() * disp.size());
  for (double t : twist) {
    double u = std::clamp((t - s.soften_start) / -s.soften_start, 0.0, 1.0);
    double ease = u * u * (3.0 - 2.0 * u);
    double base = plateau + (s.positive_mean - plateau) * ease +
                  (jammed - plateau) * logistic((-t - s.jam_center) / s.jam_width);
    for (double d : disp) k.push_back(base * (1.0 + s.stroke_gain * (d / stroke - 0.5)));
  }
  return StiffnessSurface(std::move(twist), std::move(disp), std::move(k));
}

// Grid file: first row holds the displacement grid (m) after a corner cell,
// first column the sweep twist grid (deg). Separators: comma, tab or spaces.
// Lines starting with '#' are comments.
namespace detail {

inline std::vector<std::string> split_cells(const std::string& line) {
  std::string s = line;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::replace(s.begin(), s.end(), '\t', ' ');
  std::replace(s.begin(), s.end(), ';', ' ');
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string c; is >> c;) out.push_back(c);
  return out;
}

inline bool parse_number(const std::string& cell, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(cell, &used);
    return used == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace detail

inline StiffnessSurface read_stiffness_surface(std::istream& in) {
  std::vector<double> disp, twist, k;
  bool header_seen = false;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    auto cells = detail::split_cells(line);
    if (!header_seen) {
      // Corner cell is optional and may be a label.
      std::size_t start = 0;
      double v = 0.0;
      if (!detail::parse_number(cells[0], v)) start = 1;
      for (std::size_t c = start; c < cells.size(); ++c) {
        if (!detail::parse_number(cells[c], v))
          throw InputError(fmt::format("stiffness grid line {}: bad displacement '{}'", line_no,
                                       cells[c]));
        disp.push_back(v);
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != disp.size() + 1)
      throw InputError(fmt::format("stiffness grid line {}: expected {} cells, got {}", line_no,
                                   disp.size() + 1, cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!detail::parse_number(cells[c], v))
        throw InputError(fmt::format("stiffness grid line {}: bad number '{}'", line_no, cells[c]));
      (c == 0 ? twist : k).push_back(v);
    }
  }
  if (!header_seen) throw InputError("stiffness grid: empty file");
  return StiffnessSurface(std::move(twist), std::move(disp), std::move(k));
}

inline StiffnessSurface load_stiffness_surface(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open stiffness grid file: " + path);
  return read_stiffness_surface(in);
}

inline void write_stiffness_surface(std::ostream& out, const StiffnessSurface& s) {
  out << "# HSA stiffness grid [N/m]; rows: sweep twist [deg], columns: extension [m]\n";
  out << "twist_deg";
  for (double d : s.displacement_grid()) out << ',' << fmt::format("{:.17g}", d);
  out << '\n';
  for (std::size_t i = 0; i < s.twist_grid().size(); ++i) {
    out << fmt::format("{:.17g}", s.twist_grid()[i]);
    for (std::size_t j = 0; j < s.displacement_grid().size(); ++j)
      out << ',' << fmt::format("{:.17g}", s.at(i, j));
    out << '\n';
  }
}

struct HsaState {
  double twist = 0.0;           // deg, servo frame
  double extension = 0.0;       // m, >= 0 in tension
  double extension_rate = 0.0;  // m/s
  bool jammed = false;
};

struct HsaForceParams {
  double damping = 2.8125;  // N s/m
  StiffnessSurface surface = default_stiffness_surface();
  HsaGeometry geometry{};
};

inline bool is_jammed(double twist_deg, const HsaGeometry& g) { return twist_deg >= g.jam_twist; }

struct HsaLength {
  double length;     // m
  double extension;  // m, tension-only
};

/// HSA length from leg length: l = rod_length - x.
inline HsaLength hsa_length_from_leg(double leg_length, const HsaGeometry& g) {
  const double lo = g.neutral_leg_length - g.max_stroke;
  if (leg_length < lo)
    throw DomainError(fmt::format(
        "leg length {} m below neutral_leg_length - max_stroke = {} m (HSA over-stretched)",
        leg_length, lo));
  if (leg_length > g.rod_length)
    throw DomainError(
        fmt::format("leg length {} m above rod_length = {} m", leg_length, g.rod_length));
  const double l = g.rod_length - leg_length;
  return {l, std::max(0.0, l - g.rest_length)};
}

inline HsaState hsa_state_from_leg(double leg_length, double leg_rate, double twist_deg,
                                   const HsaGeometry& g) {
  auto [l, ext] = hsa_length_from_leg(leg_length, g);
  HsaState s;
  s.twist = twist_deg;
  s.jammed = is_jammed(twist_deg, g);
  if (l >= g.rest_length) {
    s.extension = std::min(ext, g.max_stroke);
    s.extension_rate = -leg_rate;  // dl/dt = -dx/dt
  }
  return s;
}

/// Tension-only Kelvin-Voigt force: F = K(twist, ext) * ext + damping * ext_rate,
/// floored at zero. The reaction on the leg acts along +x.
inline double hsa_force(const HsaState& s, const HsaForceParams& p) {
  if (!(s.extension >= 0.0 && s.extension <= p.geometry.max_stroke))
    throw DomainError(fmt::format("HSA extension {} m outside [0, {}]", s.extension,
                                  p.geometry.max_stroke));
  if (s.jammed != is_jammed(s.twist, p.geometry))
    throw DomainError("HSA state: jammed flag inconsistent with twist");
  if (p.damping < 0.0) throw DomainError("HSA damping must be >= 0");
  if (s.extension == 0.0 && s.extension_rate <= 0.0) return 0.0;
  const double k = stiffness_at(p.surface, p.geometry.sweep_twist(s.twist), s.extension);
  return std::max(0.0, k * s.extension + p.damping * s.extension_rate);
}

struct DampingCalibration {
  double damping;
  double eta;
  int iterations;
};

struct DampingSearch {
  double max_damping = 400.0;  // N s/m
  double tolerance = 0.005;    // on eta
  int max_iterations = 40;
};

/// Bisection on damping so that eta_of(damping) hits target_eta.
/// eta_of must be non-increasing in damping; violations abort.
template <class EtaOracle>
DampingCalibration calibrate_damping(double target_eta, EtaOracle&& eta_of,
                                     const DampingSearch& opt = {}) {
  if (!(target_eta > 0.0 && target_eta < 1.0))
    throw DomainError("calibrate_damping: target eta must lie in (0, 1)");
  double lo = 0.0, hi = opt.max_damping;
  double eta_lo = eta_of(lo);
  if (std::abs(eta_lo - target_eta) <= opt.tolerance) return {lo, eta_lo, 0};
  double eta_hi = eta_of(hi);
  if (target_eta > eta_lo || target_eta < eta_hi)
    throw CalibrationError(
        fmt::format("eta target {:.3f} unreachable: damping in [0, {}] gives eta in [{:.4f}, {:.4f}]",
                    target_eta, hi, eta_hi, eta_lo),
        eta_hi, eta_lo);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    double mid = 0.5 * (lo + hi);
    double eta = eta_of(mid);
    if (eta > eta_lo + 1e-9 || eta < eta_hi - 1e-9)
      throw CalibrationError(
          fmt::format("eta not monotone in damping: eta({})={:.4f} outside [{:.4f}, {:.4f}]", mid,
                      eta, eta_hi, eta_lo),
          eta_hi, eta_lo);
    if (std::abs(eta - target_eta) <= opt.tolerance || it == opt.max_iterations)
      return {mid, eta, it};
    if (eta > target_eta) {
      lo = mid;
      eta_lo = eta;
    } else {
      hi = mid;
      eta_hi = eta;
    }
  }
  return {0.5 * (lo + hi), eta_of(0.5 * (lo + hi)), opt.max_iterations};
}

}  // namespace hsahop
