#pragma once

// Cross-robot comparison against published SPEAR vertical hopping data.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "hsahop/energetics.hpp"
#include "hsahop/errors.hpp"
#include "hsahop/statistics.hpp"

namespace hsahop {

inline constexpr double kSpearMass = 4.91;  // kg, lumped body mass

struct SpearRow {
  double knee_angle;         // rad, knee angle at touchdown
  double touchdown_length;   // m, virtual leg length at touchdown
  double energy;             // J, electrical energy per hop
  double compression;        // m, peak virtual leg compression
  double height;             // m, hop height
  double cot;

  double implied_cot(double mass = kSpearMass, double gravity = 9.81) const {
    return cost_of_transport(energy, mass, height, gravity);
  }
};

inline std::vector<SpearRow> bundled_spear_rows() {
  return {
      {0.74, 0.607, 15.0, 0.106, 0.105, 2.96},
      {1.04, 0.557, 16.3, 0.218, 0.275, 1.23},
      {1.40, 0.495, 20.0, 0.278, 0.345, 1.20},
  };
}

/// Whitespace or comma separated rows: knee_angle_rad touchdown_length_m
/// energy_J compression_m height_m cot. '#' comments and one optional header
/// line are skipped.
inline std::vector<SpearRow> read_spear_table(std::istream& in) {
  std::vector<SpearRow> rows;
  std::string line;
  bool header_allowed = true;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    for (char& ch : line)
      if (ch == ',' || ch == '\t' || ch == ';') ch = ' ';
    std::istringstream is(line);
    std::vector<double> v;
    std::string cell;
    bool numeric = true;
    while (is >> cell) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(cell, &used));
        if (used != cell.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric && header_allowed && rows.empty()) {
      header_allowed = false;
      continue;
    }
    if (!numeric || v.size() != 6)
      throw InputError(fmt::format("SPEAR table line {}: expected 6 numeric columns", line_no));
    for (double x : v)
      if (!(x > 0.0))
        throw InputError(fmt::format("SPEAR table line {}: values must be positive", line_no));
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5]});
    header_allowed = false;
  }
  return rows;
}

inline std::vector<SpearRow> load_spear_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open SPEAR dataset: " + path);
  return read_spear_table(in);
}

struct ForceSample {
  double compression;  // m
  double force;        // N
};

/// h = -dx + (1 / m g) * int_0^dx F(x) dx, trapezoidal on the samples.
inline double spear_hop_height(std::span<const ForceSample> curve, double compression, double mass,
                               double gravity = 9.81) {
  if (!(compression > 0.0 && mass > 0.0))
    throw DomainError("spear_hop_height: compression and mass must be > 0");
  if (curve.size() < 2) throw InputError("force curve needs at least 2 samples");
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (!(curve[i].compression > curve[i - 1].compression))
      throw InputError(fmt::format("force curve not ascending at sample {}", i));
  const double eps = 1e-12 * compression;
  if (curve.front().compression > eps || curve.back().compression < compression - eps)
    throw InputError(fmt::format("force curve covers [{}, {}] m, needs [0, {}] m",
                                 curve.front().compression, curve.back().compression,
                                 compression));
  auto lerp = [](const ForceSample& a, const ForceSample& b, double x) {
    return a.force + (b.force - a.force) * (x - a.compression) / (b.compression - a.compression);
  };
  double work = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double x0 = std::max(curve[i - 1].compression, 0.0);
    const double x1 = std::min(curve[i].compression, compression);
    if (x1 <= x0) continue;
    work += 0.5 * (x1 - x0) * (lerp(curve[i - 1], curve[i], x0) + lerp(curve[i - 1], curve[i], x1));
  }
  return -compression + work / (mass * gravity);
}

struct SpearFit {
  LinearFit fit;
  double cot_at_query;
};

/// Least-squares COT-vs-height line through the rows, evaluated at h_query.
inline SpearFit spear_cot_at_height(std::span<const SpearRow> rows, double h_query) {
  if (rows.size() < 2) throw FitError("SPEAR fit needs at least 2 rows");
  std::vector<double> h, c;
  for (const auto& r : rows) {
    h.push_back(r.height);
    c.push_back(r.cot);
  }
  const LinearFit f = fit_line(h, c);
  return {f, f(h_query)};
}

/// Rescales our mean apex by the ratio of touchdown leg lengths.
inline double equivalent_height(double mean_apex, double foreign_touchdown_length,
                                double own_touchdown_length) {
  if (!(foreign_touchdown_length > 0.0 && own_touchdown_length > 0.0))
    throw DomainError("equivalent_height: lengths must be > 0");
  return mean_apex * foreign_touchdown_length / own_touchdown_length;
}

}  // namespace hsahop
