// Command-line front end: hop, brake, design, spear, calibrate, characterize.
//
// Exit codes: 0 success, 2 configuration or input error, 3 simulation error,
// 4 calibration failure.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "hsahop/config.hpp"
#include "hsahop/errors.hpp"
#include "hsahop/experiments.hpp"
#include "hsahop/hsa_model.hpp"
#include "hsahop/spear.hpp"

namespace fs = std::filesystem;
using namespace hsahop;

namespace {

enum Exit { kOk = 0, kConfig = 2, kSimulation = 3, kCalibration = 4 };

struct Globals {
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool json = false;
};

ExperimentConfig load(const Globals& g) {
  ExperimentConfig c = g.config_path.empty() ? parse_config("{}") : load_config(g.config_path);
  if (g.seed) c.experiment.seed = *g.seed;
  return c;
}

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << '\n'; }

int run_hop(const Globals& g) {
  const ExperimentConfig c = load(g);
  const HopReport rep = cmd_hop(c, c.experiment.seed, g.out_dir);
  if (g.json) {
    print_json(hop_report_json(rep));
    return kOk;
  }
  fmt::print("{:>8} {:>6} {:>9} {:>9} {:>7} {:>8} {:>17} {:>8} {:>8} {:>6}\n", "mass_kg", "cond",
             "push_Nm", "apex_cm", "f_Hz", "COT", "99% CI", "thermal", "mech", "eta");
  for (const auto& r : rep.conditions) {
    if (r.run.hops.empty()) continue;
    fmt::print("{:8.3f} {:>6} {:9.4f} {:9.3f} {:7.3f} {:8.4f} [{:7.4f},{:7.4f}] {:8.4f} {:8.4f} {:6.3f}\n",
               r.condition.added_mass, r.condition.with_hsa ? "hsa" : "nohsa", r.pushoff_torque,
               100.0 * r.mean_apex, r.hop_frequency, r.cot_total, r.cot_ci.ci_low,
               r.cot_ci.ci_high, r.cot_thermal, r.cot_mechanical, r.spring_efficiency);
  }
  for (const auto& m : rep.comparisons)
    fmt::print("mass {:.3f} kg: COT reduction {:.1f}%{}\n", m.added_mass, m.reduction_pct,
               m.reduction_in_band ? "" : " (outside 10-50%)");
  fmt::print("wrote {}\n", (fs::path(g.out_dir) / "summary.csv").string());
  return kOk;
}

int run_brake(const Globals& g) {
  const ExperimentConfig c = load(g);
  const BrakeReport rep = cmd_brake(c);
  fs::create_directories(g.out_dir);
  {
    auto f = open_output(fs::path(g.out_dir) / "braking.csv");
    write_braking_csv(f, rep);
  }
  if (g.json) {
    print_json(brake_report_json(rep));
    return kOk;
  }
  fmt::print("leg motor  P = {:.6g} W/N^2 * F^2   R^2 = {:.6f}\n", rep.sweep.leg_fit.coefficient,
             rep.sweep.leg_fit.r_squared);
  fmt::print("twist servo P = {:.6g} W/N * F     R^2 = {:.6f}\n", rep.sweep.twist_fit.coefficient,
             rep.sweep.twist_fit.r_squared);
  fmt::print("crossover force {:.3f} N (grid: {})\n", rep.sweep.crossover_force,
             std::isnan(rep.sweep.sweep_crossover_force)
                 ? std::string("none")
                 : fmt::format("{:.3f} N", rep.sweep.sweep_crossover_force));
  for (const auto& r : rep.rows)
    if (std::isnan(r.leg_motor_power))
      fmt::print("force {:.1f} N: leg motor saturated\n", r.force);
  fmt::print("wrote {}\n", (fs::path(g.out_dir) / "braking.csv").string());
  return kOk;
}

int run_design(const Globals& g, double mass, double height, double compression) {
  const ExperimentConfig c = load(g);
  const DesignResult r = cmd_design(mass, height, compression, c);
  if (g.json) {
    print_json(design_json(r));
    return kOk;
  }
  const auto& p = r.point;
  fmt::print("mass         {:10.4f} kg\n", p.mass);
  fmt::print("hop height   {:10.4f} m\n", p.hop_height);
  fmt::print("compression  {:10.4f} m\n", p.compression);
  fmt::print("stiffness    {:10.1f} N/m\n", p.stiffness);
  fmt::print("stance time  {:10.4f} s\n", p.stance_time);
  fmt::print("flight time  {:10.4f} s\n", p.flight_time);
  fmt::print("frequency    {:10.3f} Hz\n", p.frequency);
  fmt::print("required load {:9.1f} N\n", r.report.required_load);
  for (const auto& ch : r.report.checks)
    fmt::print("  {:<10} required {:10.4g} actual {:10.4g}  {}\n", ch.name, ch.required,
               ch.actual, ch.pass ? "pass" : "FAIL");
  return kOk;
}

int run_spear(const Globals& g, const std::string& dataset, double h_query) {
  const auto rows = dataset.empty() ? bundled_spear_rows() : load_spear_table(dataset);
  const SpearReport r = cmd_spear(rows, h_query);
  if (g.json) {
    print_json(spear_json(r));
    return kOk;
  }
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    fmt::print("h = {:.3f} m  COT table {:.2f}  recomputed {:.3f}\n", r.rows[i].height,
               r.rows[i].cot, r.implied_cot[i]);
  fmt::print("fit: COT = {:.4f} + {:.4f} h   R^2 = {:.4f}\n", r.fit.fit.intercept,
             r.fit.fit.slope, r.fit.fit.r_squared);
  fmt::print("COT at h = {:.3f} m: {:.3f}\n", r.query_height, r.fit.cot_at_query);
  return kOk;
}

int run_calibrate(const Globals& g, const std::string& write_path) {
  const ExperimentConfig c = load(g);
  const CalibrationReport rep = cmd_calibrate(c);
  const fs::path out = write_path.empty() ? fs::path(g.out_dir) / "calibrated_config.json"
                                          : fs::path(write_path);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  {
    auto f = open_output(out);
    f << config_to_json(rep.config).dump(2) << '\n';
  }
  if (g.json) {
    nlohmann::ordered_json j{{"damping", rep.damping},
                             {"pushoff_torque", rep.pushoff_torque},
                             {"mean_apex", rep.apex},
                             {"spring_efficiency", rep.eta},
                             {"damping_iterations", rep.damping_iterations},
                             {"config", out.string()}};
    print_json(j);
    return kOk;
  }
  fmt::print("damping         {:.6g} N s/m\n", rep.damping);
  fmt::print("push-off torque {:.6g} N m\n", rep.pushoff_torque);
  fmt::print("mean apex       {:.4f} m\n", rep.apex);
  fmt::print("spring eff.     {:.4f}\n", rep.eta);
  fmt::print("wrote {}\n", out.string());
  return kOk;
}

int run_characterize(const Globals& g) {
  const ExperimentConfig c = load(g);
  const StiffnessSurface& s = c.hsa.surface;
  fs::create_directories(g.out_dir);
  const fs::path out = fs::path(g.out_dir) / "stiffness_surface.csv";
  {
    auto f = open_output(out);
    write_stiffness_surface(f, s);
  }
  const double ratio = s.max_value() / s.min_value();
  if (g.json) {
    print_json({{"min", s.min_value()},
                {"max", s.max_value()},
                {"peak_to_min", ratio},
                {"positive_twist_mean", s.positive_twist_mean()},
                {"jam_twist", c.hsa.geometry.jam_twist},
                {"file", out.string()}});
    return kOk;
  }
  fmt::print("stiffness min {:.1f} N/m, max {:.1f} N/m, ratio {:.2f}\n", s.min_value(),
             s.max_value(), ratio);
  fmt::print("positive-twist mean {:.1f} N/m, jam twist {:.1f} deg\n", s.positive_twist_mean(),
             c.hsa.geometry.jam_twist);
  fmt::print("wrote {}\n", out.string());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hopper simulator and energetics toolkit"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config_path, "Experiment config (JSON)")->check(CLI::ExistingFile);
  app.add_option("--out", g.out_dir, "Output directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Seed for resampling");
  app.add_flag("--json", g.json, "Machine-readable output");

  auto* hop = app.add_subcommand("hop", "Hop sweep over added mass, with and without the HSA");
  auto* brake = app.add_subcommand("brake", "Static braking power sweep");
  auto* design = app.add_subcommand("design", "Spring-mass sizing");
  double mass = 0, height = 0, compression = 0;
  design->add_option("--mass", mass, "Total mass [kg]")->required();
  design->add_option("--height", height, "Hop height [m]")->required();
  design->add_option("--compression", compression, "Leg compression [m]")->required();
  auto* spear = app.add_subcommand("spear", "SPEAR cost-of-transport comparison");
  std::string dataset;
  double h_query = 0.158;
  spear->add_option("--dataset", dataset, "SPEAR table (default: built-in)")
      ->check(CLI::ExistingFile);
  spear->add_option("--height", h_query, "Query hop height [m]")->capture_default_str();
  auto* calibrate = app.add_subcommand("calibrate", "Tune push-off torque and HSA damping");
  std::string write_path;
  calibrate->add_option("--write", write_path, "Calibrated config path (default OUT/calibrated_config.json)");
  auto* characterize =
      app.add_subcommand("characterize", "Dump the active stiffness surface grid");
  for (auto* sub : {hop, brake, design, spear, calibrate, characterize}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }
  if (*seed_opt) g.seed = seed;

  try {
    if (*hop) return run_hop(g);
    if (*brake) return run_brake(g);
    if (*design) return run_design(g, mass, height, compression);
    if (*spear) return run_spear(g, dataset, h_query);
    if (*calibrate) return run_calibrate(g, write_path);
    if (*characterize) return run_characterize(g);
  } catch (const CalibrationError& e) {
    fmt::print(stderr, "calibration failed: {}\n", e.what());
    return kCalibration;
  } catch (const SimulationError& e) {
    fmt::print(stderr, "simulation failed: {}\n", e.what());
    return kSimulation;
  } catch (const DomainError& e) {
    fmt::print(stderr, "simulation failed: {}\n", e.what());
    return kSimulation;
  } catch (const SaturationError& e) {
    fmt::print(stderr, "simulation failed: {}\n", e.what());
    return kSimulation;
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kConfig;
  }
  return kConfig;
}
