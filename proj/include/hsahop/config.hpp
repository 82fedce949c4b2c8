#pragma once

// Experiment configuration as JSON. Every key is optional and defaults to the
// built-in parameter set; unknown keys and wrongly typed values are rejected
// before anything runs.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "hsahop/actuator.hpp"
#include "hsahop/braking.hpp"
#include "hsahop/controller.hpp"
#include "hsahop/errors.hpp"
#include "hsahop/hopper_sim.hpp"
#include "hsahop/hsa_model.hpp"
#include "hsahop/leg_kinematics.hpp"

namespace hsahop {

struct ExperimentSettings {
  std::vector<double> added_mass_list{0.0, 0.2, 0.4};  // kg
  int n_hops = 64;
  int transient_discard = 5;
  bool with_hsa = true;  // false runs only the virtual-compliance baseline
  std::uint64_t seed = 0;
  double initial_drop = 0.052;    // m
  double stance_budget = 2.0;     // s
  double regen_efficiency = 1.0;
  bool match_apex = true;         // re-tune push-off per condition to target_apex
  double target_apex = 0.052;     // m
  double target_eta = 0.29;
  double max_damping = 15.0;      // N s/m, calibration bracket
  double confidence = 0.99;
  int bootstrap_resamples = 10000;
  bool keep_telemetry = true;
};

struct BrakingSettings {
  double twist_gear_ratio = 4.0;
  double twist_linear_coefficient = 0.02;  // W/N
  double leg_moment_arm = 0.05;            // m/rad
  double hold_twist = 135.0;               // deg
  bool worm_gear = false;
  std::vector<double> force_grid{};        // N; empty means 0..force_max in force_step
  double force_max = 300.0;                // N
  double force_step = 10.0;                // N
};

struct ExperimentConfig {
  RobotParams robot{};
  MotorParams motor{};
  HsaForceParams hsa{};
  double hsa_twist = 0.0;     // deg, servo frame, during hopping
  std::string surface_file;   // empty: built-in surface
  ControllerConfig controller{};
  IntegratorConfig integrator{};
  ExperimentSettings experiment{};
  BrakingSettings braking{};

  void validate() const {
    robot.validate();
    motor.validate();
    hsa.geometry.validate();
    if (hsa.damping < 0.0) throw ConfigError("hsa.damping must be >= 0");
    controller.validate();
    integrator.validate();
    const auto& e = experiment;
    if (e.n_hops < 0) throw ConfigError("experiment.n_hops must be >= 0");
    if (e.transient_discard < 0) throw ConfigError("experiment.transient_discard must be >= 0");
    for (double m : e.added_mass_list)
      if (!(m >= 0.0)) throw ConfigError("experiment.added_mass_list entries must be >= 0");
    if (!(e.initial_drop > 0.0)) throw ConfigError("experiment.initial_drop must be > 0");
    if (!(e.stance_budget > 0.0)) throw ConfigError("experiment.stance_budget must be > 0");
    if (!(e.regen_efficiency >= 0.0 && e.regen_efficiency <= 1.0))
      throw ConfigError("experiment.regen_efficiency must lie in [0, 1]");
    if (!(e.target_apex > 0.0)) throw ConfigError("experiment.target_apex must be > 0");
    if (!(e.target_eta > 0.0 && e.target_eta < 1.0))
      throw ConfigError("experiment.target_eta must lie in (0, 1)");
    if (!(e.max_damping > 0.0)) throw ConfigError("experiment.max_damping must be > 0");
    if (!(e.confidence > 0.0 && e.confidence < 1.0))
      throw ConfigError("experiment.confidence must lie in (0, 1)");
    if (e.bootstrap_resamples < 1) throw ConfigError("experiment.bootstrap_resamples must be >= 1");
    const auto& b = braking;
    if (!(b.force_max > 0.0 && b.force_step > 0.0))
      throw ConfigError("braking.force_max and braking.force_step must be > 0");
    braking_config().validate();
  }

  BrakingConfig braking_config() const {
    BrakingConfig c;
    c.twist_gear_ratio = braking.twist_gear_ratio;
    c.twist_linear_coefficient = braking.twist_linear_coefficient;
    c.leg_moment_arm = braking.leg_moment_arm;
    c.hold_twist = braking.hold_twist;
    c.worm_gear = braking.worm_gear;
    c.motor = motor;
    c.geometry = hsa.geometry;
    return c;
  }

  std::vector<double> braking_forces() const {
    if (!braking.force_grid.empty()) return braking.force_grid;
    std::vector<double> f;
    const int n = static_cast<int>(std::floor(braking.force_max / braking.force_step + 1e-9));
    for (int i = 0; i <= n; ++i) f.push_back(braking.force_step * i);
    return f;
  }

  RunOptions run_options() const {
    RunOptions o;
    o.n_hops = experiment.n_hops;
    o.transient_discard = experiment.transient_discard;
    o.initial_drop = experiment.initial_drop;
    o.stance_budget = experiment.stance_budget;
    o.regen_efficiency = experiment.regen_efficiency;
    o.keep_telemetry = experiment.keep_telemetry;
    return o;
  }
};

namespace detail {

using nlohmann::json;

// Reads keys of one JSON object, remembering which were used.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(fmt::format("{}: expected an object", name()));
  }

  void number(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) throw ConfigError(fmt::format("{}: expected a number", where(key)));
      out = v->get<double>();
    }
  }
  void integer(const char* key, int& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer())
        throw ConfigError(fmt::format("{}: expected an integer", where(key)));
      out = v->get<int>();
    }
  }
  void unsigned_integer(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned())
        throw ConfigError(fmt::format("{}: expected a non-negative integer", where(key)));
      out = v->get<std::uint64_t>();
    }
  }
  void boolean(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) throw ConfigError(fmt::format("{}: expected true or false", where(key)));
      out = v->get<bool>();
    }
  }
  void string(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) throw ConfigError(fmt::format("{}: expected a string", where(key)));
      out = v->get<std::string>();
    }
  }
  void numbers(const char* key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) throw ConfigError(fmt::format("{}: expected an array", where(key)));
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number())
          throw ConfigError(fmt::format("{}: array entries must be numbers", where(key)));
        out.push_back(e.get<double>());
      }
    }
  }
  const json* object(const char* key) { return take(key); }
  std::string child(const char* key) const { return where(key); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key()))
        throw ConfigError(fmt::format("unknown config key '{}'", where(it.key().c_str())));
  }

 private:
  const json* take(const char* key) {
    auto it = j_.find(key);
    if (it == j_.end()) return nullptr;
    used_.insert(key);
    return &*it;
  }
  std::string name() const { return path_.empty() ? "config" : path_; }
  std::string where(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

}  // namespace detail

/// Parses a configuration. Relative surface_file paths resolve against base_dir.
inline ExperimentConfig parse_config(const std::string& text,
                                     const std::filesystem::path& base_dir = {}) {
  using detail::Section;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  ExperimentConfig c;
  Section root(j, "");
  bool explicit_angle = false;

  if (const auto* v = root.object("robot")) {
    Section s(*v, "robot");
    s.number("thigh_length", c.robot.thigh_length);
    s.number("shank_length", c.robot.shank_length);
    s.number("rod_length", c.robot.rod_length);
    s.number("cart_mass", c.robot.cart_mass);
    s.number("foot_mass", c.robot.foot_mass);
    s.number("added_mass", c.robot.added_mass);
    s.number("gravity", c.robot.gravity);
    s.finish();
  }
  if (const auto* v = root.object("motor")) {
    Section s(*v, "motor");
    s.number("winding_resistance", c.motor.winding_resistance);
    s.number("torque_constant", c.motor.torque_constant);
    s.number("gear_ratio", c.motor.gear_ratio);
    s.number("reflected_inertia", c.motor.reflected_inertia);
    s.number("peak_torque", c.motor.peak_torque);
    s.number("peak_power", c.motor.peak_power);
    s.number("supply_voltage", c.motor.supply_voltage);
    s.finish();
  }
  if (const auto* v = root.object("hsa")) {
    Section s(*v, "hsa");
    s.number("damping", c.hsa.damping);
    s.number("twist", c.hsa_twist);
    s.string("surface_file", c.surface_file);
    if (const auto* g = s.object("geometry")) {
      Section t(*g, "hsa.geometry");
      auto& geo = c.hsa.geometry;
      t.number("rest_length", geo.rest_length);
      t.number("neutral_leg_length", geo.neutral_leg_length);
      t.number("rod_length", geo.rod_length);
      t.number("max_stroke", geo.max_stroke);
      t.number("load_limit", geo.load_limit);
      t.number("jam_twist", geo.jam_twist);
      t.number("sweep_sign", geo.sweep_sign);
      t.finish();
    }
    s.finish();
  }
  if (const auto* v = root.object("controller")) {
    Section s(*v, "controller");
    s.number("flight_kp", c.controller.flight_kp);
    s.number("flight_kd", c.controller.flight_kd);
    explicit_angle = v->contains("touchdown_angle");
    s.number("touchdown_angle", c.controller.touchdown_angle);
    s.number("pushoff_torque", c.controller.pushoff_torque);
    s.number("stance_kd", c.controller.stance_kd);
    s.number("virtual_stiffness", c.controller.virtual_stiffness);
    std::string source = std::string(to_string(c.controller.compliance_source));
    s.string("compliance_source", source);
    if (source == "PhysicalHsa")
      c.controller.compliance_source = ComplianceSource::PhysicalHsa;
    else if (source == "VirtualCompliance")
      c.controller.compliance_source = ComplianceSource::VirtualCompliance;
    else
      throw ConfigError(fmt::format(
          "controller.compliance_source: expected PhysicalHsa or VirtualCompliance, got '{}'",
          source));
    s.finish();
  }
  if (const auto* v = root.object("integrator")) {
    Section s(*v, "integrator");
    s.number("step", c.integrator.step);
    s.number("guard_tolerance", c.integrator.guard_tolerance);
    s.integer("max_bisection_iters", c.integrator.max_bisection_iters);
    s.finish();
  }
  if (const auto* v = root.object("experiment")) {
    Section s(*v, "experiment");
    auto& e = c.experiment;
    s.numbers("added_mass_list", e.added_mass_list);
    s.integer("n_hops", e.n_hops);
    s.integer("transient_discard", e.transient_discard);
    s.boolean("with_hsa", e.with_hsa);
    s.unsigned_integer("seed", e.seed);
    s.number("initial_drop", e.initial_drop);
    s.number("stance_budget", e.stance_budget);
    s.number("regen_efficiency", e.regen_efficiency);
    s.boolean("match_apex", e.match_apex);
    s.number("target_apex", e.target_apex);
    s.number("target_eta", e.target_eta);
    s.number("max_damping", e.max_damping);
    s.number("confidence", e.confidence);
    s.integer("bootstrap_resamples", e.bootstrap_resamples);
    s.boolean("keep_telemetry", e.keep_telemetry);
    s.finish();
  }
  if (const auto* v = root.object("braking")) {
    Section s(*v, "braking");
    auto& b = c.braking;
    s.number("twist_gear_ratio", b.twist_gear_ratio);
    s.number("twist_linear_coefficient", b.twist_linear_coefficient);
    s.number("leg_moment_arm", b.leg_moment_arm);
    s.number("hold_twist", b.hold_twist);
    s.boolean("worm_gear", b.worm_gear);
    s.numbers("force_grid", b.force_grid);
    s.number("force_max", b.force_max);
    s.number("force_step", b.force_step);
    s.finish();
  }
  root.finish();
  if (!explicit_angle)
    c.controller.touchdown_angle =
        inverse_kinematics(c.hsa.geometry.neutral_leg_length, c.robot);

  if (!c.surface_file.empty()) {
    std::filesystem::path p(c.surface_file);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    try {
      c.hsa.surface = load_stiffness_surface(p.string());
    } catch (const Error& e) {
      throw ConfigError(fmt::format("hsa.surface_file: {}", e.what()));
    }
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::filesystem::path(path).parent_path());
}

/// Full configuration with every key spelled out.
inline nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  const auto& r = c.robot;
  j["robot"] = {{"thigh_length", r.thigh_length}, {"shank_length", r.shank_length},
                {"rod_length", r.rod_length},     {"cart_mass", r.cart_mass},
                {"foot_mass", r.foot_mass},       {"added_mass", r.added_mass},
                {"gravity", r.gravity}};
  const auto& m = c.motor;
  j["motor"] = {{"winding_resistance", m.winding_resistance},
                {"torque_constant", m.torque_constant},
                {"gear_ratio", m.gear_ratio},
                {"reflected_inertia", m.reflected_inertia},
                {"peak_torque", m.peak_torque},
                {"peak_power", m.peak_power},
                {"supply_voltage", m.supply_voltage}};
  const auto& g = c.hsa.geometry;
  j["hsa"] = {{"damping", c.hsa.damping},
              {"twist", c.hsa_twist},
              {"surface_file", c.surface_file},
              {"geometry",
               {{"rest_length", g.rest_length},
                {"neutral_leg_length", g.neutral_leg_length},
                {"rod_length", g.rod_length},
                {"max_stroke", g.max_stroke},
                {"load_limit", g.load_limit},
                {"jam_twist", g.jam_twist},
                {"sweep_sign", g.sweep_sign}}}};
  const auto& k = c.controller;
  j["controller"] = {{"flight_kp", k.flight_kp},
                     {"flight_kd", k.flight_kd},
                     {"touchdown_angle", k.touchdown_angle},
                     {"pushoff_torque", k.pushoff_torque},
                     {"stance_kd", k.stance_kd},
                     {"virtual_stiffness", k.virtual_stiffness},
                     {"compliance_source", std::string(to_string(k.compliance_source))}};
  const auto& i = c.integrator;
  j["integrator"] = {{"step", i.step},
                     {"guard_tolerance", i.guard_tolerance},
                     {"max_bisection_iters", i.max_bisection_iters}};
  const auto& e = c.experiment;
  j["experiment"] = {{"added_mass_list", e.added_mass_list},
                     {"n_hops", e.n_hops},
                     {"transient_discard", e.transient_discard},
                     {"with_hsa", e.with_hsa},
                     {"seed", e.seed},
                     {"initial_drop", e.initial_drop},
                     {"stance_budget", e.stance_budget},
                     {"regen_efficiency", e.regen_efficiency},
                     {"match_apex", e.match_apex},
                     {"target_apex", e.target_apex},
                     {"target_eta", e.target_eta},
                     {"max_damping", e.max_damping},
                     {"confidence", e.confidence},
                     {"bootstrap_resamples", e.bootstrap_resamples},
                     {"keep_telemetry", e.keep_telemetry}};
  const auto& b = c.braking;
  j["braking"] = {{"twist_gear_ratio", b.twist_gear_ratio},
                  {"twist_linear_coefficient", b.twist_linear_coefficient},
                  {"leg_moment_arm", b.leg_moment_arm},
                  {"hold_twist", b.hold_twist},
                  {"worm_gear", b.worm_gear},
                  {"force_grid", b.force_grid},
                  {"force_max", b.force_max},
                  {"force_step", b.force_step}};
  return j;
}

}  // namespace hsahop
