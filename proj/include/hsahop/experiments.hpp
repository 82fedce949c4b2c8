#pragma once

// Experiment orchestration behind the command-line subcommands: hop sweeps over
// added mass with and without the HSA, calibration, braking sweeps, design
// sizing, the SPEAR comparison and stiffness-surface dumps.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "hsahop/braking.hpp"
#include "hsahop/config.hpp"
#include "hsahop/controller.hpp"
#include "hsahop/energetics.hpp"
#include "hsahop/errors.hpp"
#include "hsahop/hopper_sim.hpp"
#include "hsahop/hsa_model.hpp"
#include "hsahop/sizing.hpp"
#include "hsahop/spear.hpp"
#include "hsahop/statistics.hpp"

namespace hsahop {

// ---------------------------------------------------------------------------
// CSV helpers

struct CsvColumn {
  const char* name;
  const char* meaning;
};

inline void write_csv_header(std::ostream& os, std::span<const CsvColumn> cols) {
  os << "# columns:";
  for (std::size_t i = 0; i < cols.size(); ++i)
    os << (i ? "; " : " ") << cols[i].name << " = " << cols[i].meaning;
  os << '\n';
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i].name;
  os << '\n';
}

inline std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.10g}", v);
}

inline constexpr CsvColumn kTelemetryColumns[] = {
    {"time_s", "simulation time [s]"},
    {"mode", "Stance or Flight"},
    {"x_m", "leg length [m]"},
    {"xdot_mps", "leg length rate [m/s]"},
    {"theta_rad", "leg motor angle [rad]"},
    {"thetadot_radps", "leg motor rate [rad/s]"},
    {"tau_Nm", "leg motor output torque [N m]"},
    {"current_A", "winding current [A]"},
    {"P_thermal_W", "winding Joule loss R I^2 [W]"},
    {"P_mech_W", "motor mechanical power tau thetadot [W]"},
    {"P_elec_W", "electrical power, thermal + mechanical [W]"},
    {"hsa_force_N", "HSA force along the leg [N]"},
    {"hsa_twist_deg", "HSA servo twist [deg]"},
};

inline void write_telemetry_row(std::ostream& os, const SimRecord& r) {
  const auto& s = r.sample;
  os << csv_number(s.time) << ',' << to_string(r.mode) << ',' << csv_number(r.leg_length) << ','
     << csv_number(r.leg_rate) << ',' << csv_number(s.joint_angle) << ','
     << csv_number(s.joint_rate) << ',' << csv_number(s.joint_torque) << ','
     << csv_number(s.current) << ',' << csv_number(s.thermal_power) << ','
     << csv_number(s.mechanical_power) << ',' << csv_number(s.electrical_power) << ','
     << csv_number(r.hsa_force) << ',' << csv_number(r.hsa_twist) << '\n';
}

// ---------------------------------------------------------------------------
// Hopping conditions

struct Condition {
  double added_mass = 0.0;  // kg
  bool with_hsa = true;

  std::string label() const {
    return fmt::format("m{:.3f}_{}", added_mass, with_hsa ? "hsa" : "nohsa");
  }
};

/// Calls f with a HopperSetup for the condition; the two conditions differ in
/// spring type and compliance source only.
template <class F>
decltype(auto) visit_setup(const ExperimentConfig& c, const Condition& k, F&& f) {
  auto fill = [&](auto& s) {
    s.robot = c.robot;
    s.robot.added_mass = k.added_mass;
    s.motor = c.motor;
    s.controller = c.controller;
    s.integrator = c.integrator;
    s.neutral_leg_length = c.hsa.geometry.neutral_leg_length;
  };
  if (k.with_hsa) {
    HopperSetup<HsaCompliance> s;
    fill(s);
    s.controller.compliance_source = ComplianceSource::PhysicalHsa;
    s.spring = HsaCompliance{c.hsa, c.hsa_twist};
    return f(s);
  }
  HopperSetup<NoCompliance> s;
  fill(s);
  s.controller.compliance_source = ComplianceSource::VirtualCompliance;
  return f(s);
}

/// Mean steady apex for a push-off torque: 0 when hopping dies out, +inf when
/// the hop is violent enough to leave the HSA's working range.
template <LegCompliance Spring>
double steady_apex(HopperSetup<Spring> setup, RunOptions opt, double torque) {
  setup.controller.pushoff_torque = torque;
  opt.keep_telemetry = false;
  try {
    return run_hops(setup, opt).mean_apex();
  } catch (const StallError&) {
    return 0.0;
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

struct ConditionResult {
  Condition condition;
  double pushoff_torque = 0.0;
  HopRun run;
  double mean_apex = std::numeric_limits<double>::quiet_NaN();
  double apex_sd = std::numeric_limits<double>::quiet_NaN();
  double hop_frequency = std::numeric_limits<double>::quiet_NaN();
  double cot_total = std::numeric_limits<double>::quiet_NaN();
  double cot_thermal = std::numeric_limits<double>::quiet_NaN();
  double cot_mechanical = std::numeric_limits<double>::quiet_NaN();
  double spring_efficiency = std::numeric_limits<double>::quiet_NaN();
  BootstrapResult cot_ci{std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::quiet_NaN(),
                         std::numeric_limits<double>::quiet_NaN(), 0.0, 0};
};

namespace detail {

template <class E>
[[noreturn]] void rethrow_labeled(const E& e, const std::string& label) {
  throw E(label + ": " + e.what());
}

inline void summarize_condition(ConditionResult& r, const ExperimentSettings& e,
                                std::uint64_t seed) {
  const auto& hops = r.run.hops;
  if (hops.empty()) return;
  std::vector<double> cot, apex;
  double th = 0.0, me = 0.0, eta = 0.0;
  for (const auto& h : hops) {
    cot.push_back(h.cot_total);
    apex.push_back(h.apex_height);
    th += h.cot_thermal;
    me += h.cot_mechanical;
    eta += h.spring_efficiency;
  }
  const double n = static_cast<double>(hops.size());
  r.mean_apex = mean_of(apex);
  double ss = 0.0;
  for (double a : apex) ss += (a - r.mean_apex) * (a - r.mean_apex);
  r.apex_sd = hops.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  r.hop_frequency = r.run.hop_frequency();
  r.cot_total = mean_of(cot);
  r.cot_thermal = th / n;
  r.cot_mechanical = me / n;
  r.spring_efficiency = eta / n;
  if (hops.size() >= 2)
    r.cot_ci = bootstrap_mean_ci(cot, e.confidence,
                                 static_cast<std::size_t>(e.bootstrap_resamples), seed);
}

}  // namespace detail

/// Tunes push-off (when match_apex is set) and runs one condition.
inline ConditionResult run_condition(const ExperimentConfig& c, const Condition& k,
                                     std::uint64_t seed) {
  ConditionResult r;
  r.condition = k;
  r.pushoff_torque = c.controller.pushoff_torque;
  if (c.experiment.n_hops <= 0) return r;
  const RunOptions opt = c.run_options();
  try {
    visit_setup(c, k, [&](auto setup) {
      if (c.experiment.match_apex) {
        r.pushoff_torque =
            calibrate_pushoff(c.experiment.target_apex,
                              [&](double tau) { return steady_apex(setup, opt, tau); })
                .torque;
      }
      setup.controller.pushoff_torque = r.pushoff_torque;
      r.run = run_hops(setup, opt);
    });
  } catch (const CalibrationError& e) {
    throw CalibrationError(k.label() + ": " + e.what(), e.achieved_low(), e.achieved_high());
  } catch (const StallError& e) {
    detail::rethrow_labeled(e, k.label());
  } catch (const IntegratorError& e) {
    detail::rethrow_labeled(e, k.label());
  } catch (const SingularityError& e) {
    detail::rethrow_labeled(e, k.label());
  } catch (const DomainError& e) {
    detail::rethrow_labeled(e, k.label());
  }
  detail::summarize_condition(r, c.experiment, seed);
  return r;
}

struct MassComparison {
  double added_mass;
  double cot_with;
  double cot_without;
  double reduction_pct;  // 100 (1 - with / without)
  bool total_lower;
  bool thermal_lower;
  bool mechanical_higher;
  bool reduction_in_band;  // within [10, 50] %
};

struct HopReport {
  std::vector<ConditionResult> conditions;
  std::vector<MassComparison> comparisons;
};

inline std::vector<Condition> hop_conditions(const ExperimentConfig& c) {
  std::vector<Condition> out;
  for (double m : c.experiment.added_mass_list) {
    if (c.experiment.with_hsa) out.push_back({m, true});
    out.push_back({m, false});
  }
  return out;
}

/// Runs every condition concurrently; results keep the configured order.
inline HopReport run_hop_experiment(const ExperimentConfig& c, std::uint64_t seed) {
  HopReport rep;
  const auto conds = hop_conditions(c);
  std::vector<std::future<ConditionResult>> jobs;
  for (const auto& k : conds)
    jobs.push_back(std::async(std::launch::async, [&c, k, seed] { return run_condition(c, k, seed); }));
  // Drain every job before surfacing the first failure.
  std::exception_ptr first;
  for (auto& j : jobs) {
    try {
      rep.conditions.push_back(j.get());
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);

  for (std::size_t i = 0; i + 1 < rep.conditions.size(); ++i) {
    const auto& a = rep.conditions[i];
    const auto& b = rep.conditions[i + 1];
    if (!(a.condition.with_hsa && !b.condition.with_hsa)) continue;
    if (a.run.hops.empty() || b.run.hops.empty()) continue;
    MassComparison m;
    m.added_mass = a.condition.added_mass;
    m.cot_with = a.cot_total;
    m.cot_without = b.cot_total;
    m.reduction_pct = 100.0 * (1.0 - a.cot_total / b.cot_total);
    m.total_lower = a.cot_total < b.cot_total;
    m.thermal_lower = a.cot_thermal < b.cot_thermal;
    m.mechanical_higher = a.cot_mechanical > b.cot_mechanical;
    m.reduction_in_band = m.reduction_pct >= 10.0 && m.reduction_pct <= 50.0;
    rep.comparisons.push_back(m);
  }
  return rep;
}

inline constexpr CsvColumn kSummaryColumns[] = {
    {"added_mass_kg", "added mass [kg]"},
    {"condition", "hsa (physical spring) or nohsa (virtual compliance)"},
    {"pushoff_Nm", "push-off torque used [N m]"},
    {"n_hops", "summarized hops"},
    {"mean_apex_m", "mean apex height [m]"},
    {"apex_sd_m", "apex standard deviation [m]"},
    {"hop_frequency_Hz", "mean hop frequency [Hz]"},
    {"cot_total", "mean electrical cost of transport"},
    {"cot_ci_low", "bootstrap CI lower bound of cot_total"},
    {"cot_ci_high", "bootstrap CI upper bound of cot_total"},
    {"cot_thermal", "mean thermal COT component"},
    {"cot_mechanical", "mean net mechanical COT component"},
    {"spring_efficiency", "mean stance spring efficiency"},
};

inline void write_summary_csv(std::ostream& os, const HopReport& rep) {
  write_csv_header(os, kSummaryColumns);
  for (const auto& r : rep.conditions) {
    if (r.run.hops.empty()) continue;
    os << csv_number(r.condition.added_mass) << ',' << (r.condition.with_hsa ? "hsa" : "nohsa")
       << ',' << csv_number(r.pushoff_torque) << ',' << r.run.hops.size() << ','
       << csv_number(r.mean_apex) << ',' << csv_number(r.apex_sd) << ','
       << csv_number(r.hop_frequency) << ',' << csv_number(r.cot_total) << ','
       << csv_number(r.cot_ci.ci_low) << ',' << csv_number(r.cot_ci.ci_high) << ','
       << csv_number(r.cot_thermal) << ',' << csv_number(r.cot_mechanical) << ','
       << csv_number(r.spring_efficiency) << '\n';
  }
}

inline constexpr CsvColumn kHopColumns[] = {
    {"added_mass_kg", "added mass [kg]"},
    {"condition", "hsa or nohsa"},
    {"hop", "hop index after the transient"},
    {"apex_m", "ballistic apex above liftoff [m]"},
    {"stance_s", "stance duration [s]"},
    {"flight_s", "flight duration [s]"},
    {"thermal_J", "winding loss [J]"},
    {"positive_work_J", "positive motor work [J]"},
    {"negative_work_J", "negative motor work [J]"},
    {"impact_loss_J", "touchdown impact loss [J]"},
    {"electrical_J", "net electrical energy [J]"},
    {"cot_total", "electrical cost of transport"},
    {"cot_thermal", "thermal COT component"},
    {"cot_mechanical", "mechanical COT component"},
    {"spring_efficiency", "stance spring efficiency"},
};

inline void write_hops_csv(std::ostream& os, const HopReport& rep) {
  write_csv_header(os, kHopColumns);
  for (const auto& r : rep.conditions) {
    for (std::size_t i = 0; i < r.run.hops.size(); ++i) {
      const auto& h = r.run.hops[i];
      os << csv_number(r.condition.added_mass) << ',' << (r.condition.with_hsa ? "hsa" : "nohsa")
         << ',' << i << ',' << csv_number(h.apex_height) << ',' << csv_number(h.stance_duration)
         << ',' << csv_number(h.flight_duration) << ',' << csv_number(h.ledger.thermal_energy)
         << ',' << csv_number(h.ledger.positive_motor_work) << ','
         << csv_number(h.ledger.negative_motor_work) << ','
         << csv_number(h.ledger.impact_losses) << ',' << csv_number(h.ledger.net_electrical)
         << ',' << csv_number(h.cot_total) << ',' << csv_number(h.cot_thermal) << ','
         << csv_number(h.cot_mechanical) << ',' << csv_number(h.spring_efficiency) << '\n';
    }
  }
}

inline void write_telemetry_csv(std::ostream& os, const ConditionResult& r, int decimation) {
  write_csv_header(os, kTelemetryColumns);
  const auto& t = r.run.telemetry;
  const std::size_t stride = static_cast<std::size_t>(std::max(1, decimation));
  for (std::size_t i = 0; i < t.size(); i += stride) write_telemetry_row(os, t[i]);
}

inline std::ofstream open_output(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw InputError("cannot write " + p.string());
  return f;
}

/// Hop sweep; writes summary.csv, hops.csv and one telemetry CSV per condition.
inline HopReport cmd_hop(const ExperimentConfig& c, std::uint64_t seed,
                         const std::filesystem::path& out_dir, int telemetry_decimation = 10) {
  HopReport rep = run_hop_experiment(c, seed);
  std::filesystem::create_directories(out_dir);
  {
    auto f = open_output(out_dir / "summary.csv");
    write_summary_csv(f, rep);
  }
  {
    auto f = open_output(out_dir / "hops.csv");
    write_hops_csv(f, rep);
  }
  if (c.experiment.keep_telemetry) {
    for (const auto& r : rep.conditions) {
      if (r.run.hops.empty()) continue;
      auto f = open_output(out_dir / fmt::format("telemetry_{}.csv", r.condition.label()));
      write_telemetry_csv(f, r, telemetry_decimation);
    }
  }
  return rep;
}

inline nlohmann::ordered_json hop_report_json(const HopReport& rep) {
  nlohmann::ordered_json j;
  j["conditions"] = nlohmann::ordered_json::array();
  for (const auto& r : rep.conditions) {
    nlohmann::ordered_json o;
    o["added_mass"] = r.condition.added_mass;
    o["condition"] = r.condition.with_hsa ? "hsa" : "nohsa";
    o["pushoff_torque"] = r.pushoff_torque;
    o["n_hops"] = r.run.hops.size();
    if (!r.run.hops.empty()) {
      o["mean_apex"] = r.mean_apex;
      o["hop_frequency"] = r.hop_frequency;
      o["cot_total"] = r.cot_total;
      o["cot_ci"] = {r.cot_ci.ci_low, r.cot_ci.ci_high};
      o["cot_thermal"] = r.cot_thermal;
      o["cot_mechanical"] = r.cot_mechanical;
      o["spring_efficiency"] = r.spring_efficiency;
    }
    j["conditions"].push_back(o);
  }
  j["comparisons"] = nlohmann::ordered_json::array();
  for (const auto& m : rep.comparisons)
    j["comparisons"].push_back({{"added_mass", m.added_mass},
                                {"cot_with", m.cot_with},
                                {"cot_without", m.cot_without},
                                {"reduction_pct", m.reduction_pct},
                                {"total_lower", m.total_lower},
                                {"thermal_lower", m.thermal_lower},
                                {"mechanical_higher", m.mechanical_higher},
                                {"reduction_in_band", m.reduction_in_band}});
  return j;
}

// ---------------------------------------------------------------------------
// Calibration

struct CalibrationReport {
  double damping;
  double eta;
  double pushoff_torque;
  double apex;
  int damping_iterations;
  ExperimentConfig config;  // input with the calibrated values written back
};

/// Tunes HSA damping so the with-HSA condition at robot.added_mass reaches
/// target_eta, with push-off re-tuned to target_apex at every damping tried.
inline CalibrationReport cmd_calibrate(const ExperimentConfig& c) {
  if (c.experiment.n_hops <= 0) throw ConfigError("calibration needs experiment.n_hops > 0");
  const Condition k{c.robot.added_mass, true};
  const RunOptions opt = [&] {
    RunOptions o = c.run_options();
    o.keep_telemetry = false;
    return o;
  }();

  struct Trial {
    double pushoff, apex, eta;
  };
  auto trial = [&](double damping) {
    ExperimentConfig cfg = c;
    cfg.hsa.damping = damping;
    return visit_setup(cfg, k, [&](auto setup) {
      const PushoffCalibration p = calibrate_pushoff(
          cfg.experiment.target_apex, [&](double tau) { return steady_apex(setup, opt, tau); });
      setup.controller.pushoff_torque = p.torque;
      const HopRun run = run_hops(setup, opt);
      return Trial{p.torque, run.mean_apex(), run.mean_spring_efficiency()};
    });
  };

  DampingSearch search;
  search.max_damping = c.experiment.max_damping;
  const DampingCalibration d =
      calibrate_damping(c.experiment.target_eta, [&](double b) { return trial(b).eta; }, search);
  const Trial t = trial(d.damping);

  CalibrationReport rep{d.damping, t.eta, t.pushoff, t.apex, d.iterations, c};
  rep.config.hsa.damping = d.damping;
  rep.config.controller.pushoff_torque = t.pushoff;
  return rep;
}

// ---------------------------------------------------------------------------
// Braking

struct BrakeRow {
  double force;
  double leg_motor_power;     // NaN when the leg motor saturates
  double twist_motor_power;
  double twist_motor_1to8_power;
};

struct BrakeReport {
  std::vector<BrakeRow> rows;
  BrakingSweep sweep;  // over the non-saturated rows
};

inline constexpr CsvColumn kBrakingColumns[] = {
    {"force_N", "blocked force [N]"},
    {"leg_motor_W", "leg motor holding power [W], nan if beyond peak torque"},
    {"twist_motor_W", "twist servo holding power at the configured gear [W]"},
    {"twist_motor_1to8_W", "twist servo holding power projected to 1:8 [W]"},
};

inline BrakeReport cmd_brake(const ExperimentConfig& c) {
  const BrakingConfig bc = c.braking_config();
  bc.validate();
  if (!is_jammed(bc.hold_twist, bc.geometry))
    throw BrakeNotEngagedError(fmt::format("braking.hold_twist {} deg is below the jam twist {} deg",
                                           bc.hold_twist, bc.geometry.jam_twist));
  BrakingConfig eight = bc;
  eight.twist_gear_ratio = 8.0;
  BrakeReport rep;
  std::vector<double> valid;
  for (double f : c.braking_forces()) {
    BrakeRow row{f, std::numeric_limits<double>::quiet_NaN(), twist_motor_holding_power(f, bc),
                 twist_motor_holding_power(f, eight)};
    try {
      row.leg_motor_power = leg_motor_holding_power(f, bc);
      valid.push_back(f);
    } catch (const SaturationError&) {
    }
    rep.rows.push_back(row);
  }
  rep.sweep = braking_sweep(valid, bc);
  return rep;
}

inline void write_braking_csv(std::ostream& os, const BrakeReport& rep) {
  write_csv_header(os, kBrakingColumns);
  for (const auto& r : rep.rows)
    os << csv_number(r.force) << ',' << csv_number(r.leg_motor_power) << ','
       << csv_number(r.twist_motor_power) << ',' << csv_number(r.twist_motor_1to8_power) << '\n';
}

inline nlohmann::ordered_json brake_report_json(const BrakeReport& rep) {
  nlohmann::ordered_json j;
  j["leg_fit"] = {{"coefficient", rep.sweep.leg_fit.coefficient},
                  {"r_squared", rep.sweep.leg_fit.r_squared}};
  j["twist_fit"] = {{"coefficient", rep.sweep.twist_fit.coefficient},
                    {"r_squared", rep.sweep.twist_fit.r_squared}};
  j["crossover_force"] = rep.sweep.crossover_force;
  if (std::isnan(rep.sweep.sweep_crossover_force))
    j["sweep_crossover_force"] = nullptr;
  else
    j["sweep_crossover_force"] = rep.sweep.sweep_crossover_force;
  std::size_t saturated = 0;
  for (const auto& r : rep.rows) saturated += std::isnan(r.leg_motor_power) ? 1 : 0;
  j["saturated_rows"] = saturated;
  return j;
}

// ---------------------------------------------------------------------------
// Design, SPEAR, surface

struct DesignResult {
  DesignPoint point;
  DesignReport report;
};

inline DesignResult cmd_design(double mass, double height, double compression,
                               const ExperimentConfig& c = {}) {
  DesignResult r{design_point(mass, height, compression, c.robot.gravity), {}};
  DesignRequirements req;
  req.available_stroke = c.hsa.geometry.max_stroke;
  req.load_rating = c.hsa.geometry.load_limit;
  r.report = verify_design(r.point, req);
  return r;
}

inline nlohmann::ordered_json design_json(const DesignResult& r) {
  nlohmann::ordered_json j;
  const auto& p = r.point;
  j["mass"] = p.mass;
  j["hop_height"] = p.hop_height;
  j["compression"] = p.compression;
  j["stiffness"] = p.stiffness;
  j["frequency"] = p.frequency;
  j["stance_time"] = p.stance_time;
  j["flight_time"] = p.flight_time;
  j["required_load"] = r.report.required_load;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& ch : r.report.checks)
    j["checks"].push_back(
        {{"name", ch.name}, {"required", ch.required}, {"actual", ch.actual}, {"pass", ch.pass}});
  return j;
}

struct SpearReport {
  std::vector<SpearRow> rows;
  std::vector<double> implied_cot;
  SpearFit fit;
  double query_height;
};

inline SpearReport cmd_spear(const std::vector<SpearRow>& rows, double h_query) {
  SpearReport r{rows, {}, spear_cot_at_height(rows, h_query), h_query};
  for (const auto& row : rows) r.implied_cot.push_back(row.implied_cot());
  return r;
}

inline nlohmann::ordered_json spear_json(const SpearReport& r) {
  nlohmann::ordered_json j;
  j["rows"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    j["rows"].push_back({{"height", r.rows[i].height},
                         {"cot_table", r.rows[i].cot},
                         {"cot_implied", r.implied_cot[i]}});
  j["slope"] = r.fit.fit.slope;
  j["intercept"] = r.fit.fit.intercept;
  j["r_squared"] = r.fit.fit.r_squared;
  j["query_height"] = r.query_height;
  j["cot_at_query"] = r.fit.cot_at_query;
  return j;
}

}  // namespace hsahop
