#include <filesystem>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "hsahop/config.hpp"
#include "hsahop/experiments.hpp"

using namespace hsahop;

TEST(Config, EmptyObjectGivesDefaults) {
  const auto c = parse_config("{}");
  EXPECT_EQ(c.experiment.n_hops, 64);
  EXPECT_EQ(c.experiment.added_mass_list.size(), 3u);
  EXPECT_NEAR(c.controller.touchdown_angle, 0.8878827102104162, 1e-12);
  EXPECT_EQ(c.hsa.damping, HsaForceParams{}.damping);
}

TEST(Config, OverridesApply) {
  const auto c = parse_config(R"({"experiment": {"n_hops": 8, "added_mass_list": [0.1]},
                                  "controller": {"pushoff_torque": 1.5,
                                                 "compliance_source": "VirtualCompliance"},
                                  "integrator": {"step": 5e-5}})");
  EXPECT_EQ(c.experiment.n_hops, 8);
  ASSERT_EQ(c.experiment.added_mass_list.size(), 1u);
  EXPECT_EQ(c.experiment.added_mass_list[0], 0.1);
  EXPECT_EQ(c.controller.pushoff_torque, 1.5);
  EXPECT_EQ(c.controller.compliance_source, ComplianceSource::VirtualCompliance);
  EXPECT_EQ(c.integrator.step, 5e-5);
  EXPECT_EQ(c.run_options().n_hops, 8);
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(parse_config(R"({"robt": {}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"robot": {"mass": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"hsa": {"geometry": {"jam": 1}}})"), ConfigError);
  try {
    parse_config(R"({"experiment": {"nhops": 3}})");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("experiment.nhops"), std::string::npos);
  }
}

TEST(Config, RejectsWrongTypesAndValues) {
  EXPECT_THROW(parse_config("not json"), ConfigError);
  EXPECT_THROW(parse_config("[]"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": {"n_hops": 2.5}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": {"with_hsa": 1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": {"n_hops": -1}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": {"seed": -3}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"controller": {"compliance_source": "Spring"}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"integrator": {"step": 0}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"experiment": {"regen_efficiency": 1.5}})"), ConfigError);
}

TEST(Config, RoundTrip) {
  auto c = parse_config(R"({"experiment": {"n_hops": 9}, "hsa": {"damping": 3.5}})");
  const auto j = config_to_json(c);
  const auto back = parse_config(j.dump());
  EXPECT_EQ(config_to_json(back), j);
  EXPECT_EQ(back.experiment.n_hops, 9);
  EXPECT_EQ(back.hsa.damping, 3.5);
}

TEST(Config, BrakingForceGrid) {
  auto c = parse_config(R"({"braking": {"force_max": 50, "force_step": 10}})");
  const auto f = c.braking_forces();
  ASSERT_EQ(f.size(), 6u);
  EXPECT_EQ(f.back(), 50.0);
  c = parse_config(R"({"braking": {"force_grid": [5, 15, 25]}})");
  EXPECT_EQ(c.braking_forces().size(), 3u);
}

TEST(Config, SurfaceFileRelativeToConfig) {
  const auto dir = std::filesystem::temp_directory_path() / "hsahop_config_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "grid.csv");
    f << "twist_deg,0,0.01,0.02\n"
         "-10,100,200,300\n"
         "10,150,250,350\n";
  }
  {
    std::ofstream f(dir / "cfg.json");
    f << R"({"hsa": {"surface_file": "grid.csv"}})";
  }
  const auto c = load_config((dir / "cfg.json").string());
  EXPECT_EQ(c.hsa.surface.max_value(), 350.0);
  EXPECT_EQ(c.hsa.surface.min_value(), 100.0);
  EXPECT_THROW(parse_config(R"({"hsa": {"surface_file": "missing.csv"}})", dir), ConfigError);
  EXPECT_THROW(load_config((dir / "nope.json").string()), ConfigError);
  std::filesystem::remove_all(dir);
}

TEST(Csv, HeaderDocumentsEveryColumn) {
  std::ostringstream os;
  write_csv_header(os, kTelemetryColumns);
  const std::string s = os.str();
  ASSERT_EQ(s.rfind("# ", 0), 0u);
  const auto nl = s.find('\n');
  const std::string header = s.substr(nl + 1);
  EXPECT_EQ(header,
            "time_s,mode,x_m,xdot_mps,theta_rad,thetadot_radps,tau_Nm,current_A,P_thermal_W,"
            "P_mech_W,P_elec_W,hsa_force_N,hsa_twist_deg\n");
  for (const auto& col : kTelemetryColumns)
    EXPECT_NE(s.substr(0, nl).find(col.name), std::string::npos);
}

TEST(Csv, NumberFormatting) {
  EXPECT_EQ(csv_number(0.5), "0.5");
  EXPECT_EQ(csv_number(std::numeric_limits<double>::quiet_NaN()), "nan");
}
