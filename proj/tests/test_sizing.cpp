#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hsahop/sizing.hpp"

using namespace hsahop;

TEST(RequiredStiffness, NominalDesign) {
  EXPECT_NEAR(required_stiffness(1.3, 0.05, 0.05), 1020.24, 1e-9);
}

TEST(RequiredStiffness, ZeroHeightAndHomogeneity) {
  EXPECT_NEAR(required_stiffness(1.3, 0.0, 0.05), 2.0 * 1.3 * 9.81 / 0.05, 1e-9);
  EXPECT_NEAR(required_stiffness(2.6, 0.05, 0.05), 2.0 * required_stiffness(1.3, 0.05, 0.05),
              1e-9);
}

TEST(RequiredStiffness, RejectsNonPositive) {
  EXPECT_THROW(required_stiffness(0.0, 0.05, 0.05), DomainError);
  EXPECT_THROW(required_stiffness(1.3, -0.01, 0.05), DomainError);
  EXPECT_THROW(required_stiffness(1.3, 0.05, 0.0), DomainError);
}

TEST(HopFrequency, NominalDesign) {
  EXPECT_NEAR(hop_frequency(1.3, 1000.0, 0.05), 3.172596, 1e-6);
  EXPECT_NEAR(flight_time(0.05), 0.2019275, 1e-7);
  EXPECT_NEAR(stance_time(1.3, 1000.0), std::numbers::pi * std::sqrt(1.3e-3), 1e-12);
}

TEST(HopFrequency, Limits) {
  EXPECT_NEAR(hop_frequency(1.3, 1000.0, 1e-12), 1.0 / stance_time(1.3, 1000.0), 1e-3);
  EXPECT_NEAR(hop_frequency(1.3, 1e15, 0.05), 1.0 / flight_time(0.05), 1e-3);
  EXPECT_THROW(hop_frequency(1.3, 1000.0, 0.0), DomainError);
  EXPECT_THROW(hop_frequency(1.3, 0.0, 0.05), DomainError);
}

TEST(DesignPoint, Consistent) {
  const auto p = design_point(1.3, 0.05, 0.05);
  EXPECT_NEAR(p.frequency, 1.0 / (p.stance_time + p.flight_time), 1e-12);
  EXPECT_NEAR(p.stiffness, 1020.24, 1e-9);
}

TEST(VerifyDesign, LoadRequirement) {
  DesignPoint p;
  p.stiffness = 1000.0;
  EXPECT_NEAR(verify_design(p, {}).required_load, 75.0, 1e-12);
  EXPECT_TRUE(verify_design(p, {}).pass());
  p.stiffness = 912.0;
  const auto r = verify_design(p, {});
  EXPECT_NEAR(r.required_load, 68.4, 1e-12);
  EXPECT_TRUE(r.pass());
}

TEST(VerifyDesign, FailingChecks) {
  DesignPoint p;
  p.stiffness = 1000.0;
  DesignRequirements short_stroke;
  short_stroke.available_stroke = 0.04;
  const auto r = verify_design(p, short_stroke);
  EXPECT_FALSE(r.pass());
  EXPECT_FALSE(r.checks[0].pass);
  p.stiffness = 1300.0;
  EXPECT_FALSE(verify_design(p, {}).checks[1].pass);
  EXPECT_FALSE(verify_design(p, {}).checks[2].pass);
}
