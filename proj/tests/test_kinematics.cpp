#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "hsahop/leg_kinematics.hpp"

using namespace hsahop;

namespace {
const RobotParams kRobot{};
}

TEST(LegKinematics, OracleValues) {
  // Hand-evaluated crank-slider closure, a = 0.07, b = 0.15.
  EXPECT_NEAR(leg_length(0.3, kRobot), 0.21544028085188272, 1e-15);
  EXPECT_NEAR(leg_length(1.0, kRobot), 0.17577202313500656, 1e-15);
  EXPECT_NEAR(leg_length(2.0, kRobot), 0.106695246027045, 1e-15);
  EXPECT_NEAR(jacobian(1.0, kRobot), -0.07505204309149527, 1e-15);
  EXPECT_NEAR(jacobian_rate(2.0, kRobot), 0.051338928684880276, 1e-15);
}

TEST(LegKinematics, NeutralPoseAngle) {
  const double theta = inverse_kinematics(0.184, kRobot);
  EXPECT_NEAR(theta, 0.8878827102104162, 1e-12);
  EXPECT_NEAR(jacobian(theta, kRobot), -0.07145660300294146, 1e-12);
}

TEST(LegKinematics, Extremes) {
  EXPECT_NEAR(leg_length(0.0, kRobot), 0.22, 1e-15);
  EXPECT_NEAR(leg_length(std::numbers::pi, kRobot), 0.08, 1e-15);
  EXPECT_NEAR(jacobian(0.0, kRobot), 0.0, 1e-15);
}

TEST(LegKinematics, RoundTrip) {
  for (double th = 0.05; th < 3.1; th += 0.05)
    EXPECT_NEAR(inverse_kinematics(leg_length(th, kRobot), kRobot), th, 1e-9) << th;
}

TEST(LegKinematics, JacobianMatchesFiniteDifference) {
  for (double th = 0.1; th < 3.0; th += 0.1) {
    const double h = 1e-6;
    const double fd = (leg_length(th + h, kRobot) - leg_length(th - h, kRobot)) / (2 * h);
    EXPECT_NEAR(jacobian(th, kRobot), fd, 1e-9) << th;
    const double fd2 = (jacobian(th + h, kRobot) - jacobian(th - h, kRobot)) / (2 * h);
    EXPECT_NEAR(jacobian_rate(th, kRobot), fd2, 1e-8) << th;
  }
}

TEST(LegKinematics, StrictlyDecreasingOnOpenInterval) {
  double prev = leg_length(0.01, kRobot);
  for (double th = 0.02; th < 3.13; th += 0.01) {
    const double x = leg_length(th, kRobot);
    EXPECT_LT(x, prev);
    prev = x;
  }
}

TEST(LegKinematics, InverseOutsideWorkspaceThrows) {
  EXPECT_THROW(inverse_kinematics(0.25, kRobot), DomainError);
  EXPECT_THROW(inverse_kinematics(0.05, kRobot), DomainError);
}

TEST(RobotParams, Validation) {
  RobotParams p;
  EXPECT_NO_THROW(p.validate());
  EXPECT_DOUBLE_EQ(p.body_mass(), 1.1);
  p.added_mass = -0.1;
  EXPECT_THROW(p.validate(), ConfigError);
  p = RobotParams{};
  p.thigh_length = 0.2;
  EXPECT_THROW(p.validate(), ConfigError);
}
