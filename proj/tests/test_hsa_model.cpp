#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "hsahop/hsa_model.hpp"

using namespace hsahop;

namespace {

const HsaGeometry kGeo{};

StiffnessSurface flat_surface(double k) {
  std::vector<double> t{-150.0, 120.0}, d{0.0, 0.05};
  return StiffnessSurface(t, d, {k, k, k, k});
}

HsaForceParams params(double damping, StiffnessSurface s = default_stiffness_surface()) {
  HsaForceParams p;
  p.damping = damping;
  p.surface = std::move(s);
  return p;
}

}  // namespace

TEST(HsaLength, Examples) {
  auto n = hsa_length_from_leg(0.184, kGeo);
  EXPECT_NEAR(n.length, 0.116, 1e-15);
  EXPECT_EQ(n.extension, 0.0);
  auto full = hsa_length_from_leg(0.134, kGeo);
  EXPECT_NEAR(full.length, 0.166, 1e-15);
  EXPECT_NEAR(full.extension, 0.050, 1e-15);
  auto slack = hsa_length_from_leg(0.20, kGeo);
  EXPECT_NEAR(slack.length, 0.10, 1e-15);
  EXPECT_EQ(slack.extension, 0.0);
}

TEST(HsaLength, OutOfRangeNamesBound) {
  try {
    hsa_length_from_leg(0.12, kGeo);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("max_stroke"), std::string::npos);
  }
  try {
    hsa_length_from_leg(0.31, kGeo);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("rod_length"), std::string::npos);
  }
}

TEST(HsaLength, AffineAndDecreasing) {
  double prev = hsa_length_from_leg(0.134, kGeo).length;
  for (double x = 0.135; x <= 0.30; x += 0.001) {
    const double l = hsa_length_from_leg(x, kGeo).length;
    EXPECT_LT(l, prev);
    EXPECT_NEAR(prev - l, 0.001, 1e-12);
    prev = l;
  }
}

TEST(StiffnessSurface, DefaultGridShape) {
  const auto s = default_stiffness_surface();
  ASSERT_EQ(s.twist_grid().size(), 28u);
  ASSERT_EQ(s.displacement_grid().size(), 11u);
  EXPECT_EQ(s.twist_grid().front(), -150.0);
  EXPECT_EQ(s.twist_grid().back(), 120.0);
  EXPECT_NEAR(s.displacement_grid().back(), 0.05, 1e-15);
}

TEST(StiffnessSurface, DefaultAnchors) {
  const auto s = default_stiffness_surface();
  EXPECT_NEAR(s.positive_twist_mean(), 912.0, 9.12);
  EXPECT_GE(s.max_value(), 16000.0);
  EXPECT_NEAR(s.max_value() / s.min_value(), 21.0, 1.0);
}

TEST(StiffnessSurface, NodeIdentityIsBitExact) {
  const auto s = default_stiffness_surface();
  for (std::size_t i = 0; i < s.twist_grid().size(); ++i)
    for (std::size_t j = 0; j < s.displacement_grid().size(); ++j)
      EXPECT_EQ(stiffness_at(s, s.twist_grid()[i], s.displacement_grid()[j]), s.at(i, j));
}

TEST(StiffnessSurface, BilinearOracle) {
  std::vector<double> t{0.0, 10.0}, d{0.0, 0.01};
  StiffnessSurface s(t, d, {100.0, 200.0, 300.0, 500.0});
  // Centre: mean of the corners.
  EXPECT_DOUBLE_EQ(stiffness_at(s, 5.0, 0.005), 275.0);
  EXPECT_DOUBLE_EQ(stiffness_at(s, 0.0, 0.005), 150.0);
  EXPECT_DOUBLE_EQ(stiffness_at(s, 10.0, 0.0025), 350.0);
}

TEST(StiffnessSurface, ContinuousInsideBounds) {
  const auto s = default_stiffness_surface();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> tw(-150.0, 120.0 - 1e-6), dx(0.0, 0.05 - 1e-9);
  for (int k = 0; k < 2000; ++k) {
    const double t = tw(rng), d = dx(rng);
    const double a = stiffness_at(s, t, d), b = stiffness_at(s, t + 1e-6, d + 1e-9);
    EXPECT_LT(std::abs(a - b), 1e-2 * (1.0 + a * 1e-3));
  }
}

TEST(StiffnessSurface, OutOfGridThrows) {
  const auto s = default_stiffness_surface();
  EXPECT_THROW(stiffness_at(s, -151.0, 0.01), DomainError);
  EXPECT_THROW(stiffness_at(s, 121.0, 0.01), DomainError);
  EXPECT_THROW(stiffness_at(s, 0.0, -1e-6), DomainError);
  EXPECT_THROW(stiffness_at(s, 0.0, 0.051), DomainError);
}

TEST(StiffnessSurface, ConstructorValidation) {
  EXPECT_THROW(StiffnessSurface({0.0, 0.0}, {0.0, 1.0}, {1, 1, 1, 1}), InputError);
  EXPECT_THROW(StiffnessSurface({0.0, 1.0}, {0.0, 1.0}, {1, 1, 1}), InputError);
  EXPECT_THROW(StiffnessSurface({0.0, 1.0}, {0.0, 1.0}, {1, 1, 0, 1}), InputError);
  EXPECT_THROW(StiffnessSurface({0.0}, {0.0, 1.0}, {1, 1}), InputError);
}

TEST(StiffnessSurface, MonotoneJamming) {
  const auto s = default_stiffness_surface();
  for (double d : s.displacement_grid()) {
    const double unjammed = stiffness_at(s, kGeo.sweep_twist(0.0), d);
    for (double servo = kGeo.jam_twist; servo <= 150.0; servo += 1.0)
      EXPECT_GT(stiffness_at(s, kGeo.sweep_twist(servo), d), unjammed) << servo << " " << d;
  }
}

TEST(StiffnessSurface, GridFileRoundTrip) {
  const auto s = default_stiffness_surface();
  std::stringstream ss;
  write_stiffness_surface(ss, s);
  const auto r = read_stiffness_surface(ss);
  EXPECT_EQ(r.twist_grid(), s.twist_grid());
  EXPECT_EQ(r.displacement_grid(), s.displacement_grid());
  EXPECT_EQ(r.values(), s.values());
}

TEST(StiffnessSurface, GridFileSeparatorsAndErrors) {
  std::istringstream tabbed("# comment\ntwist\t0\t0.05\n-10\t900\t910\n10\t920\t930\n");
  const auto s = read_stiffness_surface(tabbed);
  EXPECT_EQ(s.at(1, 1), 930.0);
  std::istringstream ragged("twist,0,0.05\n-10,900\n");
  EXPECT_THROW(read_stiffness_surface(ragged), InputError);
  std::istringstream bad("twist,0,0.05\n-10,900,abc\n");
  EXPECT_THROW(read_stiffness_surface(bad), InputError);
  std::istringstream empty("# nothing\n");
  EXPECT_THROW(read_stiffness_surface(empty), InputError);
  EXPECT_THROW(load_stiffness_surface("/nonexistent/grid.csv"), InputError);
}

TEST(HsaJam, Threshold) {
  EXPECT_TRUE(is_jammed(135.0, kGeo));
  EXPECT_FALSE(is_jammed(0.0, kGeo));
  EXPECT_FALSE(is_jammed(134.9, kGeo));
  EXPECT_TRUE(is_jammed(150.0, kGeo));
}

TEST(HsaForce, Examples) {
  EXPECT_EQ(hsa_force({0.0, 0.0, 0.0, false}, params(0.0)), 0.0);
  EXPECT_NEAR(hsa_force({0.0, 0.05, 0.0, false}, params(0.0, flat_surface(912.0))), 45.6, 1e-12);
  EXPECT_NEAR(hsa_force({140.0, 0.005, 0.0, true}, params(0.0, flat_surface(16000.0))), 80.0,
              1e-12);
}

TEST(HsaForce, DampingAddsAndFloorsAtZero) {
  const auto p = params(20.0, flat_surface(1000.0));
  EXPECT_NEAR(hsa_force({0.0, 0.01, 0.5, false}, p), 10.0 + 10.0, 1e-12);
  // Retracting fast enough, the viscous term would push; the force floors at zero.
  EXPECT_EQ(hsa_force({0.0, 0.001, -1.0, false}, p), 0.0);
  // Slack with the leg still closing: no pull.
  EXPECT_EQ(hsa_force({0.0, 0.0, -0.2, false}, p), 0.0);
}

TEST(HsaForce, TensionOnlyProperty) {
  const auto p = params(15.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ext(0.0, 0.05), rate(0.0, 3.0), tw(-120.0, 150.0);
  for (int i = 0; i < 5000; ++i) {
    const double t = tw(rng);
    EXPECT_GE(hsa_force({t, ext(rng), rate(rng), is_jammed(t, kGeo)}, p), 0.0);
  }
}

TEST(HsaForce, InputValidation) {
  const auto p = params(0.0);
  EXPECT_THROW(hsa_force({0.0, 0.06, 0.0, false}, p), DomainError);
  EXPECT_THROW(hsa_force({0.0, -0.001, 0.0, false}, p), DomainError);
  EXPECT_THROW(hsa_force({140.0, 0.01, 0.0, false}, p), DomainError);
  EXPECT_THROW(hsa_force({0.0, 0.01, 0.0, false}, params(-1.0)), DomainError);
}

TEST(HsaForce, StateFromLeg) {
  const auto s = hsa_state_from_leg(0.164, -0.3, 10.0, kGeo);
  EXPECT_NEAR(s.extension, 0.02, 1e-15);
  EXPECT_DOUBLE_EQ(s.extension_rate, 0.3);
  EXPECT_FALSE(s.jammed);
  const auto slack = hsa_state_from_leg(0.19, 0.5, 140.0, kGeo);
  EXPECT_EQ(slack.extension, 0.0);
  EXPECT_EQ(slack.extension_rate, 0.0);
  EXPECT_TRUE(slack.jammed);
}

// Closed extension cycle x(t) = x0 - A (1 - cos wt): zero net work without
// damping, negative net work with it.
namespace {
double cycle_work(double damping) {
  const auto p = params(damping, flat_surface(900.0));
  const double a = 0.02, w = 2.0 * std::numbers::pi / 0.2;
  const int n = 20000;
  const double dt = 0.2 / n;
  double work = 0.0;
  auto power = [&](double t) {
    const double x = 0.184 - a * (1.0 - std::cos(w * t));
    const double xd = -a * w * std::sin(w * t);
    return hsa_force(hsa_state_from_leg(x, xd, 0.0, kGeo), p) * xd;
  };
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    work += dt / 6.0 * (power(t) + 4.0 * power(t + 0.5 * dt) + power(t + dt));
  }
  return work;
}
}  // namespace

TEST(HsaForce, ClosedCycleWork) {
  EXPECT_NEAR(cycle_work(0.0), 0.0, 1e-9);
  EXPECT_LT(cycle_work(5.0), -1e-3);
}

TEST(DampingCalibration, ConvergesOnMonotoneOracle) {
  auto eta = [](double b) { return 0.6 * std::exp(-b / 10.0); };
  const auto r = calibrate_damping(0.29, eta);
  EXPECT_NEAR(r.eta, 0.29, 0.005);
  EXPECT_GT(r.damping, 0.0);
  EXPECT_LE(r.iterations, 40);
  EXPECT_NEAR(eta(r.damping), 0.29, 0.05);
}

TEST(DampingCalibration, ZeroDampingEndpoint) {
  auto eta = [](double b) { return 0.5 - 0.001 * b; };
  const auto r = calibrate_damping(0.5, eta);
  EXPECT_EQ(r.damping, 0.0);
}

TEST(DampingCalibration, UnreachableTargetReportsRange) {
  auto eta = [](double b) { return 0.6 * std::exp(-b / 10.0); };
  try {
    calibrate_damping(0.999, eta);
    FAIL();
  } catch (const CalibrationError& e) {
    EXPECT_NEAR(e.achieved_high(), 0.6, 1e-12);
    EXPECT_LT(e.achieved_low(), 0.01);
  }
}

TEST(DampingCalibration, NonMonotoneOracleAborts) {
  auto eta = [](double b) { return b > 150.0 && b < 250.0 ? 0.9 : 0.5 - b / 1000.0; };
  EXPECT_THROW(calibrate_damping(0.3, eta), CalibrationError);
}

TEST(DampingCalibration, RejectsBadTarget) {
  auto eta = [](double) { return 0.5; };
  EXPECT_THROW(calibrate_damping(0.0, eta), DomainError);
  EXPECT_THROW(calibrate_damping(1.0, eta), DomainError);
}
