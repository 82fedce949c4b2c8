#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "hsahop/spear.hpp"
#include "hsahop/statistics.hpp"

using namespace hsahop;

TEST(Bootstrap, ConstantSampleHasZeroWidth) {
  const std::vector<double> x(20, 3.5);
  const auto r = bootstrap_mean_ci(x, 0.99, 500, 1);
  EXPECT_EQ(r.mean, 3.5);
  EXPECT_EQ(r.ci_low, 3.5);
  EXPECT_EQ(r.ci_high, 3.5);
}

TEST(Bootstrap, SeedDeterminism) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(1.0, 0.2);
  std::vector<double> x(70);
  for (auto& v : x) v = n(rng);
  const auto a = bootstrap_mean_ci(x, 0.99, 2000, 42);
  const auto b = bootstrap_mean_ci(x, 0.99, 2000, 42);
  const auto c = bootstrap_mean_ci(x, 0.99, 2000, 43);
  EXPECT_EQ(a.ci_low, b.ci_low);
  EXPECT_EQ(a.ci_high, b.ci_high);
  EXPECT_TRUE(a.ci_low != c.ci_low || a.ci_high != c.ci_high);
}

TEST(Bootstrap, IntervalBracketsMeanAndWidensWithConfidence) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(50);
  for (auto& v : x) v = n(rng);
  const auto r90 = bootstrap_mean_ci(x, 0.90, 4000, 7);
  const auto r99 = bootstrap_mean_ci(x, 0.99, 4000, 7);
  EXPECT_LE(r99.ci_low, r99.mean);
  EXPECT_GE(r99.ci_high, r99.mean);
  EXPECT_GT(r99.ci_high - r99.ci_low, r90.ci_high - r90.ci_low);
  // Normal-theory half-width at 99% is about 2.576 / sqrt(50).
  EXPECT_NEAR(0.5 * (r99.ci_high - r99.ci_low), 2.576 / std::sqrt(50.0), 0.1);
}

TEST(Bootstrap, Errors) {
  const std::vector<double> one{1.0};
  const std::vector<double> two{1.0, 2.0};
  EXPECT_THROW(bootstrap_mean_ci(one), InputError);
  EXPECT_THROW(bootstrap_mean_ci(two, 1.0), DomainError);
  EXPECT_THROW(bootstrap_mean_ci(two, 0.9, 0), DomainError);
}

TEST(FitLine, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = fit_line(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(FitLine, Degenerate) {
  const std::vector<double> x{1, 1, 1}, y{1, 2, 3};
  EXPECT_THROW(fit_line(x, y), FitError);
  const std::vector<double> one{1};
  EXPECT_THROW(fit_line(one, one), FitError);
}

TEST(FitLine, SpearTable) {
  const auto rows = bundled_spear_rows();
  const auto f = spear_cot_at_height(rows, 0.158);
  EXPECT_NEAR(f.fit.r_squared, 0.9274940047126023, 1e-9);
  EXPECT_NEAR(f.fit.slope, -7.86214442, 1e-6);
  EXPECT_NEAR(f.cot_at_query, 2.454466083150986, 1e-9);
}

TEST(OriginFit, RecoversCoefficients) {
  std::vector<double> x, y2, y1;
  for (int i = 1; i <= 10; ++i) {
    x.push_back(i);
    y2.push_back(0.37 * i * i);
    y1.push_back(1.9 * i);
  }
  const auto q = fit_power_through_origin(x, y2, 2);
  const auto l = fit_power_through_origin(x, y1, 1);
  EXPECT_NEAR(q.coefficient, 0.37, 0.37e-9);
  EXPECT_NEAR(l.coefficient, 1.9, 1.9e-9);
  EXPECT_NEAR(q.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(l.r_squared, 1.0, 1e-12);
  const std::vector<double> zeros(3, 0.0);
  EXPECT_THROW(fit_power_through_origin(zeros, zeros, 1), FitError);
}
