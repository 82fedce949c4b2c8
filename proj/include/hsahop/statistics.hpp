#pragma once

// Percentile bootstrap and small least-squares fits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <fmt/format.h>

#include "hsahop/errors.hpp"

namespace hsahop {

struct BootstrapResult {
  double mean;
  double ci_low;
  double ci_high;
  double confidence;
  std::size_t resamples;
};

namespace detail {
// Linear interpolation between order statistics (Hyndman-Fan type 7).
inline double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(i);
  return v[i] + frac * (v[i + 1] - v[i]);
}
}  // namespace detail

inline double mean_of(std::span<const double> x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Percentile bootstrap CI of the sample mean. Deterministic for a given seed.
inline BootstrapResult bootstrap_mean_ci(std::span<const double> samples, double confidence = 0.99,
                                         std::size_t resamples = 10000, std::uint64_t seed = 0) {
  if (samples.size() < 2) throw InputError("bootstrap needs at least 2 samples");
  if (!(confidence > 0.0 && confidence < 1.0))
    throw DomainError("bootstrap confidence must lie in (0, 1)");
  if (resamples < 1) throw DomainError("bootstrap needs at least one resample");

  const std::size_t n = samples.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += samples[pick(rng)];
    m = s / static_cast<double>(n);
  }
  std::sort(means.begin(), means.end());
  const double alpha = 1.0 - confidence;
  return {mean_of(samples), detail::quantile_sorted(means, 0.5 * alpha),
          detail::quantile_sorted(means, 1.0 - 0.5 * alpha), confidence, resamples};
}

struct LinearFit {
  double slope;
  double intercept;
  double r_squared;

  double operator()(double x) const { return intercept + slope * x; }
};

namespace detail {
inline double r_squared(std::span<const double> y, std::span<const double> yhat) {
  const double ybar = mean_of(y);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    ss_res += (y[i] - yhat[i]) * (y[i] - yhat[i]);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  return ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
}
}  // namespace detail

/// Ordinary least squares y = intercept + slope * x.
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw FitError("fit: x and y differ in length");
  if (x.size() < 2) throw FitError("fit: need at least 2 points");
  const double xbar = mean_of(x), ybar = mean_of(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - xbar) * (x[i] - xbar);
    sxy += (x[i] - xbar) * (y[i] - ybar);
  }
  if (!(sxx > 0.0)) throw FitError("fit: degenerate abscissa (all x equal)");
  LinearFit f{sxy / sxx, 0.0, 0.0};
  f.intercept = ybar - f.slope * xbar;
  std::vector<double> yhat(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) yhat[i] = f(x[i]);
  f.r_squared = detail::r_squared(y, yhat);
  return f;
}

// y = coefficient * x^power, least squares with no intercept.
struct OriginFit {
  double coefficient;
  double r_squared;
};

inline OriginFit fit_power_through_origin(std::span<const double> x, std::span<const double> y,
                                          int power) {
  if (x.size() != y.size() || x.empty()) throw FitError("origin fit: bad series");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double b = std::pow(x[i], power);
    num += b * y[i];
    den += b * b;
  }
  if (!(den > 0.0)) throw FitError("origin fit: all abscissae are zero");
  OriginFit f{num / den, 0.0};
  std::vector<double> yhat(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) yhat[i] = f.coefficient * std::pow(x[i], power);
  f.r_squared = detail::r_squared(y, yhat);
  return f;
}

}  // namespace hsahop
