//
// Copyright 2026 The Subspace DP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Small statistical helpers for the audit harness.

#ifndef SUBSPACE_DP_STATS_H_
#define SUBSPACE_DP_STATS_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include "Eigen/Dense"
#include "boost/math/distributions/binomial.hpp"
#include "boost/math/distributions/students_t.hpp"
#include "subspace_dp/status.h"

namespace subspace_dp {

inline double StandardNormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// P(K > lambda) for the limiting Kolmogorov distribution.
inline double KolmogorovSurvival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov test of `samples` against N(0, stddev^2).
// The p-value uses the asymptotic law with Stephens' small-sample factor.
inline KsResult KsTestNormal(std::vector<double> samples, double stddev) {
  KsResult result;
  const std::size_t m = samples.size();
  if (m == 0 || !(stddev > 0.0)) return result;
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double f = StandardNormalCdf(samples[i] / stddev);
    d = std::max({d, static_cast<double>(i + 1) / m - f,
                  f - static_cast<double>(i) / m});
  }
  const double root = std::sqrt(static_cast<double>(m));
  result.statistic = d;
  result.p_value = KolmogorovSurvival((root + 0.12 + 0.11 / root) * d);
  return result;
}

struct RegressionFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_std_error = 0.0;
  double t_statistic = 0.0;
  double p_value = 1.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double alpha = 0.01;
  int units = 0;

  bool ci_contains_zero() const { return ci_low <= 0.0 && 0.0 <= ci_high; }
  bool significant() const { return p_value < alpha; }
};

// Ordinary least squares of y on x with a two-sided t test on the slope and
// a (1 - alpha) confidence interval.
inline absl::StatusOr<RegressionFit> FitSimpleRegression(
    const Eigen::VectorXd& x, const Eigen::VectorXd& y, double alpha) {
  const Eigen::Index m = x.size();
  if (y.size() != m) {
    return MakeError(ErrorKind::kDimensionMismatch, "regressor has ", m,
                     " values, response ", y.size());
  }
  if (m < 3) {
    return MakeError(ErrorKind::kInsufficientUnits, "need at least 3 points");
  }
  if (!x.allFinite() || !y.allFinite()) {
    return MakeError(ErrorKind::kNonFiniteInput, "regression input not finite");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    return MakeError(ErrorKind::kInvalidArgument, "alpha must be in (0, 1)");
  }
  const double mx = x.mean();
  const double my = y.mean();
  const Eigen::VectorXd dx = x.array() - mx;
  const Eigen::VectorXd dy = y.array() - my;
  const double sxx = dx.squaredNorm();
  if (!(sxx > 1e-12 * std::max(1.0, mx * mx) * m)) {
    return MakeError(ErrorKind::kDegenerateRegressor,
                     "regressor is constant across units");
  }
  RegressionFit fit;
  fit.alpha = alpha;
  fit.units = static_cast<int>(m);
  fit.slope = dx.dot(dy) / sxx;
  fit.intercept = my - fit.slope * mx;
  const double rss = (dy - fit.slope * dx).squaredNorm();
  const double dof = static_cast<double>(m - 2);
  fit.slope_std_error = std::sqrt(rss / dof / sxx);
  const boost::math::students_t dist(dof);
  const double t_crit = boost::math::quantile(dist, 1.0 - alpha / 2.0);
  if (fit.slope_std_error > 0.0) {
    fit.t_statistic = fit.slope / fit.slope_std_error;
    fit.p_value =
        2.0 * boost::math::cdf(boost::math::complement(
                  dist, std::abs(fit.t_statistic)));
  } else {
    // Exact fit: no evidence either way unless the slope is non-zero.
    fit.t_statistic = 0.0;
    fit.p_value = fit.slope == 0.0 ? 1.0 : 0.0;
  }
  fit.ci_low = fit.slope - t_crit * fit.slope_std_error;
  fit.ci_high = fit.slope + t_crit * fit.slope_std_error;
  return fit;
}

// P(X >= k) for X ~ Binomial(trials, p).
inline double BinomialUpperTail(int k, int trials, double p) {
  if (k <= 0) return 1.0;
  if (k > trials) return 0.0;
  const boost::math::binomial dist(trials, p);
  return boost::math::cdf(boost::math::complement(dist, k - 1));
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_STATS_H_
