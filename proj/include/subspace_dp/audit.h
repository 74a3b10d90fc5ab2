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

// Statistical audit of additive mechanisms: repeated releases with
// independent noise streams, compared against the analytic mean (the exact
// answer), MSE and covariance; Gaussianity of 1-D projections; regression of
// errors on log(true value); binned privacy-ratio probe on a 1-D null space.
//
// Repetition r always uses NoiseSource(seed, r). Repetitions are grouped in
// fixed chunks of kAuditChunk and chunk sums are combined pairwise in chunk
// order, so a report depends only on (mechanism, data, R, seed) and not on
// the thread count.

#ifndef SUBSPACE_DP_AUDIT_H_
#define SUBSPACE_DP_AUDIT_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "Eigen/Dense"
#include "subspace_dp/mechanisms.h"
#include "subspace_dp/noise_source.h"
#include "subspace_dp/parallel.h"
#include "subspace_dp/query_model.h"
#include "subspace_dp/stats.h"
#include "subspace_dp/status.h"

namespace subspace_dp {

inline constexpr std::int64_t kAuditChunk = 1024;
inline constexpr int kKsDirections = 3;

// Pass/fail thresholds. Copied into every report.
struct AuditThresholds {
  // |mean error| <= guard * std / sqrt(R) per coordinate.
  double mean_guard_sigmas = 5.0;
  // |empirical MSE / analytic MSE - 1| <= this.
  double mse_relative_tolerance = 0.05;
  // |empirical - analytic covariance| <= guard * standard error per entry.
  double covariance_guard_sigmas = 5.0;
  // Covariance is skipped above this dimension.
  int max_covariance_dim = 64;
  double ks_min_p_value = 1e-3;
  double bias_alpha = 0.01;
  double ratio_slack_stds = 3.0;
  int ratio_min_hits = 500;
  int ratio_bins = 40;
  double ratio_central_mass = 0.99;
};

struct AuditOptions {
  AuditThresholds thresholds;
  // Keep the error vectors of the first `record_runs` repetitions.
  int record_runs = 0;
  // 0 = ThreadCap().
  int max_threads = 0;
};

struct DirectionKs {
  // Direction is Pi_N e_coordinate, normalized.
  int coordinate = 0;
  double stddev = 0.0;
  KsResult ks;
};

struct BiasBatchSummary {
  int regressions = 0;
  int significant_negative = 0;
  double alpha = 0.01;
  // One-sided false-positive rate alpha / 2 under an unbiased mechanism.
  double nominal_rate = 0.005;
  double binomial_p_value = 1.0;
  bool consistent = true;
};

struct RatioProbeResult {
  std::int64_t repetitions = 0;
  double epsilon = 0.0;
  double range_low = 0.0;
  double range_high = 0.0;
  int bins = 0;
  int bins_used = 0;
  // max over used bins of |log(c1 / c2)|.
  double max_log_ratio = 0.0;
  // max over used bins of |log(c1 / c2)| - slack(c1, c2).
  double max_excess = 0.0;
  double slack_at_max = 0.0;
  bool passed = false;
};

struct AuditReport {
  MechanismId mechanism_id = MechanismId::kProjectedGaussian;
  std::int64_t repetitions = 0;
  std::uint64_t seed = 0;
  AuditThresholds thresholds;
  int n = 0;
  int null_dim = 0;
  // Both neighbouring conventions: bounded replacement D2(A), and the
  // radius max_j ||a_j|| of K = A B_1 used by the correlated mechanism.
  double bounded_l2_sensitivity = 0.0;
  double unit_l1_radius = 0.0;

  Eigen::VectorXd mean_error;
  Eigen::VectorXd error_std;
  double max_mean_z = 0.0;
  bool mean_passed = true;

  double empirical_mse = 0.0;
  double analytic_mse = 0.0;
  double mse_ratio = 1.0;
  bool mse_passed = true;

  std::optional<double> covariance_max_deviation;
  std::optional<double> covariance_max_z;
  bool covariance_passed = true;

  double invariant_max_deviation = 0.0;
  std::int64_t invariant_failures = 0;
  bool invariant_passed = true;

  std::vector<DirectionKs> ks;
  bool ks_passed = true;

  // n x record_runs.
  Eigen::MatrixXd recorded_errors;

  std::optional<RegressionFit> bias;
  std::optional<BiasBatchSummary> bias_batch;
  std::optional<RatioProbeResult> ratio;

  bool passed() const {
    return mean_passed && mse_passed && covariance_passed &&
           invariant_passed && ks_passed &&
           (!bias.has_value() || bias->ci_contains_zero()) &&
           (!bias_batch.has_value() || bias_batch->consistent) &&
           (!ratio.has_value() || ratio->passed);
  }
};

namespace internal {

struct MomentSums {
  std::int64_t count = 0;
  Eigen::VectorXd sum;
  Eigen::VectorXd sum_sq;
  Eigen::MatrixXd cross;
  Eigen::MatrixXd cross_sq;
  double sq_norm = 0.0;
  double max_invariant_deviation = 0.0;
  std::int64_t invariant_failures = 0;
  // kKsDirections x count projections, kept in repetition order.
  Eigen::MatrixXd projections;

  void Add(const MomentSums& o) {
    count += o.count;
    sum += o.sum;
    sum_sq += o.sum_sq;
    if (cross.size() > 0) {
      cross += o.cross;
      cross_sq += o.cross_sq;
    }
    sq_norm += o.sq_norm;
    max_invariant_deviation =
        std::max(max_invariant_deviation, o.max_invariant_deviation);
    invariant_failures += o.invariant_failures;
    const Eigen::Index cols = projections.cols();
    projections.conservativeResize(Eigen::NoChange, cols + o.projections.cols());
    projections.rightCols(o.projections.cols()) = o.projections;
  }
};

// Chunk sums combined as a balanced binary tree in chunk order.
template <typename T>
T PairwiseReduce(std::vector<T> parts) {
  while (parts.size() > 1) {
    std::vector<T> next;
    for (std::size_t i = 0; i + 1 < parts.size(); i += 2) {
      parts[i].Add(parts[i + 1]);
      next.push_back(std::move(parts[i]));
    }
    if (parts.size() % 2 == 1) next.push_back(std::move(parts.back()));
    parts = std::move(next);
  }
  return std::move(parts.front());
}

// One release; returns the error vector values - truth.
inline absl::StatusOr<Eigen::VectorXd> AuditRelease(
    const AdditiveMechanism& mechanism, const Eigen::VectorXd& truth,
    std::uint64_t seed, std::int64_t rep, double* deviation) {
  NoiseSource noise(seed, static_cast<std::uint64_t>(rep));
  auto release = mechanism.ReleaseAnswer(truth, noise);
  if (!release.ok()) return release.status();
  *deviation = release->invariant_max_deviation;
  return Eigen::VectorXd(release->values - truth);
}

inline std::vector<int> KsCoordinates(const InvariantSystem& sys,
                                      std::vector<Eigen::VectorXd>* dirs) {
  std::vector<int> coords;
  for (int i = 0; i < sys.n() && static_cast<int>(coords.size()) < kKsDirections;
       ++i) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(sys.n());
    unit(i) = 1.0;
    Eigen::VectorXd d = sys.ProjectNull(unit);
    const double norm = d.norm();
    if (norm < 1e-8) continue;
    coords.push_back(i);
    dirs->push_back(d / norm);
  }
  return coords;
}

}  // namespace internal

// Repeated releases of `mechanism` on `h`. Statistical failures are reported
// through the pass flags, never as errors.
inline absl::StatusOr<AuditReport> RunMomentAudit(
    const AdditiveMechanism& mechanism, const Histogram& h,
    std::int64_t repetitions, std::uint64_t seed,
    const AuditOptions& options = {}) {
  if (repetitions < 1) {
    return MakeError(ErrorKind::kInvalidArgument, "repetitions must be >= 1");
  }
  SUBSPACE_DP_ASSIGN_OR_RETURN(Eigen::VectorXd truth,
                               Evaluate(mechanism.query(), h));
  const InvariantSystem& sys = mechanism.invariants();
  const AuditThresholds& th = options.thresholds;
  const int n = sys.n();
  const bool with_cov = n <= th.max_covariance_dim;

  AuditReport report;
  report.mechanism_id = mechanism.id();
  report.repetitions = repetitions;
  report.seed = seed;
  report.thresholds = th;
  report.n = n;
  report.null_dim = sys.null_dim();
  report.bounded_l2_sensitivity =
      LpSensitivity(mechanism.query(), SensitivityNorm::kL2);
  report.unit_l1_radius =
      mechanism.query().a_matrix().colwise().norm().maxCoeff();
  report.analytic_mse = mechanism.analytic_mse();

  std::vector<Eigen::VectorXd> dirs;
  const std::vector<int> ks_coords =
      IsGaussian(mechanism.id()) ? internal::KsCoordinates(sys, &dirs)
                                 : std::vector<int>{};
  const int num_dirs = static_cast<int>(dirs.size());

  const std::int64_t chunks = (repetitions + kAuditChunk - 1) / kAuditChunk;
  std::vector<internal::MomentSums> parts(chunks);
  std::vector<absl::Status> errors(chunks);
  ParallelFor(
      static_cast<std::size_t>(chunks),
      [&](std::size_t c) {
        const std::int64_t begin = static_cast<std::int64_t>(c) * kAuditChunk;
        const std::int64_t end = std::min(repetitions, begin + kAuditChunk);
        internal::MomentSums s;
        s.count = end - begin;
        s.sum = Eigen::VectorXd::Zero(n);
        s.sum_sq = Eigen::VectorXd::Zero(n);
        if (with_cov) {
          s.cross = Eigen::MatrixXd::Zero(n, n);
          s.cross_sq = Eigen::MatrixXd::Zero(n, n);
        }
        s.projections.resize(num_dirs, end - begin);
        for (std::int64_t r = begin; r < end; ++r) {
          double deviation = 0.0;
          auto err = internal::AuditRelease(mechanism, truth, seed, r, &deviation);
          if (!err.ok()) {
            if (ErrorKindOf(err.status()) != ErrorKind::kInvariantViolation) {
              errors[c] = err.status();
              return;
            }
            ++s.invariant_failures;
            // Record the deviation of the rejected draw.
            NoiseSource noise(seed, static_cast<std::uint64_t>(r));
            const Eigen::VectorXd e = mechanism.SampleNoise(noise);
            deviation = (sys.c_matrix() * e).cwiseAbs().maxCoeff();
            err = e;
          }
          const Eigen::VectorXd& e = *err;
          s.max_invariant_deviation =
              std::max(s.max_invariant_deviation, deviation);
          s.sum += e;
          s.sum_sq += e.cwiseAbs2();
          s.sq_norm += e.squaredNorm();
          if (with_cov) {
            const Eigen::MatrixXd outer = e * e.transpose();
            s.cross += outer;
            s.cross_sq += outer.cwiseAbs2();
          }
          for (int k = 0; k < num_dirs; ++k) {
            s.projections(k, r - begin) = dirs[k].dot(e);
          }
        }
        parts[c] = std::move(s);
      },
      options.max_threads);
  for (const absl::Status& st : errors) SUBSPACE_DP_RETURN_IF_ERROR(st);
  const internal::MomentSums total = internal::PairwiseReduce(std::move(parts));

  const double reps = static_cast<double>(repetitions);
  report.mean_error = total.sum / reps;
  const Eigen::VectorXd second = total.sum_sq / reps;
  report.error_std =
      (second - report.mean_error.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  if (repetitions > 1) report.error_std *= std::sqrt(reps / (reps - 1.0));
  for (int i = 0; i < n; ++i) {
    const double se = report.error_std(i) / std::sqrt(reps);
    const double m = std::abs(report.mean_error(i));
    const double z = se > 0.0 ? m / se : (m == 0.0 ? 0.0 : INFINITY);
    report.max_mean_z = std::max(report.max_mean_z, z);
  }
  report.mean_passed = report.max_mean_z <= th.mean_guard_sigmas;

  report.empirical_mse = total.sq_norm / reps;
  if (report.analytic_mse > 0.0) {
    report.mse_ratio = report.empirical_mse / report.analytic_mse;
  } else {
    report.mse_ratio = report.empirical_mse == 0.0 ? 1.0 : INFINITY;
  }
  report.mse_passed =
      std::abs(report.mse_ratio - 1.0) <= th.mse_relative_tolerance;

  if (with_cov) {
    const Eigen::MatrixXd expected = mechanism.NoiseCovariance();
    const Eigen::MatrixXd emp = total.cross / reps;
    const Eigen::MatrixXd fourth = total.cross_sq / reps;
    double max_dev = 0.0, max_z = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const double dev = std::abs(emp(i, j) - expected(i, j));
        const double se =
            std::sqrt(std::max(0.0, fourth(i, j) - emp(i, j) * emp(i, j)) / reps);
        max_dev = std::max(max_dev, dev);
        const double z =
            se > 0.0 ? dev / se : (dev <= 1e-12 * (1 + std::abs(expected(i, j)))
                                        ? 0.0
                                        : INFINITY);
        max_z = std::max(max_z, z);
      }
    }
    report.covariance_max_deviation = max_dev;
    report.covariance_max_z = max_z;
    report.covariance_passed = max_z <= th.covariance_guard_sigmas;
  }

  report.invariant_max_deviation = total.max_invariant_deviation;
  report.invariant_failures = total.invariant_failures;
  report.invariant_passed = total.invariant_failures == 0;

  for (int k = 0; k < num_dirs; ++k) {
    DirectionKs d;
    d.coordinate = ks_coords[k];
    d.stddev = std::sqrt(mechanism.NoiseVarianceAlong(dirs[k]));
    if (d.stddev > 0.0) {
      const Eigen::VectorXd row = total.projections.row(k);
      d.ks = KsTestNormal(std::vector<double>(row.data(), row.data() + row.size()),
                          d.stddev);
    }
    report.ks_passed = report.ks_passed && d.ks.p_value > th.ks_min_p_value;
    report.ks.push_back(d);
  }

  const int keep = static_cast<int>(
      std::min<std::int64_t>(options.record_runs, repetitions));
  report.recorded_errors.resize(n, keep);
  for (int r = 0; r < keep; ++r) {
    double deviation = 0.0;
    auto err = internal::AuditRelease(mechanism, truth, seed, r, &deviation);
    if (err.ok()) {
      report.recorded_errors.col(r) = *err;
    } else {
      NoiseSource noise(seed, static_cast<std::uint64_t>(r));
      report.recorded_errors.col(r) = mechanism.SampleNoise(noise);
    }
  }
  return report;
}

// OLS of per-unit error on log(true value). `errors` is units x runs; the
// regression uses the mean error of each unit over runs.
inline absl::StatusOr<RegressionFit> BiasRegression(
    const Eigen::VectorXd& true_values, const Eigen::MatrixXd& errors,
    double alpha = 0.01) {
  if (errors.rows() != true_values.size() || errors.cols() < 1) {
    return MakeError(ErrorKind::kDimensionMismatch, "errors are ",
                     errors.rows(), " x ", errors.cols(), " for ",
                     true_values.size(), " units");
  }
  if (true_values.size() < 5) {
    return MakeError(ErrorKind::kInsufficientUnits, "bias regression needs at "
                     "least 5 units, got ", true_values.size());
  }
  if (!true_values.allFinite() || true_values.minCoeff() <= 0.0) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "true values must be positive to take logs");
  }
  const Eigen::VectorXd log_true = true_values.array().log();
  const Eigen::VectorXd mean_error = errors.rowwise().mean();
  return FitSimpleRegression(log_true, mean_error, alpha);
}

// Counts significantly negative slopes in a batch of regressions and tests
// the count against the one-sided nominal rate alpha / 2.
inline BiasBatchSummary SummarizeBiasBatch(
    const std::vector<RegressionFit>& fits, double alpha) {
  BiasBatchSummary s;
  s.regressions = static_cast<int>(fits.size());
  s.alpha = alpha;
  s.nominal_rate = alpha / 2.0;
  for (const RegressionFit& f : fits) {
    if (f.slope < 0.0 && f.p_value < alpha) ++s.significant_negative;
  }
  s.binomial_p_value =
      BinomialUpperTail(s.significant_negative, s.regressions, s.nominal_rate);
  s.consistent = s.binomial_p_value > alpha;
  return s;
}

// Releases for two neighbouring databases, pushed forward to the single
// null-space coordinate q^T y, histogrammed over the central mass of the
// pooled sample. Database 1 uses streams [0, R), database 2 [R, 2R).
inline absl::StatusOr<RatioProbeResult> RatioProbe(
    const AdditiveMechanism& mechanism, const Histogram& h1,
    const Histogram& h2, std::int64_t repetitions, std::uint64_t seed,
    const AuditThresholds& th = {}, int max_threads = 0) {
  const InvariantSystem& sys = mechanism.invariants();
  if (sys.null_dim() != 1) {
    return MakeError(ErrorKind::kNotOneDimensional, "null space has dimension ",
                     sys.null_dim());
  }
  if (repetitions < 1 || th.ratio_bins < 1 ||
      !(th.ratio_central_mass > 0.0 && th.ratio_central_mass <= 1.0)) {
    return MakeError(ErrorKind::kInvalidArgument, "bad probe configuration");
  }
  SUBSPACE_DP_ASSIGN_OR_RETURN(Eigen::VectorXd t1,
                               Evaluate(mechanism.query(), h1));
  SUBSPACE_DP_ASSIGN_OR_RETURN(Eigen::VectorXd t2,
                               Evaluate(mechanism.query(), h2));
  const Eigen::VectorXd q = sys.q_null().col(0);
  std::vector<double> s1(repetitions), s2(repetitions);
  const std::int64_t chunks = (repetitions + kAuditChunk - 1) / kAuditChunk;
  std::vector<absl::Status> errors(chunks);
  ParallelFor(
      static_cast<std::size_t>(chunks),
      [&](std::size_t c) {
        const std::int64_t begin = static_cast<std::int64_t>(c) * kAuditChunk;
        const std::int64_t end = std::min(repetitions, begin + kAuditChunk);
        for (std::int64_t r = begin; r < end; ++r) {
          NoiseSource n1(seed, static_cast<std::uint64_t>(r));
          NoiseSource n2(seed, static_cast<std::uint64_t>(repetitions + r));
          auto y1 = mechanism.ReleaseAnswer(t1, n1);
          auto y2 = mechanism.ReleaseAnswer(t2, n2);
          if (!y1.ok() || !y2.ok()) {
            errors[c] = y1.ok() ? y2.status() : y1.status();
            return;
          }
          s1[r] = q.dot(y1->values);
          s2[r] = q.dot(y2->values);
        }
      },
      max_threads);
  for (const absl::Status& st : errors) SUBSPACE_DP_RETURN_IF_ERROR(st);

  std::vector<double> pooled(s1);
  pooled.insert(pooled.end(), s2.begin(), s2.end());
  std::sort(pooled.begin(), pooled.end());
  const double tail = (1.0 - th.ratio_central_mass) / 2.0;
  const auto at = [&](double p) {
    const std::size_t idx = std::min<std::size_t>(
        pooled.size() - 1, static_cast<std::size_t>(p * (pooled.size() - 1)));
    return pooled[idx];
  };
  RatioProbeResult result;
  result.repetitions = repetitions;
  result.epsilon = mechanism.budget().epsilon();
  result.range_low = at(tail);
  result.range_high = at(1.0 - tail);
  result.bins = th.ratio_bins;
  const double width = (result.range_high - result.range_low) / th.ratio_bins;
  if (!(width > 0.0)) {
    return MakeError(ErrorKind::kInsufficientMass,
                     "released coordinate has no spread");
  }
  std::vector<std::int64_t> c1(th.ratio_bins, 0), c2(th.ratio_bins, 0);
  auto bin_of = [&](double v) -> int {
    if (v < result.range_low || v > result.range_high) return -1;
    return std::min(th.ratio_bins - 1,
                    static_cast<int>((v - result.range_low) / width));
  };
  for (std::int64_t r = 0; r < repetitions; ++r) {
    if (int b = bin_of(s1[r]); b >= 0) ++c1[b];
    if (int b = bin_of(s2[r]); b >= 0) ++c2[b];
  }
  result.max_excess = -INFINITY;
  for (int b = 0; b < th.ratio_bins; ++b) {
    if (c1[b] < th.ratio_min_hits || c2[b] < th.ratio_min_hits) continue;
    ++result.bins_used;
    const double a = static_cast<double>(c1[b]);
    const double d = static_cast<double>(c2[b]);
    const double log_ratio = std::abs(std::log(a / d));
    const double slack =
        std::log1p(th.ratio_slack_stds * std::sqrt(1.0 / a + 1.0 / d));
    result.max_log_ratio = std::max(result.max_log_ratio, log_ratio);
    if (log_ratio - slack > result.max_excess) {
      result.max_excess = log_ratio - slack;
      result.slack_at_max = slack;
    }
  }
  if (result.bins_used == 0) {
    return MakeError(ErrorKind::kInsufficientMass, "no bin has ",
                     th.ratio_min_hits, " hits in both samples");
  }
  result.passed = result.max_excess <= result.epsilon;
  return result;
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_AUDIT_H_
