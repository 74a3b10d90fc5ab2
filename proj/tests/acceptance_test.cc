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


// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails. Reference values come from the
// oracles in oracles.h or closed forms computed here, never from the code
// under test.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/strings/str_format.h"
#include "oracles.h"
#include "subspace_dp/audit.h"
#include "subspace_dp/correlated_gaussian.h"
#include "subspace_dp/distributed.h"
#include "subspace_dp/mechanisms.h"
#include "subspace_dp/mvee.h"
#include "subspace_dp/synthetic.h"

namespace subspace_dp {
namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

class Reporter {
 public:
  void Record(int id, const std::string& title, bool passed,
              const std::string& detail) {
    std::printf("%s criterion %d: %s | %s\n", passed ? "PASS" : "FAIL", id,
                title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!passed) ++failures_;
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
};

std::shared_ptr<const InvariantSystem> Share(InvariantSystem sys) {
  return std::make_shared<const InvariantSystem>(std::move(sys));
}

// Uniform integer in [lo, hi].
int Uniform(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

Eigen::VectorXd RandomCounts(std::mt19937_64& rng, int d, int max_count) {
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = Uniform(rng, 0, max_count);
  return v;
}

// c(eps, delta) = (1 + sqrt(1 + ln(1/delta))) / eps, written out again here.
double CalibrationConstant(double eps, double delta) {
  return (1.0 + std::sqrt(1.0 + std::log(1.0 / delta))) / eps;
}

// 1. Invariant exactness over random configurations.
void InvariantExactness(Reporter& rep) {
  const auto start = Clock::now();
  std::mt19937_64 rng(20260101);
  int violations = 0;
  int errors = 0;
  double worst_ratio = 0.0;
  std::map<MechanismId, int> per_mechanism;
  for (int t = 0; t < 200; ++t) {
    const MechanismId id = kAdditiveMechanisms[t % 5];
    const int n = Uniform(rng, 2, id == MechanismId::kCorrelatedGaussian ? 40 : 100);
    const int n_c = Uniform(rng, 1, std::min(20, n - 1));
    const int d = n + Uniform(rng, 0, 20);
    const Eigen::MatrixXd c = oracles::GaussianMatrix(n_c, n, rng());
    const Eigen::MatrixXd a = oracles::GaussianMatrix(n, d, rng());
    const Eigen::VectorXd x = RandomCounts(rng, d, 50);
    const double eps = std::uniform_real_distribution<double>(0.1, 2.0)(rng);
    const bool gaussian = IsGaussian(id);
    auto budget = PrivacyBudget::Create(eps, gaussian ? 1e-5 : 0.0);
    auto sys = BuildInvariantSystem(c);
    auto query = LinearQuery::Create(a);
    auto h = Histogram::Create(x);
    if (!budget.ok() || !sys.ok() || !query.ok() || !h.ok()) {
      ++errors;
      continue;
    }
    NoiseSource noise(rng(), 0);
    auto release = RunMechanism(id, *query, *h, Share(*std::move(sys)),
                                *budget, noise);
    if (!release.ok()) {
      ++errors;
      std::printf("  config %d (%s): %s\n", t, MechanismName(id),
                  std::string(release.status().message()).c_str());
      continue;
    }
    const Eigen::VectorXd truth = a * x;
    const double deviation =
        (c * (release->values - truth)).cwiseAbs().maxCoeff();
    const double c_norm = c.cwiseAbs().rowwise().sum().maxCoeff();
    const double scale =
        c_norm * std::max({1.0, truth.cwiseAbs().maxCoeff(),
                           release->values.cwiseAbs().maxCoeff()});
    worst_ratio = std::max(worst_ratio, deviation / scale);
    if (deviation > 1e-8 * scale) ++violations;
    ++per_mechanism[id];
  }
  const double secs = Seconds(start);
  rep.Record(1, "invariant exactness, 200 random configurations",
             violations == 0 && errors == 0 && secs < 30.0 &&
                 per_mechanism.size() == 5,
             absl::StrFormat("violations %d, errors %d, worst |C(y-Ah)|/scale "
                             "%.2e (limit 1e-8), %.1f s (limit 30 s)",
                             violations, errors, worst_ratio, secs));
}

// 2. Projected Gaussian MSE at n = 4, C = 1^T, eps = 1, delta = e^-3, D2 = 1.
void ProjectedGaussianMse(Reporter& rep) {
  const auto start = Clock::now();
  const int n = 4;
  const double delta = std::exp(-3.0);
  const double c = CalibrationConstant(1.0, delta);
  const double expected = (n - 1) * c * c * 1.0;  // 27
  auto sys = BuildInvariantSystem(Eigen::RowVectorXd::Ones(n));
  auto mech = AdditiveMechanism::Plan(
      MechanismId::kProjectedGaussian,
      LinearQuery::Identity(n).WithDeclaredSensitivity(SensitivityNorm::kL2, 1.0),
      Share(*std::move(sys)), *PrivacyBudget::Create(1.0, delta));
  if (!mech.ok()) {
    rep.Record(2, "projected Gaussian MSE", false,
               std::string(mech.status().message()));
    return;
  }
  const Eigen::Vector4d truth(10, 20, 30, 40);
  const int reps = 100000;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    NoiseSource noise(77, static_cast<std::uint64_t>(r));
    auto release = mech->ReleaseAnswer(truth, noise);
    total += (release->values - truth).squaredNorm();
  }
  const double empirical = total / reps;
  const double secs = Seconds(start);
  const bool ok = std::abs(expected - 27.0) < 1e-12 &&
                  std::abs(mech->analytic_mse() - expected) < 1e-9 &&
                  std::abs(empirical / expected - 1.0) <= 0.05 && secs < 10.0;
  rep.Record(2, "projected Gaussian error formula", ok,
             absl::StrFormat("analytic %.6f (closed form %.6f), empirical "
                             "%.4f over %d reps, ratio %.4f (+/-5%%), %.2f s",
                             mech->analytic_mse(), expected, empirical, reps,
                             empirical / expected, secs));
}

// 3. Extended Gaussian never has larger analytic MSE than projected.
void ExtensionDominance(Reporter& rep) {
  std::mt19937_64 rng(3003);
  int violations = 0;
  int errors = 0;
  int oracle_mismatch = 0;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = Uniform(rng, 2, 12);
    const int n_c = Uniform(rng, 1, n - 1);
    const int d = Uniform(rng, 2, 15);
    const Eigen::MatrixXd a = oracles::GaussianMatrix(n, d, rng());
    auto sys = BuildInvariantSystem(oracles::GaussianMatrix(n_c, n, rng()));
    auto query = LinearQuery::Create(a);
    if (!sys.ok() || !query.ok()) {
      ++errors;
      continue;
    }
    auto shared = Share(*std::move(sys));
    const PrivacyBudget budget = *PrivacyBudget::Create(0.5, 1e-6);
    auto projected = AdditiveMechanism::Plan(MechanismId::kProjectedGaussian,
                                             *query, shared, budget);
    auto extended = AdditiveMechanism::Plan(MechanismId::kExtendedGaussian,
                                            *query, shared, budget);
    if (!projected.ok() || !extended.ok()) {
      ++errors;
      continue;
    }
    const double p = projected->analytic_mse();
    const double e = extended->analytic_mse();
    worst = std::max(worst, e / p);
    if (e > p * (1.0 + 1e-12)) ++violations;
    // Sensitivities against brute force.
    const Eigen::MatrixXd qa = shared->q_null().transpose() * a;
    if (std::abs(projected->sensitivity() -
                 oracles::PairwiseSensitivity(a, 2)) > 1e-9 ||
        std::abs(extended->sensitivity() - oracles::PairwiseSensitivity(qa, 2)) >
            1e-9) {
      ++oracle_mismatch;
    }
  }
  rep.Record(3, "extension dominance over 100 random queries",
             violations == 0 && errors == 0 && oracle_mismatch == 0,
             absl::StrFormat("violations %d, errors %d, sensitivity/oracle "
                             "mismatches %d, max MSE(ext)/MSE(proj) %.4f",
                             violations, errors, oracle_mismatch, worst));
}

// 4. Unbiasedness on the synthetic census.
void Unbiasedness(Reporter& rep) {
  const CensusFixture census = SyntheticCensus(48);
  const PrivacyBudget budget = PrivacyBudget::Pure(0.192);
  auto plan_state = [&](int s) {
    const int m = census.counties_in(s);
    return AdditiveMechanism::Plan(
        MechanismId::kProjectedLaplace, LinearQuery::Identity(m),
        Share(*BuildInvariantSystem(Eigen::RowVectorXd::Ones(m))), budget);
  };
  // Largest state: 102 counties, 10^4 releases.
  auto mech = plan_state(0);
  const Eigen::VectorXd truth = census.StatePopulation(0);
  const int m = static_cast<int>(truth.size());
  const int reps = 10000;
  Eigen::MatrixXd errors(m, reps);
  for (int r = 0; r < reps; ++r) {
    NoiseSource noise(404, static_cast<std::uint64_t>(r));
    errors.col(r) = mech->ReleaseAnswer(truth, noise)->values - truth;
  }
  const Eigen::VectorXd mean = errors.rowwise().mean();
  int bad_counties = 0;
  double worst_z = 0.0;
  for (int i = 0; i < m; ++i) {
    const double sd = std::sqrt(
        (errors.row(i).array() - mean(i)).square().sum() / (reps - 1));
    worst_z = std::max(worst_z, std::abs(mean(i)) / (sd / 100.0));
    if (std::abs(mean(i)) >= 5.0 * sd / 100.0) ++bad_counties;
  }
  auto fit = BiasRegression(truth, errors, 0.01);

  // Batch of 48 per-state regressions, 10 releases each.
  std::vector<RegressionFit> fits;
  for (int s = 0; s < census.num_states(); ++s) {
    auto state_mech = plan_state(s);
    const Eigen::VectorXd t = census.StatePopulation(s);
    Eigen::MatrixXd e(t.size(), 10);
    for (int r = 0; r < 10; ++r) {
      NoiseSource noise(505, static_cast<std::uint64_t>(s) * 10 + r);
      e.col(r) = state_mech->ReleaseAnswer(t, noise)->values - t;
    }
    auto f = BiasRegression(t, e, 0.01);
    if (f.ok()) fits.push_back(*f);
  }
  const BiasBatchSummary batch = SummarizeBiasBatch(fits, 0.01);
  const bool ok = m == 102 && bad_counties == 0 && fit.ok() &&
                  fit->ci_contains_zero() && fits.size() == 48 &&
                  batch.binomial_p_value > 0.01;
  rep.Record(
      4, "unbiasedness on synthetic census", ok,
      absl::StrFormat(
          "%d counties, counties failing |mean| < 5 std/100: %d (max z %.2f); "
          "slope CI [%.3g, %.3g]; batch: %d/%d significant negative slopes, "
          "binomial p %.3f (nominal rate %.3f)",
          m, bad_counties, worst_z, fit.ok() ? fit->ci_low : NAN,
          fit.ok() ? fit->ci_high : NAN, batch.significant_negative,
          batch.regressions, batch.binomial_p_value, batch.nominal_rate));
}

// 5. Release covariance equals Pi_N for sigma = 1.
void ConditioningEquivalence(Reporter& rep) {
  const int n = 4;
  const Eigen::MatrixXd c = Eigen::RowVectorXd::Ones(n);
  const Eigen::MatrixXd gram = oracles::GramProjector(c);
  auto sys = BuildInvariantSystem(c);
  const double projector_gap = (sys->proj_null() - gram).cwiseAbs().maxCoeff();
  // c(3, e^-3) = 1, so sigma = D2 = 1.
  auto mech = AdditiveMechanism::Plan(
      MechanismId::kProjectedGaussian,
      LinearQuery::Identity(n).WithDeclaredSensitivity(SensitivityNorm::kL2, 1.0),
      Share(*std::move(sys)), *PrivacyBudget::Create(3.0, std::exp(-3.0)));
  const Eigen::Vector4d truth(5, 0, 2, 9);
  const int reps = 100000;
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd first = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < reps; ++r) {
    NoiseSource noise(555, static_cast<std::uint64_t>(r));
    const Eigen::VectorXd e = mech->ReleaseAnswer(truth, noise)->values - truth;
    first += e;
    second += e * e.transpose();
  }
  first /= reps;
  const Eigen::MatrixXd cov =
      (second - reps * first * first.transpose()) / (reps - 1);
  const double cov_gap = (cov - gram).cwiseAbs().maxCoeff();
  rep.Record(5, "conditioning equivalence",
             std::abs(mech->noise_scale() - 1.0) < 1e-12 && cov_gap <= 0.02 &&
                 projector_gap <= 1e-12,
             absl::StrFormat("sigma %.6f; max |cov - Pi_N| %.4f (limit 0.02) "
                             "over %d reps; max |Pi_N - (I - C^T(CC^T)^-1 C)| "
                             "%.2e (limit 1e-12)",
                             mech->noise_scale(), cov_gap, reps, projector_gap));
}

// 6. Campus table: rank, analytic and empirical elementwise std.
void CampusReproduction(Reporter& rep) {
  const auto start = Clock::now();
  const CampusFixture campus = SyntheticCampus(6);
  auto rows = MarginalConstraintRows(campus.shape, campus.specs);
  auto sys = BuildInvariantSystem(*rows);
  if (!sys.ok()) {
    rep.Record(6, "campus-scale reproduction", false,
               std::string(sys.status().message()));
    return;
  }
  const int n = sys->n();
  // Oracle: diag Pi_N = 1 - row norms of an orthonormal row-space basis from
  // column-pivoted QR of C^T.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(rows->transpose());
  const int oracle_rank = static_cast<int>(qr.rank());
  const Eigen::MatrixXd q_row =
      Eigen::MatrixXd(qr.householderQ()).leftCols(oracle_rank);
  const Eigen::VectorXd oracle_diag =
      Eigen::VectorXd::Ones(n) - q_row.rowwise().squaredNorm();
  const double diag_gap =
      (sys->proj_null_diagonal() - oracle_diag).cwiseAbs().maxCoeff();
  auto median = [](Eigen::VectorXd v) {
    std::sort(v.data(), v.data() + v.size());
    const Eigen::Index k = v.size() / 2;
    return v.size() % 2 ? v(k) : 0.5 * (v(k - 1) + v(k));
  };
  const double analytic = median(oracle_diag.cwiseSqrt());

  auto mech = AdditiveMechanism::Plan(
      MechanismId::kProjectedGaussian,
      LinearQuery::Identity(n).WithDeclaredSensitivity(SensitivityNorm::kL2, 1.0),
      Share(*std::move(sys)), *PrivacyBudget::Create(3.0, std::exp(-3.0)));
  const int runs = 50;
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n);
  for (int r = 0; r < runs; ++r) {
    NoiseSource noise(606, static_cast<std::uint64_t>(r));
    sum_sq += (mech->ReleaseAnswer(campus.counts, noise)->values -
               campus.counts).cwiseAbs2();
  }
  const double empirical = median((sum_sq / runs).cwiseSqrt());
  const double secs = Seconds(start);
  const bool rank_ok = mech->invariants().rank() == 740 && oracle_rank == 740;
  const bool range_ok = analytic >= 0.85 && analytic <= 0.92;
  const bool empirical_ok = std::abs(empirical - analytic) <= 0.02;
  rep.Record(
      6, "campus-scale reproduction",
      rank_ok && range_ok && empirical_ok && diag_gap < 1e-10 && secs < 300,
      absl::StrFormat(
          "rank %d (oracle %d, want 740) %s; analytic median sqrt(diag Pi_N) "
          "%.4f, required in [0.85, 0.92] %s; empirical median std %.4f over "
          "%d runs, |diff| %.4f (limit 0.02) %s; diag vs oracle %.1e; %.0f s",
          mech->invariants().rank(), oracle_rank, rank_ok ? "ok" : "BAD",
          analytic, range_ok ? "ok" : "OUT OF RANGE", empirical, runs,
          std::abs(empirical - analytic), empirical_ok ? "ok" : "BAD",
          diag_gap, secs));
}

// 7. MVEE on known shapes and John conditions on random point sets.
void MveeCorrectness(Reporter& rep) {
  double cross_gap = 0.0;
  for (int n : {2, 3, 5, 8}) {
    auto e = MinimumVolumeSymmetricEllipsoid(Eigen::MatrixXd::Identity(n, n));
    cross_gap = std::max(
        cross_gap,
        e.ok() ? (e->f_matrix - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff()
               : INFINITY);
  }
  Eigen::MatrixXd pts(2, 2);
  pts << 2, 0, 0, 1;
  auto diag = MinimumVolumeSymmetricEllipsoid(pts);
  Eigen::Matrix2d want;
  want << 2, 0, 0, 1;
  const double diag_gap =
      diag.ok() ? (diag->f_matrix - want).cwiseAbs().maxCoeff() : INFINITY;
  double worst_john = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + t % 6;
    const int m = n + 1 + (7 * t) % 15;
    auto e = MinimumVolumeSymmetricEllipsoid(
        oracles::GaussianMatrix(n, m, 7000 + t));
    worst_john = std::max(
        worst_john,
        e.ok() ? oracles::CheckJohnConditions(e->f_matrix, e->points, e->weights)
                     .worst()
               : INFINITY);
  }
  rep.Record(7, "MVEE correctness",
             cross_gap <= 1e-4 && diag_gap <= 1e-4 && worst_john < 1e-5,
             absl::StrFormat("cross-polytope |F - I| %.2e, diag(2,1) |F - D| "
                             "%.2e (limits 1e-4); worst John residual %.2e "
                             "over 20 instances (limit 1e-5)",
                             cross_gap, diag_gap, worst_john));
}

// 8. Correlated mechanism MSE against Monte Carlo, plus block structure.
void CorrelatedMse(Reporter& rep) {
  bool ok = true;
  std::string detail;
  for (int n : {2, 4, 8}) {
    const Eigen::MatrixXd a = oracles::GaussianMatrix(n, 2 * n + 1, 800 + n);
    const PrivacyBudget budget = *PrivacyBudget::Create(1.0, 1e-5);
    auto plan = CorrelatedGaussianPlan::Create(a, budget);
    if (!plan.ok()) {
      ok = false;
      detail += absl::StrFormat("n=%d: %s; ", n,
                                std::string(plan.status().message()));
      continue;
    }
    const BaseDecomposition& dec = plan->decomposition();
    const int k = static_cast<int>(std::ceil(1.0 + std::log2(n)));
    const double c = CalibrationConstant(1.0, 1e-5);
    // r_i and the formula recomputed from the blocks.
    double sum = 0.0;
    double r_gap = 0.0;
    for (const DecompositionBlock& b : dec.blocks) {
      const double r =
          (b.u_block.transpose() * a).colwise().norm().maxCoeff();
      r_gap = std::max(r_gap, std::abs(r - b.r));
      sum += r * r * b.u_block.cols();
    }
    const double formula = k * c * c * sum;
    const Eigen::MatrixXd basis = dec.StackedBasis();
    const double ortho =
        (basis.transpose() * basis - Eigen::MatrixXd::Identity(n, n))
            .cwiseAbs()
            .maxCoeff();
    const int reps = 100000;
    double total = 0.0;
    for (int r = 0; r < reps; ++r) {
      NoiseSource noise(888, static_cast<std::uint64_t>(r));
      total += plan->SampleNoise(noise).squaredNorm();
    }
    const double empirical = total / reps;
    const bool this_ok = dec.k == k &&
                         std::abs(plan->analytic_mse() / formula - 1) < 1e-9 &&
                         std::abs(empirical / formula - 1) <= 0.05 &&
                         ortho < 1e-8 && r_gap < 1e-9 &&
                         static_cast<int>(dec.blocks.size()) <= k;
    ok = ok && this_ok;
    detail += absl::StrFormat(
        "n=%d: k %d, %d blocks, formula %.5g, MC %.5g (ratio %.4f), "
        "|U^T U - I| %.1e; ",
        n, dec.k, static_cast<int>(dec.blocks.size()), formula, empirical,
        empirical / formula, ortho);
  }
  rep.Record(8, "correlated mechanism MSE formula", ok, detail);
}

// 9. Distributed release is bit-identical to the centralized one; seed
// faults are caught by the aggregator.
void DistributedExactness(Reporter& rep) {
  std::mt19937_64 rng(909);
  auto random_setup = [&](MechanismId id, int* n_out) {
    const int n = Uniform(rng, 2, 40);
    const int n_c = Uniform(rng, 1, std::min(5, n - 1));
    *n_out = n;
    auto sys = BuildInvariantSystem(oracles::GaussianMatrix(n_c, n, rng()));
    const PrivacyBudget budget =
        *PrivacyBudget::Create(1.0, IsGaussian(id) ? 1e-5 : 0.0);
    return AdditiveMechanism::Plan(id, LinearQuery::Identity(n),
                                   Share(*std::move(sys)), budget);
  };
  auto random_partition = [&](int n) {
    const int m = Uniform(rng, 1, n);
    std::vector<int> cuts;
    for (int i = 1; i < n; ++i) cuts.push_back(i);
    std::shuffle(cuts.begin(), cuts.end(), rng);
    cuts.resize(m - 1);
    cuts.push_back(0);
    cuts.push_back(n);
    std::sort(cuts.begin(), cuts.end());
    std::vector<int> sizes;
    for (std::size_t i = 1; i < cuts.size(); ++i) sizes.push_back(cuts[i] - cuts[i - 1]);
    return *Partition::FromSizes(n, sizes);
  };
  int exact = 0, errors = 0, detected = 0, fault_trials = 0;
  for (int t = 0; t < 100; ++t) {
    const bool fault = t >= 50;
    const MechanismId id = kAdditiveMechanisms[t % 5];
    int n = 0;
    auto mech = random_setup(id, &n);
    if (!mech.ok()) {
      ++errors;
      continue;
    }
    const Partition partition = random_partition(n);
    const Eigen::VectorXd x = RandomCounts(rng, n, 100);
    const std::uint64_t seed = rng();
    std::map<std::uint64_t, std::uint64_t> overrides;
    if (fault) {
      overrides[Uniform(rng, 0, partition.num_agents() - 1)] = seed + 1 + rng() % 1000;
    }
    auto dist = RunDistributed(*mech, x, seed, partition, overrides);
    NoiseSource noise(seed, 0);
    auto central = mech->ReleaseAnswer(x, noise);
    if (!dist.ok() || !central.ok()) {
      ++errors;
      continue;
    }
    if (!fault) {
      if (std::memcmp(dist->values.data(), central->values.data(),
                      sizeof(double) * n) == 0) {
        ++exact;
      }
    } else {
      ++fault_trials;
      auto audit = VerifyAggregate(dist->reports, mech->invariants(), x, seed);
      if (audit.ok() && !audit->passed) ++detected;
    }
  }
  rep.Record(9, "distributed bit-exactness and fault detection",
             exact == 50 && detected == 50 && fault_trials == 50 && errors == 0,
             absl::StrFormat("bit-identical %d/50, seed faults detected %d/%d, "
                             "errors %d",
                             exact, detected, fault_trials, errors));
}

// 10. Binned privacy-loss probe for projected Laplace at eps = 1.
void RatioProbeCheck(Reporter& rep) {
  auto mech = AdditiveMechanism::Plan(
      MechanismId::kProjectedLaplace, LinearQuery::Identity(2),
      Share(*BuildInvariantSystem(Eigen::RowVectorXd::Ones(2))),
      PrivacyBudget::Pure(1.0));
  const Histogram h1 = *Histogram::Create(Eigen::Vector2d(3, 5));
  const Histogram h2 = *Histogram::Create(Eigen::Vector2d(4, 4));
  auto probe = RatioProbe(*mech, h1, h2, 200000, 1010);
  if (!probe.ok()) {
    rep.Record(10, "pure-DP ratio probe", false,
               std::string(probe.status().message()));
    return;
  }
  rep.Record(10, "pure-DP ratio probe", probe->passed,
             absl::StrFormat("max |log ratio| %.4f, max excess over 3-std "
                             "slack %.4f (must be <= eps = 1), %d/%d bins, "
                             "R = %d",
                             probe->max_log_ratio, probe->max_excess,
                             probe->bins_used, probe->bins, 200000));
}

}  // namespace
}  // namespace subspace_dp

int main() {
  subspace_dp::Reporter rep;
  subspace_dp::InvariantExactness(rep);
  subspace_dp::ProjectedGaussianMse(rep);
  subspace_dp::ExtensionDominance(rep);
  subspace_dp::Unbiasedness(rep);
  subspace_dp::ConditioningEquivalence(rep);
  subspace_dp::CampusReproduction(rep);
  subspace_dp::MveeCorrectness(rep);
  subspace_dp::CorrelatedMse(rep);
  subspace_dp::DistributedExactness(rep);
  subspace_dp::RatioProbeCheck(rep);
  std::printf("%d of 10 criteria failed\n", rep.failures());
  return rep.failures() == 0 ? 0 : 1;
}
