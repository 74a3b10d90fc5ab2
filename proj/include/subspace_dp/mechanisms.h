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

// Additive mechanisms that release A(h) + noise with the noise confined to
// the null space N of the invariant matrix C, so that C y = C A(h) holds for
// every draw:
//
//   projected_gaussian   Pi_N e,   e ~ N(0, (c D2(A))^2)^n
//   extended_gaussian    Q_N e,    e ~ N(0, (c D2(Q_N^T A))^2)^(n - n_c)
//   projected_laplace    Pi_N e,   e ~ Lap(D1(A) / eps)^n
//   extended_laplace     Q_N e,    e ~ Lap(D1(Q_N^T A) / eps)^(n - n_c)
//   correlated_gaussian  Q_N z,    z the correlated Gaussian noise for Q_N^T A
//
// Noise never depends on the data, which is what makes distributed
// privatization with a shared seed possible.

#ifndef SUBSPACE_DP_MECHANISMS_H_
#define SUBSPACE_DP_MECHANISMS_H_

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "subspace_dp/correlated_gaussian.h"
#include "subspace_dp/invariant_system.h"
#include "subspace_dp/noise_source.h"
#include "subspace_dp/privacy_budget.h"
#include "subspace_dp/query_model.h"
#include "subspace_dp/status.h"

namespace subspace_dp {

enum class MechanismId {
  kProjectedGaussian,
  kExtendedGaussian,
  kProjectedLaplace,
  kExtendedLaplace,
  kCorrelatedGaussian,
  // Stack of releases from different mechanisms; not itself samplable.
  kComposed,
};

inline constexpr MechanismId kAdditiveMechanisms[] = {
    MechanismId::kProjectedGaussian, MechanismId::kExtendedGaussian,
    MechanismId::kProjectedLaplace, MechanismId::kExtendedLaplace,
    MechanismId::kCorrelatedGaussian};

inline constexpr const char* MechanismName(MechanismId id) {
  switch (id) {
    case MechanismId::kProjectedGaussian: return "projected_gaussian";
    case MechanismId::kExtendedGaussian: return "extended_gaussian";
    case MechanismId::kProjectedLaplace: return "projected_laplace";
    case MechanismId::kExtendedLaplace: return "extended_laplace";
    case MechanismId::kCorrelatedGaussian: return "correlated_gaussian";
    case MechanismId::kComposed: return "composed";
  }
  return "unknown";
}

// Accepts both "projected_gaussian" and "projected-gaussian".
inline std::optional<MechanismId> ParseMechanismId(std::string_view text) {
  std::string normalized(text);
  for (char& ch : normalized) {
    if (ch == '-') ch = '_';
  }
  for (MechanismId id : kAdditiveMechanisms) {
    if (normalized == MechanismName(id)) return id;
  }
  if (normalized == MechanismName(MechanismId::kComposed)) {
    return MechanismId::kComposed;
  }
  return std::nullopt;
}

inline bool IsGaussian(MechanismId id) {
  return id == MechanismId::kProjectedGaussian ||
         id == MechanismId::kExtendedGaussian ||
         id == MechanismId::kCorrelatedGaussian;
}

inline bool IsAdditive(MechanismId id) { return id != MechanismId::kComposed; }

// Release-time invariant tolerance: 1e-8 * (1 + max|C| * ||A(h)||_inf).
inline constexpr double kInvariantRelativeTolerance = 1e-8;

struct MechanismRelease {
  Eigen::VectorXd values;
  MechanismId mechanism_id = MechanismId::kProjectedGaussian;
  std::uint64_t seed = 0;
  PrivacyBudget budget = PrivacyBudget::Pure(1.0);
  std::string invariant_digest;
  std::optional<double> analytic_mse;
  // Public invariant values C A(h) and the system they refer to.
  std::shared_ptr<const InvariantSystem> invariant;
  Eigen::VectorXd invariant_targets;
  double invariant_tolerance = 0.0;
  double invariant_max_deviation = 0.0;
};

namespace internal {

// Sensitivity of Q_N^T A. Differences that lie in the row space cancel only
// up to rounding, so values at that level are reported as exactly zero.
inline double ProjectedSensitivity(const LinearQuery& original,
                                   const LinearQuery& projected,
                                   SensitivityNorm p) {
  const double value = LpSensitivity(projected, p);
  const double scale = original.a_matrix().cwiseAbs().maxCoeff();
  return value <= 1e-12 * scale * original.output_dim() ? 0.0 : value;
}

inline absl::StatusOr<MechanismRelease> FinalizeRelease(
    MechanismRelease release, double truth_scale) {
  const InvariantSystem& sys = *release.invariant;
  if (!release.values.allFinite()) {
    return MakeError(ErrorKind::kNonFiniteInput, "release is not finite");
  }
  release.invariant_tolerance =
      kInvariantRelativeTolerance * (1.0 + sys.c_scale() * truth_scale);
  release.invariant_max_deviation =
      (sys.c_matrix() * release.values - release.invariant_targets)
          .cwiseAbs()
          .maxCoeff();
  if (!(release.invariant_max_deviation <= release.invariant_tolerance)) {
    return MakeError(ErrorKind::kInvariantViolation, "max |C y - C A(h)| = ",
                     release.invariant_max_deviation, " exceeds ",
                     release.invariant_tolerance);
  }
  return release;
}

}  // namespace internal

// A planned mechanism: sensitivities, scales and bases are computed once;
// each release draws fresh noise from the supplied NoiseSource.
class AdditiveMechanism {
 public:
  static absl::StatusOr<AdditiveMechanism> Plan(
      MechanismId id, const LinearQuery& query,
      std::shared_ptr<const InvariantSystem> sys, const PrivacyBudget& budget,
      const CorrelatedOptions& options = {}) {
    if (!IsAdditive(id)) {
      return MakeError(ErrorKind::kNonAdditiveMechanism,
                       MechanismName(id), " cannot be sampled directly");
    }
    if (sys == nullptr) {
      return MakeError(ErrorKind::kInvalidArgument, "missing invariant system");
    }
    if (query.output_dim() != sys->n()) {
      return MakeError(ErrorKind::kDimensionMismatch, "query output dimension ",
                       query.output_dim(), " != invariant dimension ",
                       sys->n());
    }
    AdditiveMechanism m(id, query, std::move(sys), budget);
    SUBSPACE_DP_RETURN_IF_ERROR(m.Calibrate(options));
    return m;
  }

  MechanismId id() const { return id_; }
  const LinearQuery& query() const { return query_; }
  const InvariantSystem& invariants() const { return *sys_; }
  const std::shared_ptr<const InvariantSystem>& invariants_ptr() const {
    return sys_;
  }
  // Budget actually spent: Laplace mechanisms are pure, so delta is 0.
  const PrivacyBudget& budget() const { return budget_; }
  double sensitivity() const { return sensitivity_; }
  // sigma for the spherical Gaussian mechanisms, the Laplace scale b for the
  // Laplace ones, c_{eps,delta} for the correlated one.
  double noise_scale() const { return scale_; }
  double analytic_mse() const { return analytic_mse_; }
  const std::optional<CorrelatedGaussianPlan>& correlated_plan() const {
    return correlated_;
  }

  // Number of raw draws consumed per release.
  int raw_dim() const {
    return id_ == MechanismId::kProjectedGaussian ||
                   id_ == MechanismId::kProjectedLaplace
               ? sys_->n()
               : sys_->null_dim();
  }

  // Maps a raw draw (iid coordinates of length raw_dim(), already scaled for
  // the spherical mechanisms, standard normal for the correlated one) to the
  // released noise vector in N.
  Eigen::VectorXd ShapeRawNoise(const Eigen::VectorXd& raw) const {
    switch (id_) {
      case MechanismId::kProjectedGaussian:
      case MechanismId::kProjectedLaplace:
        return sys_->ProjectNull(raw);
      case MechanismId::kExtendedGaussian:
      case MechanismId::kExtendedLaplace:
        return sys_->q_null() * raw;
      case MechanismId::kCorrelatedGaussian:
        return sys_->q_null() * correlated_->ShapeStandardDraws(raw);
      case MechanismId::kComposed:
        break;
    }
    return Eigen::VectorXd::Zero(sys_->n());
  }

  // The noise vector e; a release is A(h) + e.
  Eigen::VectorXd SampleNoise(NoiseSource& noise) const {
    if (scale_ == 0.0) return Eigen::VectorXd::Zero(sys_->n());
    switch (id_) {
      case MechanismId::kProjectedGaussian:
      case MechanismId::kExtendedGaussian:
        return ShapeRawNoise(noise.GaussianVector(raw_dim(), scale_));
      case MechanismId::kProjectedLaplace:
      case MechanismId::kExtendedLaplace:
        return ShapeRawNoise(noise.LaplaceVector(raw_dim(), scale_));
      case MechanismId::kCorrelatedGaussian:
        return ShapeRawNoise(noise.GaussianVector(raw_dim(), 1.0));
      case MechanismId::kComposed:
        break;
    }
    return Eigen::VectorXd::Zero(sys_->n());
  }

  // Covariance of SampleNoise().
  Eigen::MatrixXd NoiseCovariance() const {
    if (id_ == MechanismId::kCorrelatedGaussian) {
      return sys_->q_null() * correlated_->NoiseCovariance() *
             sys_->q_null().transpose();
    }
    const double var = IsGaussian(id_) ? scale_ * scale_ : 2.0 * scale_ * scale_;
    return var * sys_->proj_null();
  }

  // Variance of d^T e, without forming the covariance matrix.
  double NoiseVarianceAlong(const Eigen::VectorXd& d) const {
    if (id_ == MechanismId::kCorrelatedGaussian) {
      const Eigen::VectorXd w = sys_->q_null().transpose() * d;
      const BaseDecomposition& dec = correlated_->decomposition();
      double total = 0.0;
      for (const DecompositionBlock& b : dec.blocks) {
        total += b.r * b.r * (b.u_block.transpose() * w).squaredNorm();
      }
      return dec.k * scale_ * scale_ * total;
    }
    const double var = IsGaussian(id_) ? scale_ * scale_ : 2.0 * scale_ * scale_;
    return var * sys_->ProjectNull(d).squaredNorm();
  }

  // Release for a caller-computed query answer (general, non-linear queries
  // whose sensitivity was declared on the LinearQuery).
  absl::StatusOr<MechanismRelease> ReleaseAnswer(const Eigen::VectorXd& truth,
                                                 NoiseSource& noise) const {
    if (truth.size() != sys_->n()) {
      return MakeError(ErrorKind::kDimensionMismatch, "answer has length ",
                       truth.size(), ", expected ", sys_->n());
    }
    MechanismRelease release;
    release.values = truth + SampleNoise(noise);
    release.mechanism_id = id_;
    release.seed = noise.seed();
    release.budget = budget_;
    release.invariant_digest = sys_->digest_hex();
    release.analytic_mse = analytic_mse_;
    release.invariant = sys_;
    release.invariant_targets = sys_->c_matrix() * truth;
    return internal::FinalizeRelease(
        std::move(release), truth.size() ? truth.cwiseAbs().maxCoeff() : 0.0);
  }

  absl::StatusOr<MechanismRelease> Release(const Histogram& h,
                                           NoiseSource& noise) const {
    SUBSPACE_DP_ASSIGN_OR_RETURN(Eigen::VectorXd truth, Evaluate(query_, h));
    return ReleaseAnswer(truth, noise);
  }

 private:
  AdditiveMechanism(MechanismId id, const LinearQuery& query,
                    std::shared_ptr<const InvariantSystem> sys,
                    const PrivacyBudget& budget)
      : id_(id), query_(query), sys_(std::move(sys)), budget_(budget) {}

  absl::Status Calibrate(const CorrelatedOptions& options) {
    const double free_dims = sys_->null_dim();
    switch (id_) {
      case MechanismId::kProjectedGaussian: {
        sensitivity_ = LpSensitivity(query_, SensitivityNorm::kL2);
        SUBSPACE_DP_ASSIGN_OR_RETURN(scale_,
                                     GaussianCalibration(budget_, sensitivity_));
        analytic_mse_ = free_dims * scale_ * scale_;
        break;
      }
      case MechanismId::kExtendedGaussian: {
        if (budget_.is_pure()) {
          return MakeError(ErrorKind::kDeltaZero,
                           "Gaussian mechanisms need delta > 0");
        }
        SUBSPACE_DP_ASSIGN_OR_RETURN(LinearQuery projected,
                                     ProjectedQuery(query_, *sys_));
        sensitivity_ = internal::ProjectedSensitivity(query_, projected,
                                                      SensitivityNorm::kL2);
        SUBSPACE_DP_ASSIGN_OR_RETURN(scale_,
                                     GaussianCalibration(budget_, sensitivity_));
        analytic_mse_ = free_dims * scale_ * scale_;
        break;
      }
      case MechanismId::kProjectedLaplace: {
        sensitivity_ = LpSensitivity(query_, SensitivityNorm::kL1);
        scale_ = sensitivity_ / budget_.epsilon();
        analytic_mse_ = 2.0 * scale_ * scale_ * free_dims;
        budget_ = PrivacyBudget::Pure(budget_.epsilon());
        break;
      }
      case MechanismId::kExtendedLaplace: {
        SUBSPACE_DP_ASSIGN_OR_RETURN(LinearQuery projected,
                                     ProjectedQuery(query_, *sys_));
        sensitivity_ = internal::ProjectedSensitivity(query_, projected,
                                                      SensitivityNorm::kL1);
        scale_ = sensitivity_ / budget_.epsilon();
        analytic_mse_ = 2.0 * scale_ * scale_ * free_dims;
        budget_ = PrivacyBudget::Pure(budget_.epsilon());
        break;
      }
      case MechanismId::kCorrelatedGaussian: {
        if (budget_.is_pure()) {
          return MakeError(ErrorKind::kDeltaZero,
                           "Gaussian mechanisms need delta > 0");
        }
        SUBSPACE_DP_ASSIGN_OR_RETURN(LinearQuery projected,
                                     ProjectedQuery(query_, *sys_));
        Eigen::FullPivLU<Eigen::MatrixXd> lu(projected.a_matrix());
        lu.setThreshold(1e-10);
        if (lu.rank() < sys_->null_dim()) {
          return MakeError(ErrorKind::kProjectedRankDeficient,
                           "Q_N^T A has rank ", lu.rank(), " < n - n_c = ",
                           sys_->null_dim(),
                           "; the invariants absorb query directions");
        }
        SUBSPACE_DP_ASSIGN_OR_RETURN(
            CorrelatedGaussianPlan plan,
            CorrelatedGaussianPlan::Create(projected.a_matrix(), budget_,
                                           options));
        scale_ = plan.c_eps_delta();
        analytic_mse_ = plan.analytic_mse();
        sensitivity_ = plan.decomposition().blocks.front().r;
        correlated_ = std::move(plan);
        break;
      }
      case MechanismId::kComposed:
        return MakeError(ErrorKind::kNonAdditiveMechanism, "composed");
    }
    return absl::OkStatus();
  }

  MechanismId id_;
  LinearQuery query_;
  std::shared_ptr<const InvariantSystem> sys_;
  PrivacyBudget budget_;
  double sensitivity_ = 0.0;
  double scale_ = 0.0;
  double analytic_mse_ = 0.0;
  std::optional<CorrelatedGaussianPlan> correlated_;
};

// One-shot entry points.

inline absl::StatusOr<MechanismRelease> RunMechanism(
    MechanismId id, const LinearQuery& query, const Histogram& h,
    std::shared_ptr<const InvariantSystem> sys, const PrivacyBudget& budget,
    NoiseSource& noise) {
  SUBSPACE_DP_ASSIGN_OR_RETURN(
      AdditiveMechanism mechanism,
      AdditiveMechanism::Plan(id, query, std::move(sys), budget));
  return mechanism.Release(h, noise);
}

inline absl::StatusOr<MechanismRelease> ProjectedGaussian(
    const LinearQuery& query, const Histogram& h,
    std::shared_ptr<const InvariantSystem> sys, const PrivacyBudget& budget,
    NoiseSource& noise) {
  return RunMechanism(MechanismId::kProjectedGaussian, query, h,
                      std::move(sys), budget, noise);
}

inline absl::StatusOr<MechanismRelease> ExtendedGaussian(
    const LinearQuery& query, const Histogram& h,
    std::shared_ptr<const InvariantSystem> sys, const PrivacyBudget& budget,
    NoiseSource& noise) {
  return RunMechanism(MechanismId::kExtendedGaussian, query, h, std::move(sys),
                      budget, noise);
}

inline absl::StatusOr<MechanismRelease> ProjectedLaplace(
    const LinearQuery& query, const Histogram& h,
    std::shared_ptr<const InvariantSystem> sys, const PrivacyBudget& budget,
    NoiseSource& noise) {
  return RunMechanism(MechanismId::kProjectedLaplace, query, h, std::move(sys),
                      budget, noise);
}

inline absl::StatusOr<MechanismRelease> ExtendedLaplace(
    const LinearQuery& query, const Histogram& h,
    std::shared_ptr<const InvariantSystem> sys, const PrivacyBudget& budget,
    NoiseSource& noise) {
  return RunMechanism(MechanismId::kExtendedLaplace, query, h, std::move(sys),
                      budget, noise);
}

// Q_N z + Pi_R A h, with z the correlated release for Q_N^T A. Computed in
// the algebraically identical form A h + Q_N (z - Q_N^T A h) so that the
// noise is a data-free vector added to the exact answer.
inline absl::StatusOr<MechanismRelease> SubspaceCorrelatedGaussian(
    const LinearQuery& query, const Histogram& h,
    std::shared_ptr<const InvariantSystem> sys, const PrivacyBudget& budget,
    NoiseSource& noise) {
  return RunMechanism(MechanismId::kCorrelatedGaussian, query, h,
                      std::move(sys), budget, noise);
}

// Stacks releases over queries A_i with invariants C_i into one release of
// the stacked query under the block-diagonal invariant. Only pure releases
// compose here; the budget is the sum of the epsilons.
inline absl::StatusOr<MechanismRelease> Compose(
    std::span<const MechanismRelease> releases) {
  if (releases.empty()) {
    return MakeError(ErrorKind::kInvalidArgument, "nothing to compose");
  }
  Eigen::Index total_n = 0, total_rows = 0, total_targets = 0;
  double epsilon = 0.0;
  for (const MechanismRelease& r : releases) {
    if (!r.budget.is_pure()) {
      return MakeError(ErrorKind::kMixedDelta,
                       "composition is only supported for delta = 0 releases");
    }
    if (r.invariant == nullptr || r.values.size() != r.invariant->n() ||
        r.invariant_targets.size() != r.invariant->c_matrix().rows()) {
      return MakeError(ErrorKind::kDimensionMismatch,
                       "release is missing consistent invariant metadata");
    }
    total_n += r.values.size();
    total_rows += r.invariant->c_matrix().rows();
    total_targets += r.invariant_targets.size();
    epsilon += r.budget.epsilon();
  }
  if (releases.size() == 1) return releases.front();

  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(total_rows, total_n);
  MechanismRelease out;
  out.values.resize(total_n);
  out.invariant_targets.resize(total_targets);
  Eigen::Index row = 0, col = 0;
  double mse = 0.0;
  bool has_mse = true;
  out.mechanism_id = releases.front().mechanism_id;
  double tolerance = 0.0;
  for (const MechanismRelease& r : releases) {
    const Eigen::MatrixXd& ci = r.invariant->c_matrix();
    c.block(row, col, ci.rows(), ci.cols()) = ci;
    out.values.segment(col, r.values.size()) = r.values;
    out.invariant_targets.segment(row, ci.rows()) = r.invariant_targets;
    row += ci.rows();
    col += ci.cols();
    if (r.mechanism_id != out.mechanism_id) {
      out.mechanism_id = MechanismId::kComposed;
    }
    if (r.analytic_mse.has_value()) {
      mse += *r.analytic_mse;
    } else {
      has_mse = false;
    }
    tolerance = std::max(tolerance, r.invariant_tolerance);
  }
  SUBSPACE_DP_ASSIGN_OR_RETURN(InvariantSystem stacked,
                               BuildInvariantSystem(c));
  out.invariant = std::make_shared<const InvariantSystem>(std::move(stacked));
  out.seed = releases.front().seed;
  out.budget = PrivacyBudget::Pure(epsilon);
  out.invariant_digest = out.invariant->digest_hex();
  if (has_mse) out.analytic_mse = mse;
  out.invariant_tolerance = tolerance;
  out.invariant_max_deviation =
      (c * out.values - out.invariant_targets).cwiseAbs().maxCoeff();
  if (!(out.invariant_max_deviation <= out.invariant_tolerance)) {
    return MakeError(ErrorKind::kInvariantViolation,
                     "stacked invariant deviates by ",
                     out.invariant_max_deviation);
  }
  return out;
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_MECHANISMS_H_
