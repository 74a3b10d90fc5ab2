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

// Correlated Gaussian noise for linear queries (no invariants): noise
// sqrt(k) * sum_i r_i U_i w_i with w_i ~ N(0, c^2 I) over the blocks of the
// base decomposition of the query matrix.

#ifndef SUBSPACE_DP_CORRELATED_GAUSSIAN_H_
#define SUBSPACE_DP_CORRELATED_GAUSSIAN_H_

#include <cmath>
#include <cstdint>
#include <utility>

#include "Eigen/Dense"
#include "subspace_dp/base_decomposition.h"
#include "subspace_dp/noise_source.h"
#include "subspace_dp/privacy_budget.h"
#include "subspace_dp/query_model.h"
#include "subspace_dp/status.h"

namespace subspace_dp {

struct CorrelatedOptions {
  double mvee_tolerance = kDefaultMveeTolerance;
  std::int64_t mvee_max_iters = 0;
};

// Data-independent part of the correlated mechanism, reusable across
// releases of the same query.
class CorrelatedGaussianPlan {
 public:
  static absl::StatusOr<CorrelatedGaussianPlan> Create(
      const Eigen::MatrixXd& a_matrix, const PrivacyBudget& budget,
      const CorrelatedOptions& options = {}) {
    if (budget.is_pure()) {
      return MakeError(ErrorKind::kDeltaZero,
                       "correlated Gaussian noise needs delta > 0");
    }
    SUBSPACE_DP_ASSIGN_OR_RETURN(
        BaseDecomposition decomposition,
        ComputeBaseDecomposition(a_matrix, options.mvee_tolerance,
                                 options.mvee_max_iters));
    return CorrelatedGaussianPlan(std::move(decomposition),
                                  *budget.c_eps_delta());
  }

  const BaseDecomposition& decomposition() const { return decomposition_; }
  double c_eps_delta() const { return c_; }
  int dim() const { return decomposition_.n; }

  // k c^2 sum_i r_i^2 n_i; the blocks are orthogonal and the w_i independent.
  double analytic_mse() const {
    double total = 0.0;
    for (const DecompositionBlock& b : decomposition_.blocks) {
      total += b.r * b.r * b.dim();
    }
    return decomposition_.k * c_ * c_ * total;
  }

  // Maps the standard-normal draws (one per coordinate, blocks in order) to
  // the correlated noise vector.
  Eigen::VectorXd ShapeStandardDraws(const Eigen::VectorXd& draws) const {
    Eigen::VectorXd noise = Eigen::VectorXd::Zero(dim());
    Eigen::Index offset = 0;
    for (const DecompositionBlock& b : decomposition_.blocks) {
      noise += (b.r * c_) * (b.u_block * draws.segment(offset, b.dim()));
      offset += b.dim();
    }
    return std::sqrt(static_cast<double>(decomposition_.k)) * noise;
  }

  Eigen::VectorXd SampleNoise(NoiseSource& noise) const {
    return ShapeStandardDraws(noise.GaussianVector(dim(), 1.0));
  }

  // Covariance k c^2 sum_i r_i^2 U_i U_i^T.
  Eigen::MatrixXd NoiseCovariance() const {
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim(), dim());
    for (const DecompositionBlock& b : decomposition_.blocks) {
      cov += (b.r * b.r) * b.u_block * b.u_block.transpose();
    }
    return (decomposition_.k * c_ * c_) * cov;
  }

 private:
  CorrelatedGaussianPlan(BaseDecomposition decomposition, double c)
      : decomposition_(std::move(decomposition)), c_(c) {}

  BaseDecomposition decomposition_;
  double c_;
};

// Unconstrained release A h + sqrt(k) sum_i r_i U_i w_i.
inline absl::StatusOr<Eigen::VectorXd> CorrelatedGaussian(
    const LinearQuery& query, const Histogram& h, const PrivacyBudget& budget,
    NoiseSource& noise, const CorrelatedOptions& options = {}) {
  SUBSPACE_DP_ASSIGN_OR_RETURN(Eigen::VectorXd truth, Evaluate(query, h));
  SUBSPACE_DP_ASSIGN_OR_RETURN(
      CorrelatedGaussianPlan plan,
      CorrelatedGaussianPlan::Create(query.a_matrix(), budget, options));
  return Eigen::VectorXd(truth + plan.SampleNoise(noise));
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_CORRELATED_GAUSSIAN_H_
