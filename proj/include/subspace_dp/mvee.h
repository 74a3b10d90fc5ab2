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

// Minimum-volume origin-centred ellipsoid enclosing a symmetric point set
// {+-p_j}. Since conv{+-a_j} = A B_1, this is the MVEE of the sensitivity
// polytope of a linear query.
//
// Solved by Khachiyan's multiplicative-weights scheme in the dual, with the
// Todd-Yildirim away steps that drop weight from interior support points.
// With weights u on the simplex and M(u) = sum_j u_j p_j p_j^T, the
// ellipsoid is {x : x^T (n M)^{-1} x <= 1}. Writing k_j = p_j^T M^{-1} p_j
// (so sum_j u_j k_j = n), the iterate is optimal when
//   max_j k_j <= n (1 + tol)                 (containment)
//   min_{j : u_j > 0} k_j >= n (1 - tol)     (support points on the boundary)

#ifndef SUBSPACE_DP_MVEE_H_
#define SUBSPACE_DP_MVEE_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "Eigen/Dense"
#include "subspace_dp/status.h"

namespace subspace_dp {

inline constexpr double kDefaultMveeTolerance = 1e-7;

// E = F B_2^n with F symmetric positive definite. `points` and `weights`
// are the deduplicated support set the dual certificate refers to.
struct EllipsoidFactor {
  Eigen::MatrixXd f_matrix;
  // Eigen-decomposition of F F^T, eigenvalues descending. The columns of
  // `axes` are the left singular vectors of F.
  Eigen::MatrixXd axes;
  Eigen::VectorXd squared_semi_axes;
  Eigen::MatrixXd points;
  Eigen::VectorXd weights;
  double tolerance_achieved = 0.0;
  std::int64_t iterations = 0;
  bool converged = false;
};

namespace internal {

// Drops zero columns and columns equal to +-(an earlier column); neither
// changes conv{+-p_j}.
inline Eigen::MatrixXd DeduplicateSymmetricPoints(const Eigen::MatrixXd& pts) {
  const double scale = pts.size() ? pts.cwiseAbs().maxCoeff() : 0.0;
  const double tol = 1e-12 * std::max(scale, 1e-300);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < pts.cols(); ++j) {
    if (pts.col(j).cwiseAbs().maxCoeff() <= tol) continue;
    bool duplicate = false;
    for (Eigen::Index k : keep) {
      if ((pts.col(j) - pts.col(k)).cwiseAbs().maxCoeff() <= tol ||
          (pts.col(j) + pts.col(k)).cwiseAbs().maxCoeff() <= tol) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) keep.push_back(j);
  }
  Eigen::MatrixXd out(pts.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) {
    out.col(static_cast<Eigen::Index>(i)) = pts.col(keep[i]);
  }
  return out;
}

}  // namespace internal

// Columns of `points` are the a_j; the symmetric set {+-a_j} is implied.
// max_iters <= 0 selects 100 * n * m. When the iteration budget runs out the
// best factor is returned with converged == false.
inline absl::StatusOr<EllipsoidFactor> MinimumVolumeSymmetricEllipsoid(
    const Eigen::MatrixXd& points, double tolerance = kDefaultMveeTolerance,
    std::int64_t max_iters = 0) {
  if (!(tolerance > 0.0)) {
    return MakeError(ErrorKind::kInvalidArgument, "tolerance must be > 0");
  }
  if (!points.allFinite()) {
    return MakeError(ErrorKind::kNonFiniteInput, "points contain NaN or Inf");
  }
  const Eigen::Index n = points.rows();
  if (n < 1) {
    return MakeError(ErrorKind::kRankDeficientPoints, "zero-dimensional points");
  }
  const Eigen::MatrixXd p = internal::DeduplicateSymmetricPoints(points);
  const Eigen::Index m = p.cols();
  if (m < n) {
    return MakeError(ErrorKind::kRankDeficientPoints, "only ", m,
                     " distinct directions in dimension ", n);
  }
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(p);
    qr.setThreshold(1e-10);
    if (qr.rank() < n) {
      return MakeError(ErrorKind::kRankDeficientPoints, "points span only ",
                       qr.rank(), " of ", n, " dimensions");
    }
  }
  if (max_iters <= 0) max_iters = 100 * n * m;

  if (n == 1) {
    // The interval [-max|p_j|, max|p_j|]; all weight on the extreme point.
    Eigen::Index far = 0;
    const double radius = p.row(0).cwiseAbs().maxCoeff(&far);
    EllipsoidFactor result;
    result.f_matrix = Eigen::MatrixXd::Constant(1, 1, radius);
    result.axes = Eigen::MatrixXd::Ones(1, 1);
    result.squared_semi_axes = Eigen::VectorXd::Constant(1, radius * radius);
    result.points = p;
    result.weights = Eigen::VectorXd::Zero(m);
    result.weights(far) = 1.0;
    result.converged = true;
    return result;
  }

  const double dn = static_cast<double>(n);
  Eigen::VectorXd u = Eigen::VectorXd::Constant(m, 1.0 / m);
  Eigen::MatrixXd m_inv;
  Eigen::VectorXd kappa;

  auto refresh = [&]() {
    const Eigen::MatrixXd moment = p * u.asDiagonal() * p.transpose();
    m_inv = moment.llt().solve(Eigen::MatrixXd::Identity(n, n));
    kappa = (p.transpose() * m_inv * p).diagonal();
  };
  refresh();

  std::int64_t iter = 0;
  double achieved = std::numeric_limits<double>::infinity();
  bool converged = false;
  constexpr int kRefreshEvery = 64;
  for (; iter < max_iters; ++iter) {
    Eigen::Index up = 0;
    kappa.maxCoeff(&up);
    Eigen::Index down = -1;
    double kappa_down = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      if (u(j) > 0.0 && kappa(j) < kappa_down) {
        kappa_down = kappa(j);
        down = j;
      }
    }
    const double gap_up = kappa(up) / dn - 1.0;
    const double gap_down = 1.0 - kappa_down / dn;
    achieved = std::max(gap_up, gap_down);
    if (achieved <= tolerance) {
      converged = true;
      break;
    }

    Eigen::Index j;
    double beta;
    if (gap_up >= gap_down) {
      j = up;
      beta = (kappa(j) - dn) / (dn * (kappa(j) - 1.0));
    } else {
      j = down;
      const double drop = -u(j) / (1.0 - u(j));
      beta = kappa(j) > 1.0
                 ? std::max((kappa(j) - dn) / (dn * (kappa(j) - 1.0)), drop)
                 : drop;
    }
    if (beta == 0.0 || !std::isfinite(beta)) break;

    // M' = (1 - beta) M + beta p_j p_j^T, inverse by Sherman-Morrison.
    const Eigen::VectorXd w = m_inv * p.col(j);
    const double kj = kappa(j);
    const double denom = 1.0 - beta + beta * kj;
    const Eigen::VectorXd g = p.transpose() * w;
    m_inv = (m_inv - (beta / denom) * w * w.transpose()) / (1.0 - beta);
    kappa = (kappa - (beta / denom) * g.cwiseAbs2()) / (1.0 - beta);
    u *= (1.0 - beta);
    u(j) += beta;
    if (u(j) < 1e-14) u(j) = 0.0;
    if ((iter + 1) % kRefreshEvery == 0) {
      u /= u.sum();
      refresh();
    }
  }
  u /= u.sum();
  refresh();
  const double kappa_max = kappa.maxCoeff();

  EllipsoidFactor result;
  // Scale so every point is inside even before convergence.
  const double inflate = std::max(1.0, kappa_max / dn);
  const Eigen::MatrixXd shape = dn * inflate * (p * u.asDiagonal() * p.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(shape);
  result.axes = eig.eigenvectors().rowwise().reverse();
  result.squared_semi_axes = eig.eigenvalues().reverse();
  result.f_matrix = result.axes *
                    result.squared_semi_axes.cwiseMax(0.0).cwiseSqrt().asDiagonal() *
                    result.axes.transpose();
  result.points = p;
  result.weights = u;
  result.iterations = iter;
  result.converged = converged;
  double kappa_down = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < m; ++j) {
    if (u(j) > 0.0) kappa_down = std::min(kappa_down, kappa(j));
  }
  result.tolerance_achieved =
      std::max(kappa_max / dn - 1.0, 1.0 - kappa_down / dn);
  return result;
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_MVEE_H_
