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

#ifndef SUBSPACE_DP_BASE_DECOMPOSITION_H_
#define SUBSPACE_DP_BASE_DECOMPOSITION_H_

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "subspace_dp/mvee.h"
#include "subspace_dp/status.h"

namespace subspace_dp {

struct DecompositionBlock {
  // n x n_i, orthonormal columns.
  Eigen::MatrixXd u_block;
  // max_j ||U_i^T a_j||_2 over the columns of the decomposed matrix.
  double r = 0.0;
  int dim() const { return static_cast<int>(u_block.cols()); }
};

// Orthogonal split of R^n into blocks U_1, ..., U_b (b <= k) obtained by
// repeatedly peeling off the shorter half of the MVEE axes of the
// sensitivity polytope and recursing on the longer half.
struct BaseDecomposition {
  std::vector<DecompositionBlock> blocks;
  // ceil(1 + log2 n); the noise scale factor is sqrt(k).
  int k = 1;
  int n = 0;
  bool mvee_converged = true;

  // Stacks all blocks into one n x n matrix.
  Eigen::MatrixXd StackedBasis() const {
    Eigen::MatrixXd out(n, n);
    Eigen::Index col = 0;
    for (const DecompositionBlock& b : blocks) {
      out.middleCols(col, b.dim()) = b.u_block;
      col += b.dim();
    }
    return out;
  }
};

// ceil(1 + log2 n), computed exactly on integers.
inline int DecompositionDepth(int n) {
  int depth = 1;
  int power = 1;
  while (power < n) {
    power *= 2;
    ++depth;
  }
  return depth;
}

namespace internal {

// Bases of the blocks, expressed in the coordinates of `local` (m x d).
inline absl::StatusOr<std::vector<Eigen::MatrixXd>> DecomposeLocal(
    const Eigen::MatrixXd& local, double tolerance, std::int64_t max_iters,
    bool& converged) {
  const Eigen::Index m = local.rows();
  if (m == 1) {
    // Single direction left; covers the d = 1 case, where full row rank
    // forces m = 1.
    return std::vector<Eigen::MatrixXd>{Eigen::MatrixXd::Ones(1, 1)};
  }
  auto factor = MinimumVolumeSymmetricEllipsoid(local, tolerance, max_iters);
  if (!factor.ok()) {
    if (ErrorKindOf(factor.status()) == ErrorKind::kRankDeficientPoints) {
      return MakeError(ErrorKind::kRankDeficient,
                       "query matrix is not of full row rank: ",
                       factor.status().message());
    }
    return factor.status();
  }
  converged = converged && factor->converged;
  // Axes are sorted by decreasing semi-axis length. The shorter ceil(m/2)
  // axes form this level's block; the longer floor(m/2) are recursed on.
  const Eigen::Index top = m / 2;
  const Eigen::MatrixXd v = factor->axes.leftCols(top);
  std::vector<Eigen::MatrixXd> blocks;
  blocks.push_back(factor->axes.rightCols(m - top));
  SUBSPACE_DP_ASSIGN_OR_RETURN(
      std::vector<Eigen::MatrixXd> sub,
      DecomposeLocal(v.transpose() * local, tolerance, max_iters, converged));
  for (Eigen::MatrixXd& s : sub) blocks.push_back(v * s);
  return blocks;
}

}  // namespace internal

// `a_matrix` is n x d with full row rank n.
inline absl::StatusOr<BaseDecomposition> ComputeBaseDecomposition(
    const Eigen::MatrixXd& a_matrix,
    double mvee_tolerance = kDefaultMveeTolerance,
    std::int64_t mvee_max_iters = 0) {
  const Eigen::Index n = a_matrix.rows();
  if (n < 1 || a_matrix.cols() < 1) {
    return MakeError(ErrorKind::kInvalidArgument, "empty query matrix");
  }
  if (a_matrix.cols() < n) {
    return MakeError(ErrorKind::kRankDeficient, "a ", n, " x ",
                     a_matrix.cols(), " matrix cannot have full row rank");
  }
  if (n == 1 && a_matrix.cwiseAbs().maxCoeff() == 0.0) {
    return MakeError(ErrorKind::kRankDeficient, "query matrix is zero");
  }
  BaseDecomposition out;
  out.n = static_cast<int>(n);
  out.k = DecompositionDepth(out.n);
  SUBSPACE_DP_ASSIGN_OR_RETURN(
      std::vector<Eigen::MatrixXd> bases,
      internal::DecomposeLocal(a_matrix, mvee_tolerance, mvee_max_iters,
                               out.mvee_converged));
  for (Eigen::MatrixXd& basis : bases) {
    DecompositionBlock block;
    block.r = (basis.transpose() * a_matrix).colwise().norm().maxCoeff();
    block.u_block = std::move(basis);
    out.blocks.push_back(std::move(block));
  }
  return out;
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_BASE_DECOMPOSITION_H_
