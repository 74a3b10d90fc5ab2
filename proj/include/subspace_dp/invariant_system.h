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

// Linear-equality invariants C y = C A(x) and the orthogonal split of the
// output space into the null space N = {v : C v = 0} (where privacy noise
// lives) and the row space R of C (which is released exactly).

#ifndef SUBSPACE_DP_INVARIANT_SYSTEM_H_
#define SUBSPACE_DP_INVARIANT_SYSTEM_H_

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "Eigen/SVD"
#include "subspace_dp/digest.h"
#include "subspace_dp/status.h"

namespace subspace_dp {

inline constexpr double kDefaultRankTolerance = 1e-10;

// Immutable after construction; safe for concurrent reads.
//
// Only the bases are stored. The n x n projectors are materialized on request
// because at n ~ 10^4 each one costs close to a gigabyte.
class InvariantSystem {
 public:
  // Raw user-supplied constraint rows, possibly redundant.
  const Eigen::MatrixXd& c_matrix() const { return c_matrix_; }
  // Independent subset of the rows of c_matrix() with the same row space.
  const Eigen::MatrixXd& reduced_c() const { return reduced_c_; }
  // Orthonormal basis of N, n x (n - rank).
  const Eigen::MatrixXd& q_null() const { return q_null_; }
  // Orthonormal basis of R, n x rank (right singular vectors of C).
  const Eigen::MatrixXd& q_row() const { return q_row_; }

  int n() const { return static_cast<int>(c_matrix_.cols()); }
  int rank() const { return rank_; }
  int null_dim() const { return n() - rank_; }
  double rank_tolerance() const { return rank_tolerance_; }
  // Number of raw rows dropped as linearly dependent on the others.
  int redundant_rows() const {
    return static_cast<int>(c_matrix_.rows()) - rank_;
  }
  const std::vector<int>& reduced_row_indices() const {
    return reduced_row_indices_;
  }

  // Pi_N = Q_N Q_N^T.
  Eigen::MatrixXd proj_null() const {
    return q_null_ * q_null_.transpose();
  }
  // Pi_R, defined by subtraction so that proj_null() + proj_row() == I.
  Eigen::MatrixXd proj_row() const {
    return Eigen::MatrixXd::Identity(n(), n()) - proj_null();
  }
  // diag(Pi_N) from the row norms of Q_N, without forming Pi_N.
  Eigen::VectorXd proj_null_diagonal() const {
    return q_null_.rowwise().squaredNorm();
  }

  // Pi_N v. Uses whichever basis is thinner.
  Eigen::VectorXd ProjectNull(const Eigen::VectorXd& v) const {
    if (q_null_.cols() <= q_row_.cols()) {
      return q_null_ * (q_null_.transpose() * v);
    }
    return v - q_row_ * (q_row_.transpose() * v);
  }

  Eigen::VectorXd ProjectRow(const Eigen::VectorXd& v) const {
    return v - ProjectNull(v);
  }

  // Scale of C used by tolerance checks: max |C_ij|.
  double c_scale() const {
    return c_matrix_.size() == 0 ? 0.0 : c_matrix_.cwiseAbs().maxCoeff();
  }

  // Fingerprint of (n, raw C). Two systems built from the same rows share it.
  std::uint64_t digest() const {
    Fnv1aHasher hasher;
    hasher.UpdateU64(static_cast<std::uint64_t>(c_matrix_.rows()));
    hasher.UpdateU64(static_cast<std::uint64_t>(c_matrix_.cols()));
    for (Eigen::Index i = 0; i < c_matrix_.rows(); ++i) {
      for (Eigen::Index j = 0; j < c_matrix_.cols(); ++j) {
        hasher.UpdateDouble(c_matrix_(i, j));
      }
    }
    return hasher.digest();
  }
  std::string digest_hex() const { return DigestToHex(digest()); }

 private:
  friend absl::StatusOr<InvariantSystem> BuildInvariantSystem(
      const Eigen::MatrixXd& c_matrix, double rank_tolerance);

  InvariantSystem() = default;

  Eigen::MatrixXd c_matrix_;
  Eigen::MatrixXd reduced_c_;
  Eigen::MatrixXd q_null_;
  Eigen::MatrixXd q_row_;
  std::vector<int> reduced_row_indices_;
  int rank_ = 0;
  double rank_tolerance_ = kDefaultRankTolerance;
};

// Builds the null/row space structure of C. The rank is the number of
// singular values above rank_tolerance * sigma_max. Redundant rows are
// accepted; redundant_rows() reports how many were dropped.
inline absl::StatusOr<InvariantSystem> BuildInvariantSystem(
    const Eigen::MatrixXd& c_matrix,
    double rank_tolerance = kDefaultRankTolerance) {
  const Eigen::Index n = c_matrix.cols();
  if (n < 1) {
    return MakeError(ErrorKind::kDimensionMismatch,
                     "constraint matrix must have at least one column");
  }
  if (c_matrix.rows() < 1) {
    return MakeError(ErrorKind::kTrivialConstraint,
                     "constraint matrix has no rows");
  }
  if (!c_matrix.allFinite()) {
    return MakeError(ErrorKind::kNonFiniteInput,
                     "constraint matrix contains NaN or Inf");
  }
  if (!(rank_tolerance > 0.0 && rank_tolerance < 1.0)) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "rank_tolerance must lie in (0, 1), got ", rank_tolerance);
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(c_matrix, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  if (sigma_max == 0.0) {
    return MakeError(ErrorKind::kTrivialConstraint,
                     "constraint matrix is identically zero");
  }
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > rank_tolerance * sigma_max) ++rank;
  }
  if (rank >= n) {
    return MakeError(ErrorKind::kFullRankConstraint, "constraint rank ", rank,
                     " equals n = ", n, "; no privacy-bearing subspace remains");
  }

  InvariantSystem sys;
  sys.c_matrix_ = c_matrix;
  sys.rank_ = rank;
  sys.rank_tolerance_ = rank_tolerance;
  sys.q_row_ = svd.matrixV().leftCols(rank);

  // Complete Q_R to an orthonormal basis of R^n; the trailing columns of the
  // Householder factor span the orthogonal complement N.
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(sys.q_row_);
  Eigen::MatrixXd complement = Eigen::MatrixXd::Zero(n, n - rank);
  complement.bottomRows(n - rank).setIdentity();
  qr.householderQ().applyThisOnTheLeft(complement);
  sys.q_null_ = std::move(complement);

  // Independent row subset via column-pivoted QR of C^T.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(c_matrix.transpose());
  const auto& perm = pivoted.colsPermutation().indices();
  std::vector<int> rows(perm.data(), perm.data() + rank);
  std::sort(rows.begin(), rows.end());
  sys.reduced_c_.resize(rank, n);
  for (int i = 0; i < rank; ++i) sys.reduced_c_.row(i) = c_matrix.row(rows[i]);
  sys.reduced_row_indices_ = std::move(rows);
  return sys;
}

// Pi_N v with a dimension check.
inline absl::StatusOr<Eigen::VectorXd> ProjectToNull(
    const InvariantSystem& sys, const Eigen::VectorXd& v) {
  if (v.size() != sys.n()) {
    return MakeError(ErrorKind::kDimensionMismatch, "vector has length ",
                     v.size(), ", invariant system expects ", sys.n());
  }
  return sys.ProjectNull(v);
}

// max |Pi_N - (I - C^T (C C^T)^{-1} C)| using the reduced rows. Cross-checks
// the SVD-based projector against the explicit Gram formula.
inline absl::StatusOr<double> VerifyConditioningIdentity(
    const InvariantSystem& sys) {
  const Eigen::MatrixXd& c = sys.reduced_c();
  const Eigen::MatrixXd gram = c * c.transpose();
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-14 * dmax) {
    return MakeError(ErrorKind::kSingularGram,
                     "C C^T is numerically singular; check rank_tolerance");
  }
  const Eigen::MatrixXd gram_projector =
      Eigen::MatrixXd::Identity(sys.n(), sys.n()) -
      c.transpose() * ldlt.solve(c);
  return (sys.proj_null() - gram_projector).cwiseAbs().maxCoeff();
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_INVARIANT_SYSTEM_H_
