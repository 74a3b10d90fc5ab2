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

// Databases as histograms over a finite universe, linear queries as matrices
// acting on them, and invariant matrices built from marginal totals of
// multiway count tables.

#ifndef SUBSPACE_DP_QUERY_MODEL_H_
#define SUBSPACE_DP_QUERY_MODEL_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "subspace_dp/invariant_system.h"
#include "subspace_dp/status.h"

namespace subspace_dp {

// Count vector over the data universe: counts(z) = #{i : x_i = z}.
class Histogram {
 public:
  static absl::StatusOr<Histogram> Create(Eigen::VectorXd counts,
                                          std::vector<std::string> labels = {}) {
    if (counts.size() < 1) {
      return MakeError(ErrorKind::kInvalidArgument,
                       "histogram needs at least one cell");
    }
    if (!counts.allFinite()) {
      return MakeError(ErrorKind::kNonFiniteInput,
                       "histogram counts must be finite");
    }
    if (counts.minCoeff() < 0.0) {
      return MakeError(ErrorKind::kInvalidArgument,
                       "histogram counts must be non-negative");
    }
    if (!labels.empty() &&
        labels.size() != static_cast<std::size_t>(counts.size())) {
      return MakeError(ErrorKind::kDimensionMismatch, "got ", labels.size(),
                       " labels for ", counts.size(), " cells");
    }
    return Histogram(std::move(counts), std::move(labels));
  }

  const Eigen::VectorXd& counts() const { return counts_; }
  const std::vector<std::string>& labels() const { return labels_; }
  int size() const { return static_cast<int>(counts_.size()); }
  double total() const { return counts_.sum(); }

 private:
  Histogram(Eigen::VectorXd counts, std::vector<std::string> labels)
      : counts_(std::move(counts)), labels_(std::move(labels)) {}

  Eigen::VectorXd counts_;
  std::vector<std::string> labels_;
};

enum class SensitivityNorm { kL1 = 1, kL2 = 2 };

// n x d query matrix; column z is the query's response to one record with
// value z. Sensitivities can be declared by the caller (for queries whose
// sensitivity is known in closed form, or for non-linear queries wrapped as a
// fixed output); otherwise they are computed by brute force.
class LinearQuery {
 public:
  static absl::StatusOr<LinearQuery> Create(Eigen::MatrixXd a_matrix,
                                            std::string name = "query") {
    if (a_matrix.rows() < 1 || a_matrix.cols() < 1) {
      return MakeError(ErrorKind::kInvalidArgument,
                       "query matrix must be at least 1 x 1");
    }
    if (!a_matrix.allFinite()) {
      return MakeError(ErrorKind::kNonFiniteInput,
                       "query matrix contains NaN or Inf");
    }
    return LinearQuery(std::move(a_matrix), std::move(name));
  }

  // Identity over d cells with its closed-form sensitivities.
  static LinearQuery Identity(int d, std::string name = "identity") {
    LinearQuery q(Eigen::MatrixXd::Identity(d, d), std::move(name));
    q.declared_l1_ = d > 1 ? 2.0 : 0.0;
    q.declared_l2_ = d > 1 ? std::sqrt(2.0) : 0.0;
    q.is_identity_ = true;
    return q;
  }

  // Replaces the computed sensitivity with a caller-supplied bound.
  LinearQuery WithDeclaredSensitivity(SensitivityNorm p, double value) const {
    LinearQuery copy = *this;
    (p == SensitivityNorm::kL1 ? copy.declared_l1_ : copy.declared_l2_) = value;
    return copy;
  }

  const Eigen::MatrixXd& a_matrix() const { return a_matrix_; }
  const std::string& name() const { return name_; }
  int output_dim() const { return static_cast<int>(a_matrix_.rows()); }
  int universe_size() const { return static_cast<int>(a_matrix_.cols()); }
  bool is_identity() const { return is_identity_; }
  std::optional<double> declared_sensitivity(SensitivityNorm p) const {
    return p == SensitivityNorm::kL1 ? declared_l1_ : declared_l2_;
  }

 private:
  LinearQuery(Eigen::MatrixXd a_matrix, std::string name)
      : a_matrix_(std::move(a_matrix)), name_(std::move(name)) {}

  Eigen::MatrixXd a_matrix_;
  std::string name_;
  std::optional<double> declared_l1_;
  std::optional<double> declared_l2_;
  bool is_identity_ = false;
};

// A(h) = A * h, exact (no noise).
inline absl::StatusOr<Eigen::VectorXd> Evaluate(const LinearQuery& query,
                                                const Histogram& h) {
  if (query.universe_size() != h.size()) {
    return MakeError(ErrorKind::kDimensionMismatch, "query expects ",
                     query.universe_size(), " cells, histogram has ", h.size());
  }
  if (query.is_identity()) return h.counts();
  return Eigen::VectorXd(query.a_matrix() * h.counts());
}

// Sensitivity under bounded neighboring (one record's value replaced):
// max over column pairs z != z' of ||a_z - a_z'||_p. Zero when d = 1.
inline double LpSensitivity(const LinearQuery& query, SensitivityNorm p) {
  if (auto declared = query.declared_sensitivity(p)) return *declared;
  const Eigen::MatrixXd& a = query.a_matrix();
  double best = 0.0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = i + 1; j < a.cols(); ++j) {
      const double dist = p == SensitivityNorm::kL1
                              ? (a.col(i) - a.col(j)).lpNorm<1>()
                              : (a.col(i) - a.col(j)).norm();
      best = std::max(best, dist);
    }
  }
  return best;
}

// Q_N^T A: the (n - n_c) x d query seen from inside the null space.
inline absl::StatusOr<LinearQuery> ProjectedQuery(const LinearQuery& query,
                                                  const InvariantSystem& sys) {
  if (query.output_dim() != sys.n()) {
    return MakeError(ErrorKind::kDimensionMismatch, "query output dimension ",
                     query.output_dim(), " != invariant dimension ", sys.n());
  }
  Eigen::MatrixXd projected =
      query.is_identity() ? Eigen::MatrixXd(sys.q_null().transpose())
                          : Eigen::MatrixXd(sys.q_null().transpose() *
                                            query.a_matrix());
  return LinearQuery::Create(std::move(projected), query.name() + "_null");
}

// Axis sizes of a multiway count table, flattened row-major in axis order
// (the last axis varies fastest).
class TableShape {
 public:
  static absl::StatusOr<TableShape> Create(
      std::vector<int> dims, std::vector<std::string> axis_names = {}) {
    if (dims.empty()) {
      return MakeError(ErrorKind::kInvalidArgument, "table needs an axis");
    }
    for (int d : dims) {
      if (d < 1) {
        return MakeError(ErrorKind::kInvalidArgument,
                         "axis sizes must be >= 1");
      }
    }
    if (axis_names.empty()) {
      for (std::size_t i = 0; i < dims.size(); ++i) {
        axis_names.push_back("axis" + std::to_string(i));
      }
    }
    if (axis_names.size() != dims.size()) {
      return MakeError(ErrorKind::kDimensionMismatch, "got ",
                       axis_names.size(), " axis names for ", dims.size(),
                       " axes");
    }
    return TableShape(std::move(dims), std::move(axis_names));
  }

  const std::vector<int>& dims() const { return dims_; }
  const std::vector<std::string>& axis_names() const { return axis_names_; }
  int num_axes() const { return static_cast<int>(dims_.size()); }
  std::int64_t num_cells() const {
    std::int64_t cells = 1;
    for (int d : dims_) cells *= d;
    return cells;
  }

  std::int64_t Flatten(const std::vector<int>& index) const {
    std::int64_t flat = 0;
    for (std::size_t a = 0; a < dims_.size(); ++a) {
      flat = flat * dims_[a] + index[a];
    }
    return flat;
  }

  std::vector<int> Unflatten(std::int64_t flat) const {
    std::vector<int> index(dims_.size());
    for (std::size_t a = dims_.size(); a-- > 0;) {
      index[a] = static_cast<int>(flat % dims_[a]);
      flat /= dims_[a];
    }
    return index;
  }

  std::optional<int> AxisIndex(const std::string& name) const {
    for (std::size_t a = 0; a < axis_names_.size(); ++a) {
      if (axis_names_[a] == name) return static_cast<int>(a);
    }
    return std::nullopt;
  }

 private:
  TableShape(std::vector<int> dims, std::vector<std::string> axis_names)
      : dims_(std::move(dims)), axis_names_(std::move(axis_names)) {}

  std::vector<int> dims_;
  std::vector<std::string> axis_names_;
};

// One exact-sum constraint per joint cell of grouped_axes, summing over
// summed_axes. An empty grouped_axes list is the grand total.
struct MarginalSpec {
  std::vector<int> grouped_axes;
  std::vector<int> summed_axes;

  static MarginalSpec GroupBy(const TableShape& shape,
                              std::vector<int> grouped) {
    MarginalSpec spec;
    for (int a = 0; a < shape.num_axes(); ++a) {
      if (std::find(grouped.begin(), grouped.end(), a) == grouped.end()) {
        spec.summed_axes.push_back(a);
      }
    }
    spec.grouped_axes = std::move(grouped);
    return spec;
  }
};

inline absl::Status ValidateMarginalSpec(const TableShape& shape,
                                         const MarginalSpec& spec) {
  std::vector<int> seen(shape.num_axes(), 0);
  for (const auto* axes : {&spec.grouped_axes, &spec.summed_axes}) {
    for (int a : *axes) {
      if (a < 0 || a >= shape.num_axes()) {
        return MakeError(ErrorKind::kAxisOverlap, "axis ", a,
                         " out of range for a ", shape.num_axes(),
                         "-axis table");
      }
      if (++seen[a] > 1) {
        return MakeError(ErrorKind::kAxisOverlap, "axis ", a,
                         " listed more than once");
      }
    }
  }
  for (int a = 0; a < shape.num_axes(); ++a) {
    if (seen[a] == 0) {
      return MakeError(ErrorKind::kAxisOverlap, "axis ", a,
                       " is neither grouped nor summed");
    }
  }
  return absl::OkStatus();
}

// Raw 0/1 constraint rows, one per joint cell of each spec's grouped axes.
// Rows from different specs are usually redundant (they share totals).
inline absl::StatusOr<Eigen::MatrixXd> MarginalConstraintRows(
    const TableShape& shape, const std::vector<MarginalSpec>& specs) {
  if (specs.empty()) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "at least one marginal spec is required");
  }
  std::int64_t total_rows = 0;
  for (const MarginalSpec& spec : specs) {
    SUBSPACE_DP_RETURN_IF_ERROR(ValidateMarginalSpec(shape, spec));
    std::int64_t groups = 1;
    for (int a : spec.grouped_axes) groups *= shape.dims()[a];
    total_rows += groups;
  }
  const std::int64_t cells = shape.num_cells();
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(total_rows, cells);
  std::int64_t offset = 0;
  for (const MarginalSpec& spec : specs) {
    std::int64_t groups = 1;
    for (int a : spec.grouped_axes) groups *= shape.dims()[a];
    for (std::int64_t cell = 0; cell < cells; ++cell) {
      const std::vector<int> index = shape.Unflatten(cell);
      std::int64_t group = 0;
      for (int a : spec.grouped_axes) group = group * shape.dims()[a] + index[a];
      rows(offset + group, cell) = 1.0;
    }
    offset += groups;
  }
  return rows;
}

inline absl::StatusOr<InvariantSystem> BuildMarginalInvariants(
    const TableShape& shape, const std::vector<MarginalSpec>& specs,
    double rank_tolerance = kDefaultRankTolerance) {
  SUBSPACE_DP_ASSIGN_OR_RETURN(Eigen::MatrixXd rows,
                               MarginalConstraintRows(shape, specs));
  return BuildInvariantSystem(rows, rank_tolerance);
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_QUERY_MODEL_H_
