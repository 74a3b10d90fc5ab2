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

// JSON documents for invariant systems, releases, base decompositions and
// audit reports, plus a CSV dump of per-run errors. Matrices are written as
// arrays of rows. Doubles are written in shortest round-trip form.

#ifndef SUBSPACE_DP_SERIALIZATION_H_
#define SUBSPACE_DP_SERIALIZATION_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/strings/str_format.h"
#include "json.hpp"
#include "subspace_dp/audit.h"
#include "subspace_dp/base_decomposition.h"
#include "subspace_dp/invariant_system.h"
#include "subspace_dp/mechanisms.h"
#include "subspace_dp/status.h"

namespace subspace_dp {

using Json = nlohmann::ordered_json;

inline Json VectorToJson(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(VectorToJson(m.row(i).transpose()));
  }
  return rows;
}

inline absl::StatusOr<Eigen::VectorXd> VectorFromJson(const Json& j) {
  if (!j.is_array()) {
    return MakeError(ErrorKind::kInvalidArgument, "expected a JSON array");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      return MakeError(ErrorKind::kInvalidArgument, "non-numeric entry ", i);
    }
    v(i) = j[i].get<double>();
  }
  return v;
}

inline absl::StatusOr<Eigen::MatrixXd> MatrixFromJson(const Json& j) {
  if (!j.is_array()) {
    return MakeError(ErrorKind::kInvalidArgument, "expected an array of rows");
  }
  Eigen::MatrixXd m;
  for (std::size_t i = 0; i < j.size(); ++i) {
    SUBSPACE_DP_ASSIGN_OR_RETURN(Eigen::VectorXd row, VectorFromJson(j[i]));
    if (i == 0) m.resize(j.size(), row.size());
    if (row.size() != m.cols()) {
      return MakeError(ErrorKind::kDimensionMismatch, "ragged matrix rows");
    }
    m.row(i) = row.transpose();
  }
  return m;
}

inline Json InvariantSystemToJson(const InvariantSystem& sys) {
  Json j;
  j["n"] = sys.n();
  j["n_c"] = sys.rank();
  j["c_rows"] = MatrixToJson(sys.c_matrix());
  j["q_null"] = MatrixToJson(sys.q_null());
  j["digest"] = sys.digest_hex();
  return j;
}

// Rebuilds the system from its constraint rows; q_null is recomputed.
inline absl::StatusOr<InvariantSystem> InvariantSystemFromJson(const Json& j) {
  if (!j.is_object() || !j.contains("c_rows")) {
    return MakeError(ErrorKind::kInvalidArgument, "missing c_rows");
  }
  SUBSPACE_DP_ASSIGN_OR_RETURN(Eigen::MatrixXd c, MatrixFromJson(j["c_rows"]));
  return BuildInvariantSystem(c);
}

inline Json ReleaseToJson(const MechanismRelease& r) {
  Json j;
  j["mechanism_id"] = MechanismName(r.mechanism_id);
  j["seed"] = r.seed;
  j["epsilon"] = r.budget.epsilon();
  j["delta"] = r.budget.delta();
  j["analytic_mse"] =
      r.analytic_mse.has_value() ? Json(*r.analytic_mse) : Json(nullptr);
  j["values"] = VectorToJson(r.values);
  j["invariant_digest"] = r.invariant_digest;
  return j;
}

// Parses the fields written by ReleaseToJson. Invariant metadata beyond the
// digest is not part of the document.
inline absl::StatusOr<MechanismRelease> ReleaseFromJson(const Json& j) {
  try {
    MechanismRelease r;
    const auto id = ParseMechanismId(j.at("mechanism_id").get<std::string>());
    if (!id.has_value()) {
      return MakeError(ErrorKind::kInvalidArgument, "unknown mechanism id");
    }
    r.mechanism_id = *id;
    r.seed = j.at("seed").get<std::uint64_t>();
    SUBSPACE_DP_ASSIGN_OR_RETURN(
        r.budget, PrivacyBudget::Create(j.at("epsilon").get<double>(),
                                        j.at("delta").get<double>()));
    if (!j.at("analytic_mse").is_null()) {
      r.analytic_mse = j.at("analytic_mse").get<double>();
    }
    SUBSPACE_DP_ASSIGN_OR_RETURN(r.values, VectorFromJson(j.at("values")));
    r.invariant_digest = j.at("invariant_digest").get<std::string>();
    return r;
  } catch (const Json::exception& e) {
    return MakeError(ErrorKind::kInvalidArgument, "bad release JSON: ",
                     e.what());
  }
}

inline Json BaseDecompositionToJson(const BaseDecomposition& dec) {
  Json j;
  j["k"] = dec.k;
  j["n"] = dec.n;
  j["mvee_converged"] = dec.mvee_converged;
  Json blocks = Json::array();
  for (const DecompositionBlock& b : dec.blocks) {
    Json block;
    block["n_i"] = b.dim();
    block["r_i"] = b.r;
    block["u"] = MatrixToJson(b.u_block);
    blocks.push_back(std::move(block));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

inline Json ThresholdsToJson(const AuditThresholds& t) {
  Json j;
  j["mean_guard_sigmas"] = t.mean_guard_sigmas;
  j["mse_relative_tolerance"] = t.mse_relative_tolerance;
  j["covariance_guard_sigmas"] = t.covariance_guard_sigmas;
  j["max_covariance_dim"] = t.max_covariance_dim;
  j["ks_min_p_value"] = t.ks_min_p_value;
  j["bias_alpha"] = t.bias_alpha;
  j["ratio_slack_stds"] = t.ratio_slack_stds;
  j["ratio_min_hits"] = t.ratio_min_hits;
  j["ratio_bins"] = t.ratio_bins;
  j["ratio_central_mass"] = t.ratio_central_mass;
  return j;
}

inline Json RegressionToJson(const RegressionFit& f) {
  Json j;
  j["units"] = f.units;
  j["slope"] = f.slope;
  j["intercept"] = f.intercept;
  j["slope_std_error"] = f.slope_std_error;
  j["t_statistic"] = f.t_statistic;
  j["p_value"] = f.p_value;
  j["alpha"] = f.alpha;
  j["ci"] = {f.ci_low, f.ci_high};
  j["ci_contains_zero"] = f.ci_contains_zero();
  return j;
}

inline Json AuditReportToJson(const AuditReport& r) {
  Json j;
  j["mechanism_id"] = MechanismName(r.mechanism_id);
  j["repetitions"] = r.repetitions;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["null_dim"] = r.null_dim;
  j["thresholds"] = ThresholdsToJson(r.thresholds);
  j["sensitivity_conventions"] = {
      {"bounded_replacement_l2", r.bounded_l2_sensitivity},
      {"unit_l1_ball_radius", r.unit_l1_radius}};
  Json mean;
  mean["error"] = VectorToJson(r.mean_error);
  mean["std"] = VectorToJson(r.error_std);
  const double root = std::sqrt(static_cast<double>(r.repetitions));
  const Eigen::VectorXd half = r.thresholds.mean_guard_sigmas * r.error_std / root;
  mean["ci_low"] = VectorToJson(r.mean_error - half);
  mean["ci_high"] = VectorToJson(r.mean_error + half);
  mean["max_z"] = r.max_mean_z;
  mean["passed"] = r.mean_passed;
  j["mean"] = std::move(mean);
  j["mse"] = {{"empirical", r.empirical_mse},
              {"analytic", r.analytic_mse},
              {"ratio", r.mse_ratio},
              {"passed", r.mse_passed}};
  if (r.covariance_max_deviation.has_value()) {
    j["covariance"] = {{"max_deviation", *r.covariance_max_deviation},
                       {"max_z", r.covariance_max_z.value_or(0.0)},
                       {"passed", r.covariance_passed}};
  } else {
    j["covariance"] = nullptr;
  }
  j["invariant"] = {{"max_deviation", r.invariant_max_deviation},
                    {"failures", r.invariant_failures},
                    {"passed", r.invariant_passed}};
  Json ks = Json::array();
  for (const DirectionKs& d : r.ks) {
    ks.push_back({{"coordinate", d.coordinate},
                  {"stddev", d.stddev},
                  {"statistic", d.ks.statistic},
                  {"p_value", d.ks.p_value}});
  }
  j["ks"] = std::move(ks);
  j["ks_passed"] = r.ks_passed;
  j["bias_regression"] = r.bias.has_value() ? RegressionToJson(*r.bias)
                                            : Json(nullptr);
  if (r.bias_batch.has_value()) {
    const BiasBatchSummary& b = *r.bias_batch;
    j["bias_batch"] = {{"regressions", b.regressions},
                       {"significant_negative", b.significant_negative},
                       {"alpha", b.alpha},
                       {"nominal_rate", b.nominal_rate},
                       {"binomial_p_value", b.binomial_p_value},
                       {"consistent", b.consistent}};
  } else {
    j["bias_batch"] = nullptr;
  }
  if (r.ratio.has_value()) {
    const RatioProbeResult& p = *r.ratio;
    j["ratio_probe"] = {{"repetitions", p.repetitions},
                        {"epsilon", p.epsilon},
                        {"range", {p.range_low, p.range_high}},
                        {"bins", p.bins},
                        {"bins_used", p.bins_used},
                        {"max_log_ratio", p.max_log_ratio},
                        {"max_excess", p.max_excess},
                        {"slack_at_max", p.slack_at_max},
                        {"passed", p.passed}};
  } else {
    j["ratio_probe"] = nullptr;
  }
  j["passed"] = r.passed();
  return j;
}

// One row per unit: label, true value, then the error of each run.
inline std::string ErrorsCsv(const std::vector<std::string>& labels,
                             const Eigen::VectorXd& truth,
                             const Eigen::MatrixXd& errors) {
  std::string out = "unit,true";
  for (Eigen::Index r = 0; r < errors.cols(); ++r) {
    absl::StrAppendFormat(&out, ",run%d", r);
  }
  out += "\n";
  for (Eigen::Index i = 0; i < errors.rows(); ++i) {
    out += i < static_cast<Eigen::Index>(labels.size()) ? labels[i]
                                                         : std::to_string(i);
    absl::StrAppendFormat(&out, ",%.17g", truth(i));
    for (Eigen::Index r = 0; r < errors.cols(); ++r) {
      absl::StrAppendFormat(&out, ",%.17g", errors(i, r));
    }
    out += "\n";
  }
  return out;
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_SERIALIZATION_H_
