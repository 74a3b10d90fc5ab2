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

#ifndef SUBSPACE_DP_STATUS_H_
#define SUBSPACE_DP_STATUS_H_

#include <optional>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/cord.h"
#include "absl/strings/str_cat.h"

namespace subspace_dp {

// Library-specific failure reasons. Every error Status produced by this
// library carries one of these as a payload so callers can branch on the
// precise reason without parsing messages.
enum class ErrorKind {
  kDimensionMismatch,
  kNonFiniteInput,
  kInvalidArgument,
  kFullRankConstraint,
  kTrivialConstraint,
  kSingularGram,
  kAxisOverlap,
  kDeltaZero,
  kInvalidBudget,
  kInvariantViolation,
  kMixedDelta,
  kRankDeficientPoints,
  kRankDeficient,
  kProjectedRankDeficient,
  kPartitionInvalid,
  kNonAdditiveMechanism,
  kMissingAgent,
  kMalformedReport,
  kDegenerateRegressor,
  kInsufficientUnits,
  kInsufficientMass,
  kNotOneDimensional,
};

inline constexpr char kErrorKindPayloadUrl[] = "type.subspace_dp/error_kind";

inline constexpr const char* ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kDimensionMismatch: return "DimensionMismatch";
    case ErrorKind::kNonFiniteInput: return "NonFiniteInput";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kFullRankConstraint: return "FullRankConstraint";
    case ErrorKind::kTrivialConstraint: return "TrivialConstraint";
    case ErrorKind::kSingularGram: return "SingularGram";
    case ErrorKind::kAxisOverlap: return "AxisOverlap";
    case ErrorKind::kDeltaZero: return "DeltaZero";
    case ErrorKind::kInvalidBudget: return "InvalidBudget";
    case ErrorKind::kInvariantViolation: return "InvariantViolation";
    case ErrorKind::kMixedDelta: return "MixedDelta";
    case ErrorKind::kRankDeficientPoints: return "RankDeficientPoints";
    case ErrorKind::kRankDeficient: return "RankDeficient";
    case ErrorKind::kProjectedRankDeficient: return "ProjectedRankDeficient";
    case ErrorKind::kPartitionInvalid: return "PartitionInvalid";
    case ErrorKind::kNonAdditiveMechanism: return "NonAdditiveMechanism";
    case ErrorKind::kMissingAgent: return "MissingAgent";
    case ErrorKind::kMalformedReport: return "MalformedReport";
    case ErrorKind::kDegenerateRegressor: return "DegenerateRegressor";
    case ErrorKind::kInsufficientUnits: return "InsufficientUnits";
    case ErrorKind::kInsufficientMass: return "InsufficientMass";
    case ErrorKind::kNotOneDimensional: return "NotOneDimensional";
  }
  return "Unknown";
}

inline absl::StatusCode CanonicalCode(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvariantViolation:
      return absl::StatusCode::kInternal;
    case ErrorKind::kMissingAgent:
    case ErrorKind::kSingularGram:
      return absl::StatusCode::kFailedPrecondition;
    default:
      return absl::StatusCode::kInvalidArgument;
  }
}

// Builds an error Status tagged with `kind`. The message is prefixed with the
// kind name so logs stay readable.
template <typename... Args>
absl::Status MakeError(ErrorKind kind, const Args&... message_parts) {
  absl::Status status(CanonicalCode(kind),
                      absl::StrCat(ErrorKindName(kind), ": ",
                                   message_parts...));
  status.SetPayload(kErrorKindPayloadUrl,
                    absl::Cord(ErrorKindName(kind)));
  return status;
}

// Returns the ErrorKind attached by MakeError, or nullopt for OK statuses and
// statuses produced elsewhere.
inline std::optional<ErrorKind> ErrorKindOf(const absl::Status& status) {
  if (status.ok()) return std::nullopt;
  auto payload = status.GetPayload(kErrorKindPayloadUrl);
  if (!payload.has_value()) return std::nullopt;
  const std::string name(*payload);
  for (int k = 0; k <= static_cast<int>(ErrorKind::kNotOneDimensional); ++k) {
    const auto kind = static_cast<ErrorKind>(k);
    if (name == ErrorKindName(kind)) return kind;
  }
  return std::nullopt;
}

}  // namespace subspace_dp

#define SUBSPACE_DP_STATUS_CONCAT_INNER_(x, y) x##y
#define SUBSPACE_DP_STATUS_CONCAT_(x, y) SUBSPACE_DP_STATUS_CONCAT_INNER_(x, y)

#define SUBSPACE_DP_RETURN_IF_ERROR(expr)      \
  do {                                         \
    const absl::Status _status_ = (expr);      \
    if (!_status_.ok()) return _status_;       \
  } while (0)

#define SUBSPACE_DP_ASSIGN_OR_RETURN_IMPL_(statusor, lhs, rexpr) \
  auto statusor = (rexpr);                                       \
  if (!statusor.ok()) return statusor.status();                  \
  lhs = std::move(statusor).value()

// Usage: SUBSPACE_DP_ASSIGN_OR_RETURN(auto value, ComputeValue());
#define SUBSPACE_DP_ASSIGN_OR_RETURN(lhs, rexpr)                            \
  SUBSPACE_DP_ASSIGN_OR_RETURN_IMPL_(                                       \
      SUBSPACE_DP_STATUS_CONCAT_(_statusor_, __LINE__), lhs, rexpr)

#endif  // SUBSPACE_DP_STATUS_H_
