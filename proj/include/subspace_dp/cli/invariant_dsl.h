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


// Invariant clauses of the form
//   exact-sum group-by <axis>[,<axis>...]
// An empty axis list (or "()") pins the grand total.

#ifndef SUBSPACE_DP_CLI_INVARIANT_DSL_H_
#define SUBSPACE_DP_CLI_INVARIANT_DSL_H_

#include <string>
#include <vector>

#include "absl/strings/ascii.h"
#include "absl/strings/str_split.h"
#include "subspace_dp/query_model.h"
#include "subspace_dp/status.h"

namespace subspace_dp::cli {

inline absl::StatusOr<MarginalSpec> ParseInvariantClause(
    const std::string& clause, const TableShape& shape) {
  std::vector<std::string> tokens =
      absl::StrSplit(clause, absl::ByAnyChar(" \t,"), absl::SkipEmpty());
  if (tokens.size() < 2 || absl::AsciiStrToLower(tokens[0]) != "exact-sum" ||
      absl::AsciiStrToLower(tokens[1]) != "group-by") {
    return MakeError(ErrorKind::kInvalidArgument, "invariant '", clause,
                     "' must read 'exact-sum group-by <axes>'");
  }
  std::vector<int> grouped;
  for (std::size_t t = 2; t < tokens.size(); ++t) {
    const std::string& name = tokens[t];
    if (name == "()" || name == "\xE2\x88\x85") continue;  // U+2205
    const auto axis = shape.AxisIndex(name);
    if (!axis.has_value()) {
      return MakeError(ErrorKind::kInvalidArgument, "invariant '", clause,
                       "' names unknown axis '", name, "'");
    }
    for (int g : grouped) {
      if (g == *axis) {
        return MakeError(ErrorKind::kAxisOverlap, "invariant '", clause,
                         "' repeats axis '", name, "'");
      }
    }
    grouped.push_back(*axis);
  }
  MarginalSpec spec = MarginalSpec::GroupBy(shape, std::move(grouped));
  SUBSPACE_DP_RETURN_IF_ERROR(ValidateMarginalSpec(shape, spec));
  return spec;
}

inline absl::StatusOr<std::vector<MarginalSpec>> ParseInvariants(
    const std::vector<std::string>& clauses, const TableShape& shape) {
  std::vector<MarginalSpec> specs;
  for (const std::string& clause : clauses) {
    SUBSPACE_DP_ASSIGN_OR_RETURN(MarginalSpec spec,
                                 ParseInvariantClause(clause, shape));
    specs.push_back(std::move(spec));
  }
  return specs;
}

}  // namespace subspace_dp::cli

#endif  // SUBSPACE_DP_CLI_INVARIANT_DSL_H_
