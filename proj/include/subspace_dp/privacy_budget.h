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

#ifndef SUBSPACE_DP_PRIVACY_BUDGET_H_
#define SUBSPACE_DP_PRIVACY_BUDGET_H_

#include <cmath>
#include <optional>

#include "subspace_dp/status.h"

namespace subspace_dp {

// (epsilon, delta) with the Gaussian calibration constant
// c = (1 + sqrt(1 + ln(1/delta))) / epsilon, defined only for delta > 0.
class PrivacyBudget {
 public:
  static absl::StatusOr<PrivacyBudget> Create(double epsilon, double delta) {
    if (!(std::isfinite(epsilon) && epsilon > 0.0)) {
      return MakeError(ErrorKind::kInvalidBudget,
                       "epsilon must be finite and > 0, got ", epsilon);
    }
    if (!(delta >= 0.0 && delta < 1.0)) {
      return MakeError(ErrorKind::kInvalidBudget,
                       "delta must lie in [0, 1), got ", delta);
    }
    return PrivacyBudget(epsilon, delta);
  }

  static PrivacyBudget Pure(double epsilon) { return PrivacyBudget(epsilon, 0); }

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }
  bool is_pure() const { return delta_ == 0.0; }

  std::optional<double> c_eps_delta() const {
    if (delta_ <= 0.0) return std::nullopt;
    return (1.0 + std::sqrt(1.0 + std::log(1.0 / delta_))) / epsilon_;
  }

 private:
  PrivacyBudget(double epsilon, double delta)
      : epsilon_(epsilon), delta_(delta) {}

  double epsilon_;
  double delta_;
};

// Per-coordinate standard deviation sigma = delta_2 * c_{eps,delta}.
inline absl::StatusOr<double> GaussianCalibration(const PrivacyBudget& budget,
                                                  double delta_2) {
  if (budget.is_pure()) {
    return MakeError(ErrorKind::kDeltaZero,
                     "Gaussian calibration needs delta > 0; use a Laplace "
                     "mechanism for pure privacy");
  }
  if (!(delta_2 >= 0.0) || !std::isfinite(delta_2)) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "l2 sensitivity must be finite and >= 0, got ", delta_2);
  }
  return delta_2 * *budget.c_eps_delta();
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_PRIVACY_BUDGET_H_
