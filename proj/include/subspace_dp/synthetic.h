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

// Synthetic fixtures used by the demos and tests. Both are generated from a
// seed rather than bundled as data.
//
// Census: 48 states, state 0 has 102 counties and the rest between 6 and
// 50; county populations are log-uniform in [1e3, 1e7], rounded.
//
// Campus: person-hours on a 14 (group) x 24 (hour) x 20 (building) table
// with exact totals per (hour, building) and per (group, building).

#ifndef SUBSPACE_DP_SYNTHETIC_H_
#define SUBSPACE_DP_SYNTHETIC_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "Eigen/Dense"
#include "absl/strings/str_cat.h"
#include "subspace_dp/noise_source.h"
#include "subspace_dp/query_model.h"

namespace subspace_dp {

struct CensusFixture {
  std::vector<std::string> state_names;
  std::vector<std::string> county_names;
  // County c belongs to state state_of_county[c]; counties of one state are
  // contiguous and state s starts at state_offsets[s].
  std::vector<int> state_of_county;
  std::vector<int> state_offsets;
  Eigen::VectorXd population;

  int num_states() const { return static_cast<int>(state_names.size()); }
  int counties_in(int state) const {
    return state_offsets[state + 1] - state_offsets[state];
  }
  Eigen::VectorXd StatePopulation(int state) const {
    return population.segment(state_offsets[state], counties_in(state));
  }
};

inline constexpr int kCensusStates = 48;
inline constexpr int kCensusLargeStateCounties = 102;

inline CensusFixture SyntheticCensus(std::uint64_t seed,
                                     int states = kCensusStates) {
  NoiseSource rng(seed, 0);
  CensusFixture f;
  f.state_offsets.push_back(0);
  std::vector<double> pops;
  for (int s = 0; s < states; ++s) {
    const int counties =
        s == 0 ? kCensusLargeStateCounties
               : 6 + static_cast<int>(rng.Uniform() * 45.0);
    f.state_names.push_back(absl::StrCat("S", s < 10 ? "0" : "", s));
    for (int c = 0; c < counties; ++c) {
      f.county_names.push_back(
          absl::StrCat(f.state_names.back(), "-C", c < 10 ? "00" : c < 100 ? "0" : "", c));
      f.state_of_county.push_back(s);
      pops.push_back(std::round(std::pow(10.0, 3.0 + 4.0 * rng.Uniform())));
    }
    f.state_offsets.push_back(static_cast<int>(pops.size()));
  }
  f.population = Eigen::Map<Eigen::VectorXd>(pops.data(), pops.size());
  return f;
}

struct CampusFixture {
  TableShape shape;
  Eigen::VectorXd counts;
  std::vector<MarginalSpec> specs;
};

inline CampusFixture SyntheticCampus(std::uint64_t seed) {
  TableShape shape =
      *TableShape::Create({14, 24, 20}, {"group", "hour", "building"});
  NoiseSource rng(seed, 0);
  Eigen::VectorXd counts(shape.num_cells());
  for (Eigen::Index i = 0; i < counts.size(); ++i) {
    const std::vector<int> idx = shape.Unflatten(i);
    // Busier in the daytime.
    const double daytime = idx[1] >= 8 && idx[1] < 18 ? 4.0 : 1.0;
    counts(i) = std::floor(daytime * 20.0 * rng.Uniform());
  }
  std::vector<MarginalSpec> specs = {MarginalSpec::GroupBy(shape, {1, 2}),
                                     MarginalSpec::GroupBy(shape, {0, 2})};
  return CampusFixture{std::move(shape), std::move(counts), std::move(specs)};
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_SYNTHETIC_H_
