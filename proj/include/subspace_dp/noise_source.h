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

#ifndef SUBSPACE_DP_NOISE_SOURCE_H_
#define SUBSPACE_DP_NOISE_SOURCE_H_

#include <cmath>
#include <cstdint>
#include <random>

#include "Eigen/Dense"
#include "subspace_dp/digest.h"

namespace subspace_dp {

// Deterministic noise stream keyed by (seed, stream_id).
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Distributions are implemented here rather than through
// <random>'s distribution classes, whose algorithms are implementation
// defined:
//   uniform  : top 53 bits, shifted to the open interval (0, 1)
//   gaussian : Marsaglia polar method, second variate cached
//   laplace  : inverse CDF
// Not thread-safe; give each thread its own stream_id.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed),
        stream_id_(stream_id),
        engine_(SplitMix64(SplitMix64(seed) ^ SplitMix64(~stream_id))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  double Uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double StandardGaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * Uniform() - 1.0;
      v = 2.0 * Uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    has_spare_ = true;
    return u * factor;
  }

  double Gaussian(double stddev) { return stddev * StandardGaussian(); }

  // Density exp(-|x|/scale) / (2 scale).
  double Laplace(double scale) {
    const double u = Uniform();
    return u < 0.5 ? scale * std::log(2.0 * u)
                   : -scale * std::log(2.0 * (1.0 - u));
  }

  Eigen::VectorXd GaussianVector(Eigen::Index size, double stddev) {
    Eigen::VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) out(i) = Gaussian(stddev);
    return out;
  }

  Eigen::VectorXd LaplaceVector(Eigen::Index size, double scale) {
    Eigen::VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) out(i) = Laplace(scale);
    return out;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_NOISE_SOURCE_H_
