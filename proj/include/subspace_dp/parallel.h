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

#ifndef SUBSPACE_DP_PARALLEL_H_
#define SUBSPACE_DP_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace subspace_dp {

inline constexpr char kThreadsEnvVar[] = "SUBSPACE_DP_THREADS";

// Worker count: SUBSPACE_DP_THREADS if set to a positive integer, otherwise
// the hardware concurrency (at least 1).
inline int ThreadCap() {
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<int>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, count). Tasks are claimed dynamically, so fn must
// only write to per-index state for the result to be schedule independent.
inline void ParallelFor(std::size_t count,
                        const std::function<void(std::size_t)>& fn,
                        int max_threads = 0) {
  if (max_threads <= 0) max_threads = ThreadCap();
  const std::size_t workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(max_threads));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto loop = [&]() {
    for (std::size_t i = next++; i < count; i = next++) fn(i);
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(loop);
  loop();
  for (std::thread& t : pool) t.join();
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_PARALLEL_H_
