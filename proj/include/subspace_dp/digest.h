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

#ifndef SUBSPACE_DP_DIGEST_H_
#define SUBSPACE_DP_DIGEST_H_

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>

#include "absl/strings/str_format.h"

namespace subspace_dp {

// 64-bit FNV-1a. Not cryptographic; used to fingerprint invariant systems,
// seeds and noise vectors so independently computed artifacts can be compared.
class Fnv1aHasher {
 public:
  void Update(std::span<const std::byte> bytes) {
    for (std::byte b : bytes) {
      state_ ^= static_cast<std::uint64_t>(b);
      state_ *= kPrime;
    }
  }

  void UpdateU64(std::uint64_t value) {
    // Fixed little-endian byte order so digests do not depend on the host.
    std::byte bytes[8];
    for (int i = 0; i < 8; ++i) {
      bytes[i] = static_cast<std::byte>((value >> (8 * i)) & 0xffu);
    }
    Update(bytes);
  }

  void UpdateDouble(double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof(bits));
    UpdateU64(bits);
  }

  std::uint64_t digest() const { return state_; }

 private:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ull;
  static constexpr std::uint64_t kPrime = 0x100000001b3ull;
  std::uint64_t state_ = kOffset;
};

inline std::string DigestToHex(std::uint64_t digest) {
  return absl::StrFormat("%016x", digest);
}

// SplitMix64 finalizer; a bijective 64-bit mixer.
inline constexpr std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_DIGEST_H_
