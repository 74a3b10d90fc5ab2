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

// Distributed privatization of the identity query. Agent l holds the cells
// of one contiguous block K_l. Every agent regenerates the full noise vector
// from the common seed (the noise does not depend on anyone's data), keeps
// its slice and publishes y_l = x_l + e[K_l]. Concatenating the y_l gives
// exactly the centralized release for the same seed.

#ifndef SUBSPACE_DP_DISTRIBUTED_H_
#define SUBSPACE_DP_DISTRIBUTED_H_

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "subspace_dp/digest.h"
#include "subspace_dp/invariant_system.h"
#include "subspace_dp/mechanisms.h"
#include "subspace_dp/noise_source.h"
#include "subspace_dp/parallel.h"
#include "subspace_dp/status.h"

namespace subspace_dp {

// Cells [begin, end).
struct BlockRange {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
  bool operator==(const BlockRange&) const = default;
};

class Partition {
 public:
  // Blocks must be non-empty, in order, and tile [0, n).
  static absl::StatusOr<Partition> Create(int n, std::vector<BlockRange> blocks) {
    if (n < 1 || blocks.empty()) {
      return MakeError(ErrorKind::kPartitionInvalid,
                       "need n >= 1 and at least one block");
    }
    int expected = 0;
    for (const BlockRange& b : blocks) {
      if (b.begin != expected || b.end <= b.begin) {
        return MakeError(ErrorKind::kPartitionInvalid, "block [", b.begin, ", ",
                         b.end, ") does not continue at ", expected);
      }
      expected = b.end;
    }
    if (expected != n) {
      return MakeError(ErrorKind::kPartitionInvalid, "blocks cover ", expected,
                       " of ", n, " cells");
    }
    return Partition(n, std::move(blocks));
  }

  static absl::StatusOr<Partition> FromSizes(int n, const std::vector<int>& sizes) {
    std::vector<BlockRange> blocks;
    int begin = 0;
    for (int s : sizes) {
      blocks.push_back({begin, begin + s});
      begin += s;
    }
    return Create(n, std::move(blocks));
  }

  // m blocks whose sizes differ by at most one; the first n % m are larger.
  static absl::StatusOr<Partition> Equal(int n, int m) {
    if (m < 1 || m > n) {
      return MakeError(ErrorKind::kPartitionInvalid, "cannot split ", n,
                       " cells among ", m, " agents");
    }
    std::vector<int> sizes(m, n / m);
    for (int i = 0; i < n % m; ++i) ++sizes[i];
    return FromSizes(n, sizes);
  }

  int n() const { return n_; }
  int num_agents() const { return static_cast<int>(blocks_.size()); }
  const std::vector<BlockRange>& blocks() const { return blocks_; }
  const BlockRange& block(int agent) const { return blocks_[agent]; }

 private:
  Partition(int n, std::vector<BlockRange> blocks)
      : n_(n), blocks_(std::move(blocks)) {}

  int n_;
  std::vector<BlockRange> blocks_;
};

inline std::uint64_t SeedDigest(std::uint64_t seed) {
  Fnv1aHasher h;
  h.UpdateU64(seed);
  return h.digest();
}

inline std::uint64_t VectorDigest(const Eigen::VectorXd& v) {
  Fnv1aHasher h;
  h.UpdateU64(static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) h.UpdateDouble(v(i));
  return h.digest();
}

struct AgentReport {
  std::uint64_t agent_id = 0;
  BlockRange block;
  Eigen::VectorXd y_block;
  std::uint64_t seed_digest = 0;
  // Digest of the full regenerated noise vector. Kept in process for
  // cross-agent comparison; not part of the wire format.
  std::uint64_t noise_digest = 0;
};

struct DistributedResult {
  Eigen::VectorXd values;
  std::vector<AgentReport> reports;
};

// Agent-side step: regenerate e from `seed`, publish x_block + e[block].
inline AgentReport RunAgent(const AdditiveMechanism& mechanism,
                            std::uint64_t agent_id, const BlockRange& block,
                            const Eigen::VectorXd& x_block,
                            std::uint64_t seed) {
  NoiseSource noise(seed, 0);
  const Eigen::VectorXd e = mechanism.SampleNoise(noise);
  AgentReport report;
  report.agent_id = agent_id;
  report.block = block;
  report.y_block = x_block + e.segment(block.begin, block.size());
  report.seed_digest = SeedDigest(seed);
  report.noise_digest = VectorDigest(e);
  return report;
}

// Simulates the agents in process. `seed_overrides` maps agent ids to the
// seed they use instead of the common one (fault injection).
inline absl::StatusOr<DistributedResult> RunDistributed(
    const AdditiveMechanism& mechanism, const Eigen::VectorXd& x,
    std::uint64_t seed, const Partition& partition,
    const std::map<std::uint64_t, std::uint64_t>& seed_overrides = {}) {
  if (!mechanism.query().is_identity()) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "distributed privatization supports the identity query");
  }
  if (x.size() != mechanism.invariants().n() || partition.n() != x.size()) {
    return MakeError(ErrorKind::kDimensionMismatch, "data has ", x.size(),
                     " cells, invariants ", mechanism.invariants().n(),
                     ", partition ", partition.n());
  }
  if (!x.allFinite()) {
    return MakeError(ErrorKind::kNonFiniteInput, "data is not finite");
  }
  DistributedResult result;
  result.reports.resize(partition.num_agents());
  ParallelFor(partition.num_agents(), [&](std::size_t agent) {
    const BlockRange& block = partition.block(static_cast<int>(agent));
    const auto it = seed_overrides.find(agent);
    const std::uint64_t agent_seed =
        it == seed_overrides.end() ? seed : it->second;
    result.reports[agent] =
        RunAgent(mechanism, agent, block, x.segment(block.begin, block.size()),
                 agent_seed);
  });
  result.values.resize(x.size());
  for (const AgentReport& r : result.reports) {
    result.values.segment(r.block.begin, r.block.size()) = r.y_block;
  }
  return result;
}

// Arbitrary (non-contiguous) index sets. Normalized by a fixed permutation:
// each set is sorted ascending and the sets are laid out in agent order, so
// agent l owns positions [begin_l, end_l) of `order`.
struct IndexedPartition {
  std::vector<int> order;  // position -> original cell
  Partition partition;
};

inline absl::StatusOr<IndexedPartition> NormalizeIndexSets(
    int n, std::vector<std::vector<int>> sets) {
  if (n < 1 || sets.empty()) {
    return MakeError(ErrorKind::kPartitionInvalid,
                     "need n >= 1 and at least one index set");
  }
  std::vector<char> seen(n, 0);
  std::vector<int> order;
  std::vector<int> sizes;
  order.reserve(n);
  for (std::vector<int>& set : sets) {
    std::sort(set.begin(), set.end());
    for (int i : set) {
      if (i < 0 || i >= n) {
        return MakeError(ErrorKind::kPartitionInvalid, "cell ", i,
                         " outside [0, ", n, ")");
      }
      if (seen[i]) {
        return MakeError(ErrorKind::kPartitionInvalid, "cell ", i,
                         " held by two agents");
      }
      seen[i] = 1;
      order.push_back(i);
    }
    sizes.push_back(static_cast<int>(set.size()));
  }
  SUBSPACE_DP_ASSIGN_OR_RETURN(Partition partition,
                               Partition::FromSizes(n, sizes));
  return IndexedPartition{std::move(order), std::move(partition)};
}

// Same protocol over index sets. Agent l publishes x[S_l] + e[S_l] (in sorted
// S_l order); the aggregate is scattered back to the original cell order.
inline absl::StatusOr<DistributedResult> RunDistributedIndexed(
    const AdditiveMechanism& mechanism, const Eigen::VectorXd& x,
    std::uint64_t seed, const IndexedPartition& indexed,
    const std::map<std::uint64_t, std::uint64_t>& seed_overrides = {}) {
  if (!mechanism.query().is_identity()) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "distributed privatization supports the identity query");
  }
  if (x.size() != mechanism.invariants().n() ||
      indexed.partition.n() != x.size()) {
    return MakeError(ErrorKind::kDimensionMismatch, "data has ", x.size(),
                     " cells, invariants ", mechanism.invariants().n(),
                     ", partition ", indexed.partition.n());
  }
  if (!x.allFinite()) {
    return MakeError(ErrorKind::kNonFiniteInput, "data is not finite");
  }
  const Partition& partition = indexed.partition;
  DistributedResult result;
  result.reports.resize(partition.num_agents());
  ParallelFor(partition.num_agents(), [&](std::size_t agent) {
    const BlockRange& block = partition.block(static_cast<int>(agent));
    const auto it = seed_overrides.find(agent);
    const std::uint64_t agent_seed =
        it == seed_overrides.end() ? seed : it->second;
    NoiseSource noise(agent_seed, 0);
    const Eigen::VectorXd e = mechanism.SampleNoise(noise);
    AgentReport& report = result.reports[agent];
    report.agent_id = agent;
    report.block = block;
    report.y_block.resize(block.size());
    for (int p = block.begin; p < block.end; ++p) {
      const int cell = indexed.order[p];
      report.y_block(p - block.begin) = x(cell) + e(cell);
    }
    report.seed_digest = SeedDigest(agent_seed);
    report.noise_digest = VectorDigest(e);
  });
  result.values.resize(x.size());
  for (const AgentReport& r : result.reports) {
    for (int p = r.block.begin; p < r.block.end; ++p) {
      result.values(indexed.order[p]) = r.y_block(p - r.block.begin);
    }
  }
  return result;
}

// Wire format, all little endian:
//   u64 length L | L x f64 block values | u64 agent_id | u64 seed digest
inline std::string EncodeAgentReport(const AgentReport& report) {
  std::string out;
  auto put_u64 = [&out](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
  };
  put_u64(static_cast<std::uint64_t>(report.y_block.size()));
  for (Eigen::Index i = 0; i < report.y_block.size(); ++i) {
    put_u64(std::bit_cast<std::uint64_t>(report.y_block(i)));
  }
  put_u64(report.agent_id);
  put_u64(report.seed_digest);
  return out;
}

// The block range is recovered from the partition by agent id.
inline absl::StatusOr<AgentReport> DecodeAgentReport(std::string_view bytes,
                                                     const Partition& partition) {
  std::size_t pos = 0;
  auto get_u64 = [&](std::uint64_t& v) {
    if (bytes.size() - pos < 8) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i]))
           << (8 * i);
    }
    pos += 8;
    return true;
  };
  std::uint64_t length = 0;
  if (!get_u64(length) || length > (bytes.size() - pos) / 8) {
    return MakeError(ErrorKind::kMalformedReport, "bad length prefix");
  }
  AgentReport report;
  report.y_block.resize(static_cast<Eigen::Index>(length));
  for (std::uint64_t i = 0; i < length; ++i) {
    std::uint64_t bits = 0;
    get_u64(bits);
    report.y_block(static_cast<Eigen::Index>(i)) = std::bit_cast<double>(bits);
  }
  if (!get_u64(report.agent_id) || !get_u64(report.seed_digest) ||
      pos != bytes.size()) {
    return MakeError(ErrorKind::kMalformedReport, "truncated or oversized report");
  }
  if (report.agent_id >= static_cast<std::uint64_t>(partition.num_agents())) {
    return MakeError(ErrorKind::kMalformedReport, "unknown agent ",
                     report.agent_id);
  }
  report.block = partition.block(static_cast<int>(report.agent_id));
  if (report.block.size() != static_cast<int>(length)) {
    return MakeError(ErrorKind::kMalformedReport, "agent ", report.agent_id,
                     " sent ", length, " values for a block of ",
                     report.block.size());
  }
  if (!report.y_block.allFinite()) {
    return MakeError(ErrorKind::kMalformedReport, "non-finite values");
  }
  return report;
}

struct AggregateAudit {
  bool passed = false;
  bool digests_consistent = false;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  Eigen::VectorXd values;
  // Agents whose seed digest differs from the expected one.
  std::vector<std::uint64_t> inconsistent_agents;
};

// Aggregator: checks every agent reported once, that all used the expected
// seed, and that C y = C x.
inline absl::StatusOr<AggregateAudit> VerifyAggregate(
    const std::vector<AgentReport>& reports, const InvariantSystem& sys,
    const Eigen::VectorXd& x, std::uint64_t expected_seed) {
  if (x.size() != sys.n()) {
    return MakeError(ErrorKind::kDimensionMismatch, "data has ", x.size(),
                     " cells, invariants ", sys.n());
  }
  std::vector<const AgentReport*> ordered;
  for (const AgentReport& r : reports) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const AgentReport* a, const AgentReport* b) {
              return a->block.begin < b->block.begin;
            });
  AggregateAudit audit;
  audit.values.resize(x.size());
  const std::uint64_t expected_digest = SeedDigest(expected_seed);
  int covered = 0;
  for (const AgentReport* r : ordered) {
    if (r->block.begin > covered) {
      return MakeError(ErrorKind::kMissingAgent, "no report covers cells [",
                       covered, ", ", r->block.begin, ")");
    }
    if (r->block.begin < covered || r->block.end > x.size() ||
        r->y_block.size() != r->block.size()) {
      return MakeError(ErrorKind::kPartitionInvalid, "agent ", r->agent_id,
                       " overlaps or overruns the table");
    }
    audit.values.segment(r->block.begin, r->block.size()) = r->y_block;
    covered = r->block.end;
    if (r->seed_digest != expected_digest) {
      audit.inconsistent_agents.push_back(r->agent_id);
    }
  }
  if (covered != x.size()) {
    return MakeError(ErrorKind::kMissingAgent, "no report covers cells [",
                     covered, ", ", x.size(), ")");
  }
  audit.digests_consistent = audit.inconsistent_agents.empty();
  const Eigen::MatrixXd& c = sys.c_matrix();
  audit.max_deviation = (c * (audit.values - x)).cwiseAbs().maxCoeff();
  audit.tolerance = kInvariantRelativeTolerance *
                    (1.0 + sys.c_scale() * x.cwiseAbs().maxCoeff());
  audit.passed =
      audit.digests_consistent && audit.max_deviation <= audit.tolerance;
  return audit;
}

}  // namespace subspace_dp

#endif  // SUBSPACE_DP_DISTRIBUTED_H_
