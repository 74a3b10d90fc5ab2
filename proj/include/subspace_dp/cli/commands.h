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


// The subcommands behind the subspace_dp tool. Each takes parsed options and
// two streams and returns the process exit code, so tests can run them
// in-process.
//
// Exit codes: 0 success, 1 audit check failed, 2 parse or validation error,
// 3 mechanism error, 4 distributed aggregate mismatch.

#ifndef SUBSPACE_DP_CLI_COMMANDS_H_
#define SUBSPACE_DP_CLI_COMMANDS_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "subspace_dp/audit.h"
#include "subspace_dp/cli/csv.h"
#include "subspace_dp/cli/dataset.h"
#include "subspace_dp/cli/invariant_dsl.h"
#include "subspace_dp/digest.h"
#include "subspace_dp/distributed.h"
#include "subspace_dp/mechanisms.h"
#include "subspace_dp/serialization.h"
#include "subspace_dp/synthetic.h"

namespace subspace_dp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitMechanism = 3;
inline constexpr int kExitMismatch = 4;

struct CommonOptions {
  DatasetSpec dataset;
  std::vector<std::string> invariants;
  std::string mechanism = "projected-gaussian";
  double epsilon = 1.0;
  double delta = 0.0;
  std::optional<std::uint64_t> seed;
};

struct ReleaseOptions {
  CommonOptions common;
  std::string out_csv;
  // Defaults to <out_csv>.release.json.
  std::string report_json;
  bool clip_negative = false;
};

struct AuditCliOptions {
  CommonOptions common;
  std::string check = "mse";
  std::int64_t repetitions = 100000;
  int runs = 10;
  std::string report_json;
  std::string errors_csv;
  // Optional key axis: one bias regression per level, then a batch test.
  std::string bias_group;
  // Neighbour for the ratio probe: one unit moves from cell `from` to `to`.
  std::optional<int> neighbor_from;
  std::optional<int> neighbor_to;
};

struct DistributedOptions {
  CommonOptions common;
  int agents = 2;
  // "agent=K": agent K uses a wrong seed.
  std::string inject_seed_fault;
  std::string out_csv;
  std::string report_json;
};

struct SynthOptions {
  std::string kind;
  std::optional<std::uint64_t> seed;
  int states = 1;
  std::string out_csv;
};

struct ReproduceOptions {
  std::string which;
  std::optional<std::uint64_t> seed;
  int runs = 0;
};

// Bias regression over an external CSV of (true, released) pairs, e.g. the
// output of another system. Each --released-column is one run.
struct RegressOptions {
  std::string input_csv;
  std::string true_column;
  std::vector<std::string> released_columns;
  std::string group_column;
  double alpha = 0.01;
  std::string report_json;
};

namespace internal {

inline int Fail(std::ostream& err, int code, const absl::Status& status) {
  err << "error: " << status.message() << "\n";
  return code;
}

inline int Fail(std::ostream& err, int code, const std::string& message) {
  err << "error: " << message << "\n";
  return code;
}

struct Prepared {
  Dataset data;
  std::shared_ptr<const InvariantSystem> sys;
  std::optional<Histogram> histogram;
  std::optional<AdditiveMechanism> mechanism;
};

// Loads data and invariants (failures exit 2) and plans the mechanism
// (failures exit 3).
inline int Prepare(const CommonOptions& o, std::ostream& err, Prepared* p) {
  if (!o.seed.has_value()) {
    return Fail(err, kExitUsage,
                "--seed is required; releases are never seeded implicitly");
  }
  const auto id = ParseMechanismId(o.mechanism);
  if (!id.has_value() || !IsAdditive(*id)) {
    return Fail(err, kExitUsage, "unknown mechanism '" + o.mechanism + "'");
  }
  if (o.invariants.empty()) {
    return Fail(err, kExitUsage, "at least one --invariant is required");
  }
  auto budget = PrivacyBudget::Create(o.epsilon, o.delta);
  if (!budget.ok()) return Fail(err, kExitUsage, budget.status());
  auto data = LoadDataset(o.dataset);
  if (!data.ok()) return Fail(err, kExitUsage, data.status());
  p->data = *std::move(data);
  auto specs = ParseInvariants(o.invariants, *p->data.shape);
  if (!specs.ok()) return Fail(err, kExitUsage, specs.status());
  auto sys = BuildMarginalInvariants(*p->data.shape, *specs);
  if (!sys.ok()) return Fail(err, kExitUsage, sys.status());
  p->sys = std::make_shared<const InvariantSystem>(*std::move(sys));
  auto h = Histogram::Create(p->data.counts);
  if (!h.ok()) return Fail(err, kExitUsage, h.status());
  p->histogram = *std::move(h);
  auto mechanism = AdditiveMechanism::Plan(
      *id, LinearQuery::Identity(p->data.num_cells()), p->sys, *budget);
  if (!mechanism.ok()) return Fail(err, kExitMechanism, mechanism.status());
  p->mechanism = *std::move(mechanism);
  return kExitOk;
}

inline void PrintRank(const InvariantSystem& sys, std::ostream& out) {
  out << absl::StrFormat("constraint rank: %d (cells %d, free dimensions %d)\n",
                         sys.rank(), sys.n(), sys.null_dim());
}

inline double InvariantDeviation(const InvariantSystem& sys,
                                 const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& x) {
  return (sys.c_matrix() * (y - x)).cwiseAbs().maxCoeff();
}

// Reads the values back from sanitized CSV text, in SanitizedTable order.
inline absl::StatusOr<Eigen::VectorXd> ValuesFromSanitizedCsv(
    const Dataset& data, const std::string& text) {
  std::istringstream in(text);
  SUBSPACE_DP_ASSIGN_OR_RETURN(CsvTable table, ParseCsv(in));
  if (table.rows.size() != static_cast<std::size_t>(data.num_cells())) {
    return MakeError(ErrorKind::kDimensionMismatch, "sanitized CSV has ",
                     table.rows.size(), " rows for ", data.num_cells(),
                     " cells");
  }
  std::vector<std::int64_t> order = data.row_cell;
  std::vector<char> listed(data.num_cells(), 0);
  for (std::int64_t c : order) listed[c] = 1;
  for (int c = 0; c < data.num_cells(); ++c) {
    if (!listed[c]) order.push_back(c);
  }
  Eigen::VectorXd y(data.num_cells());
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!absl::SimpleAtod(table.rows[r][data.value_index], &y(order[r]))) {
      return MakeError(ErrorKind::kInvalidArgument, "unparsable value in row ",
                       r + 1);
    }
  }
  return y;
}

inline absl::StatusOr<int> ParseFaultAgent(const std::string& text) {
  std::vector<std::string> parts = absl::StrSplit(text, '=');
  int agent = -1;
  if (parts.size() != 2 || parts[0] != "agent" ||
      !absl::SimpleAtoi(parts[1], &agent) || agent < 0) {
    return MakeError(ErrorKind::kInvalidArgument,
                     "--inject-seed-fault expects agent=K, got '", text, "'");
  }
  return agent;
}

inline std::string Hex(std::uint64_t v) { return DigestToHex(v); }

}  // namespace internal

inline int RunReleaseCommand(const ReleaseOptions& o, std::ostream& out,
                             std::ostream& err) {
  if (o.out_csv.empty()) {
    return internal::Fail(err, kExitUsage, "--out is required");
  }
  internal::Prepared p;
  if (int code = internal::Prepare(o.common, err, &p); code != kExitOk) {
    return code;
  }
  const InvariantSystem& sys = *p.sys;
  internal::PrintRank(sys, out);
  NoiseSource noise(*o.common.seed, 0);
  auto release = p.mechanism->Release(*p.histogram, noise);
  if (!release.ok()) {
    return internal::Fail(err, kExitMechanism, release.status());
  }
  Eigen::VectorXd values = release->values;
  if (o.clip_negative) {
    err << "WARNING: UNBIASEDNESS-VOID: negative values are clipped to 0. "
           "The clipped release is biased and no longer satisfies the "
           "invariants.\n";
    values = values.cwiseMax(0.0);
  }
  const std::string csv = FormatCsv(SanitizedTable(p.data, values));
  if (auto s = WriteTextFile(o.out_csv, csv); !s.ok()) {
    return internal::Fail(err, kExitUsage, s);
  }
  const Eigen::VectorXd& x = p.data.counts;
  const double in_memory = internal::InvariantDeviation(sys, values, x);
  auto reread = internal::ValuesFromSanitizedCsv(p.data, csv);
  if (!reread.ok()) return internal::Fail(err, kExitMechanism, reread.status());
  const bool bit_exact =
      std::memcmp(reread->data(), values.data(),
                  sizeof(double) * static_cast<std::size_t>(values.size())) == 0;
  const double from_csv = internal::InvariantDeviation(sys, *reread, x);
  const bool holds = in_memory <= release->invariant_tolerance;
  out << absl::StrFormat(
      "invariant check: max |C(y - x)| = %.3g (tolerance %.3g) %s; csv "
      "round-trip %s (%.3g)\n",
      in_memory, release->invariant_tolerance, holds ? "PASS" : "FAIL",
      bit_exact && from_csv == in_memory ? "identical" : "DIFFERS", from_csv);

  Json j = ReleaseToJson(*release);
  if (o.clip_negative) j["values"] = VectorToJson(values);
  j["clipped"] = o.clip_negative;
  j["constraint_rank"] = sys.rank();
  j["invariant_max_deviation"] = in_memory;
  j["invariant_tolerance"] = release->invariant_tolerance;
  j["noise_scale"] = p.mechanism->noise_scale();
  j["sensitivity"] = p.mechanism->sensitivity();
  const std::string report =
      o.report_json.empty() ? o.out_csv + ".release.json" : o.report_json;
  if (auto s = WriteTextFile(report, j.dump(2) + "\n"); !s.ok()) {
    return internal::Fail(err, kExitUsage, s);
  }
  out << "wrote " << o.out_csv << " and " << report << "\n";
  return kExitOk;
}

inline int RunAuditCommand(const AuditCliOptions& o, std::ostream& out,
                           std::ostream& err) {
  if (o.check != "mse" && o.check != "bias" && o.check != "ratio") {
    return internal::Fail(err, kExitUsage,
                          "--check must be mse, bias or ratio");
  }
  if (o.repetitions < 1 || o.runs < 1) {
    return internal::Fail(err, kExitUsage,
                          "--repetitions and --runs must be positive");
  }
  internal::Prepared p;
  if (int code = internal::Prepare(o.common, err, &p); code != kExitOk) {
    return code;
  }
  const std::uint64_t seed = *o.common.seed;
  const AdditiveMechanism& mech = *p.mechanism;
  const InvariantSystem& sys = *p.sys;
  internal::PrintRank(sys, out);
  AuditReport report;
  bool verdict = false;

  if (o.check == "mse") {
    auto r = RunMomentAudit(mech, *p.histogram, o.repetitions, seed);
    if (!r.ok()) return internal::Fail(err, kExitMechanism, r.status());
    report = *std::move(r);
    verdict = report.passed();
    out << absl::StrFormat(
        "mse: empirical %.6g analytic %.6g ratio %.4f (+/-%.0f%%) %s\n",
        report.empirical_mse, report.analytic_mse, report.mse_ratio,
        100 * report.thresholds.mse_relative_tolerance,
        report.mse_passed ? "PASS" : "FAIL");
    out << absl::StrFormat("mean: max |z| %.3f (limit %.1f) %s\n",
                           report.max_mean_z,
                           report.thresholds.mean_guard_sigmas,
                           report.mean_passed ? "PASS" : "FAIL");
    if (report.covariance_max_z.has_value()) {
      out << absl::StrFormat("covariance: max |z| %.3f %s\n",
                             *report.covariance_max_z,
                             report.covariance_passed ? "PASS" : "FAIL");
    }
    for (const DirectionKs& d : report.ks) {
      out << absl::StrFormat("ks: direction %d D=%.5f p=%.4g\n", d.coordinate,
                             d.ks.statistic, d.ks.p_value);
    }
    out << absl::StrFormat("invariant: max deviation %.3g, %d failures %s\n",
                           report.invariant_max_deviation,
                           report.invariant_failures,
                           report.invariant_passed ? "PASS" : "FAIL");
  } else if (o.check == "bias") {
    AuditOptions options;
    options.record_runs = o.runs;
    auto r = RunMomentAudit(mech, *p.histogram, o.runs, seed, options);
    if (!r.ok()) return internal::Fail(err, kExitMechanism, r.status());
    report = *std::move(r);
    const Eigen::VectorXd& x = p.data.counts;
    // Groups of cells; a single group without --bias-group.
    std::vector<std::vector<int>> groups(1);
    std::vector<std::string> group_names = {"all"};
    if (!o.bias_group.empty()) {
      const auto axis = p.data.shape->AxisIndex(o.bias_group);
      if (!axis.has_value()) {
        return internal::Fail(err, kExitUsage,
                              "--bias-group names unknown key '" +
                                  o.bias_group + "'");
      }
      groups.assign(p.data.levels[*axis].size(), {});
      group_names = p.data.levels[*axis];
      for (int c = 0; c < p.data.num_cells(); ++c) {
        groups[p.data.shape->Unflatten(c)[*axis]].push_back(c);
      }
    } else {
      for (int c = 0; c < p.data.num_cells(); ++c) groups[0].push_back(c);
    }
    std::vector<RegressionFit> fits;
    int skipped_units = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      std::vector<int> units;
      for (int c : groups[g]) {
        if (x(c) > 0.0) {
          units.push_back(c);
        } else {
          ++skipped_units;
        }
      }
      Eigen::VectorXd truth(units.size());
      Eigen::MatrixXd errors(units.size(), o.runs);
      for (std::size_t u = 0; u < units.size(); ++u) {
        truth(u) = x(units[u]);
        errors.row(u) = report.recorded_errors.row(units[u]);
      }
      auto fit = BiasRegression(truth, errors, report.thresholds.bias_alpha);
      if (!fit.ok()) {
        return internal::Fail(err, kExitMechanism,
                              absl::StrCat("group ", group_names[g], ": ",
                                           fit.status().message()));
      }
      out << absl::StrFormat(
          "bias[%s]: slope %.4g CI [%.4g, %.4g] p=%.4g units=%d\n",
          group_names[g], fit->slope, fit->ci_low, fit->ci_high, fit->p_value,
          fit->units);
      fits.push_back(*fit);
    }
    if (skipped_units > 0) {
      err << "note: " << skipped_units
          << " cells with zero count left out of the regression\n";
    }
    if (fits.size() == 1) {
      report.bias = fits[0];
      verdict = fits[0].ci_contains_zero();
      out << "bias: slope CI " << (verdict ? "contains" : "excludes")
          << " 0 " << (verdict ? "PASS" : "FAIL") << "\n";
    } else {
      report.bias_batch =
          SummarizeBiasBatch(fits, report.thresholds.bias_alpha);
      const BiasBatchSummary& b = *report.bias_batch;
      verdict = b.consistent;
      out << absl::StrFormat(
          "bias batch: %d/%d significant negative slopes, binomial p=%.4g "
          "(nominal rate %.4g) %s\n",
          b.significant_negative, b.regressions, b.binomial_p_value,
          b.nominal_rate, verdict ? "PASS" : "FAIL");
    }
    if (!o.errors_csv.empty()) {
      auto s = WriteTextFile(o.errors_csv,
                             ErrorsCsv(p.data.CellLabels(), x,
                                       report.recorded_errors));
      if (!s.ok()) return internal::Fail(err, kExitUsage, s);
    }
  } else {
    const int n = p.data.num_cells();
    int from = 0;
    while (from < n && p.data.counts(from) < 1.0) ++from;
    if (o.neighbor_from.has_value()) from = *o.neighbor_from;
    const int to = o.neighbor_to.value_or((from + 1) % std::max(n, 1));
    if (n < 2 || from < 0 || from >= n || to < 0 || to >= n || to == from ||
        p.data.counts(from) < 1.0) {
      return internal::Fail(err, kExitUsage,
                            "ratio probe needs two distinct cells and a "
                            "non-empty source cell");
    }
    Eigen::VectorXd neighbour = p.data.counts;
    neighbour(from) -= 1.0;
    neighbour(to) += 1.0;
    auto h2 = Histogram::Create(neighbour);
    if (!h2.ok()) return internal::Fail(err, kExitUsage, h2.status());
    auto probe = RatioProbe(mech, *p.histogram, *h2, o.repetitions, seed);
    if (!probe.ok()) return internal::Fail(err, kExitMechanism, probe.status());
    report.mechanism_id = mech.id();
    report.repetitions = o.repetitions;
    report.seed = seed;
    report.n = sys.n();
    report.null_dim = sys.null_dim();
    report.ratio = *probe;
    verdict = probe->passed;
    out << absl::StrFormat(
        "ratio: max |log ratio| %.4f, max excess over slack %.4f "
        "(epsilon %.4g), %d/%d bins used %s\n",
        probe->max_log_ratio, probe->max_excess, probe->epsilon,
        probe->bins_used, probe->bins, verdict ? "PASS" : "FAIL");
  }

  if (!o.report_json.empty()) {
    Json j = AuditReportToJson(report);
    j["check"] = o.check;
    j["verdict"] = verdict;
    if (auto s = WriteTextFile(o.report_json, j.dump(2) + "\n"); !s.ok()) {
      return internal::Fail(err, kExitUsage, s);
    }
  }
  out << "audit " << o.check << ": " << (verdict ? "PASS" : "FAIL") << "\n";
  return verdict ? kExitOk : kExitCheckFailed;
}

inline int RunDistributedCommand(const DistributedOptions& o,
                                 std::ostream& out, std::ostream& err) {
  internal::Prepared p;
  if (int code = internal::Prepare(o.common, err, &p); code != kExitOk) {
    return code;
  }
  const std::uint64_t seed = *o.common.seed;
  auto partition = Partition::Equal(p.data.num_cells(), o.agents);
  if (!partition.ok()) return internal::Fail(err, kExitUsage, partition.status());
  std::map<std::uint64_t, std::uint64_t> overrides;
  if (!o.inject_seed_fault.empty()) {
    auto agent = internal::ParseFaultAgent(o.inject_seed_fault);
    if (!agent.ok()) return internal::Fail(err, kExitUsage, agent.status());
    if (*agent >= o.agents) {
      return internal::Fail(err, kExitUsage, "fault agent out of range");
    }
    overrides[*agent] = seed ^ 0x9E3779B97F4A7C15ULL;
    out << "injecting seed fault at agent " << *agent << "\n";
  }
  const Eigen::VectorXd& x = p.data.counts;
  NoiseSource central_noise(seed, 0);
  auto central = p.mechanism->Release(*p.histogram, central_noise);
  if (!central.ok()) return internal::Fail(err, kExitMechanism, central.status());
  auto dist = RunDistributed(*p.mechanism, x, seed, *partition, overrides);
  if (!dist.ok()) return internal::Fail(err, kExitMechanism, dist.status());

  // Ship every report through the wire format.
  std::vector<AgentReport> received;
  for (const AgentReport& r : dist->reports) {
    auto decoded = DecodeAgentReport(EncodeAgentReport(r), *partition);
    if (!decoded.ok()) return internal::Fail(err, kExitMechanism, decoded.status());
    received.push_back(*std::move(decoded));
  }
  auto audit = VerifyAggregate(received, *p.sys, x, seed);
  if (!audit.ok()) return internal::Fail(err, kExitMechanism, audit.status());

  const std::uint64_t expected = SeedDigest(seed);
  Json agents = Json::array();
  for (const AgentReport& r : received) {
    const bool ok = r.seed_digest == expected;
    out << absl::StrFormat("agent %d cells [%d, %d) seed digest %s %s\n",
                           r.agent_id, r.block.begin, r.block.end,
                           internal::Hex(r.seed_digest), ok ? "ok" : "BAD");
    agents.push_back({{"agent_id", r.agent_id},
                      {"begin", r.block.begin},
                      {"end", r.block.end},
                      {"seed_digest", internal::Hex(r.seed_digest)},
                      {"values", VectorToJson(r.y_block)}});
  }
  const bool bit_exact =
      audit->values.size() == central->values.size() &&
      std::memcmp(audit->values.data(), central->values.data(),
                  sizeof(double) * static_cast<std::size_t>(x.size())) == 0;
  const std::uint64_t central_digest = VectorDigest(central->values);
  const std::uint64_t aggregate_digest = VectorDigest(audit->values);
  out << "centralized digest " << internal::Hex(central_digest)
      << ", aggregate digest " << internal::Hex(aggregate_digest) << "\n";
  out << absl::StrFormat("aggregate invariant deviation %.3g (tolerance %.3g)\n",
                         audit->max_deviation, audit->tolerance);
  const bool match = bit_exact && audit->passed;

  if (!o.out_csv.empty()) {
    auto s = WriteTextFile(o.out_csv,
                           FormatCsv(SanitizedTable(p.data, audit->values)));
    if (!s.ok()) return internal::Fail(err, kExitUsage, s);
  }
  if (!o.report_json.empty()) {
    Json j;
    j["seed"] = seed;
    j["expected_seed_digest"] = internal::Hex(expected);
    j["agents"] = std::move(agents);
    j["centralized_digest"] = internal::Hex(central_digest);
    j["aggregate_digest"] = internal::Hex(aggregate_digest);
    j["bit_exact"] = bit_exact;
    j["digests_consistent"] = audit->digests_consistent;
    j["invariant_max_deviation"] = audit->max_deviation;
    j["match"] = match;
    if (auto s = WriteTextFile(o.report_json, j.dump(2) + "\n"); !s.ok()) {
      return internal::Fail(err, kExitUsage, s);
    }
  }
  out << (match ? "MATCH" : "MISMATCH") << "\n";
  return match ? kExitOk : kExitMismatch;
}

inline int RunSynthCommand(const SynthOptions& o, std::ostream& out,
                           std::ostream& err) {
  if (!o.seed.has_value()) {
    return internal::Fail(err, kExitUsage, "--seed is required");
  }
  if (o.out_csv.empty()) return internal::Fail(err, kExitUsage, "--out is required");
  CsvTable table;
  if (o.kind == "census") {
    if (o.states < 1) return internal::Fail(err, kExitUsage, "--states must be >= 1");
    const CensusFixture f = SyntheticCensus(*o.seed, o.states);
    table.header = {"state", "county", "population"};
    for (int s = 0; s < f.num_states(); ++s) {
      for (int c = 0; c < f.counties_in(s); ++c) {
        // County labels restart in each state so (state, county) densifies
        // to states x max-counties cells.
        table.rows.push_back({f.state_names[s], absl::StrFormat("C%03d", c),
                              FormatDouble(f.population(f.state_offsets[s] + c))});
      }
    }
  } else if (o.kind == "campus") {
    const CampusFixture f = SyntheticCampus(*o.seed);
    table.header = {"group", "hour", "building", "count"};
    for (Eigen::Index i = 0; i < f.counts.size(); ++i) {
      const std::vector<int> idx = f.shape.Unflatten(i);
      table.rows.push_back({absl::StrFormat("G%02d", idx[0]),
                            absl::StrFormat("H%02d", idx[1]),
                            absl::StrFormat("B%02d", idx[2]),
                            FormatDouble(f.counts(i))});
    }
  } else {
    return internal::Fail(err, kExitUsage, "--kind must be census or campus");
  }
  if (auto s = WriteTextFile(o.out_csv, FormatCsv(table)); !s.ok()) {
    return internal::Fail(err, kExitUsage, s);
  }
  out << "wrote " << table.rows.size() << " rows to " << o.out_csv << "\n";
  return kExitOk;
}

// Desk-scale versions of the two demonstrations: a 48-state census bias
// batch and the campus person-hours table.
inline int RunReproduceCommand(const ReproduceOptions& o, std::ostream& out,
                               std::ostream& err) {
  if (!o.seed.has_value()) {
    return internal::Fail(err, kExitUsage, "--seed is required");
  }
  const std::uint64_t seed = *o.seed;
  if (o.which == "census") {
    const int runs = o.runs > 0 ? o.runs : 10;
    const CensusFixture f = SyntheticCensus(seed);
    const PrivacyBudget budget = PrivacyBudget::Pure(0.192);
    std::vector<RegressionFit> fits;
    for (int s = 0; s < f.num_states(); ++s) {
      const int m = f.counties_in(s);
      auto sys = BuildInvariantSystem(Eigen::RowVectorXd::Ones(m));
      if (!sys.ok()) return internal::Fail(err, kExitMechanism, sys.status());
      auto mech = AdditiveMechanism::Plan(
          MechanismId::kProjectedLaplace, LinearQuery::Identity(m),
          std::make_shared<const InvariantSystem>(*std::move(sys)), budget);
      if (!mech.ok()) return internal::Fail(err, kExitMechanism, mech.status());
      const Eigen::VectorXd truth = f.StatePopulation(s);
      Eigen::MatrixXd errors(m, runs);
      for (int r = 0; r < runs; ++r) {
        NoiseSource noise(seed, static_cast<std::uint64_t>(s) * runs + r + 1);
        auto release = mech->ReleaseAnswer(truth, noise);
        if (!release.ok()) {
          return internal::Fail(err, kExitMechanism, release.status());
        }
        errors.col(r) = release->values - truth;
      }
      auto fit = BiasRegression(truth, errors);
      if (!fit.ok()) return internal::Fail(err, kExitMechanism, fit.status());
      out << absl::StrFormat("%s counties=%d slope=%.4g p=%.4g\n",
                             f.state_names[s], m, fit->slope, fit->p_value);
      fits.push_back(*fit);
    }
    const BiasBatchSummary b = SummarizeBiasBatch(fits, 0.01);
    out << absl::StrFormat(
        "significant negative slopes: %d of %d (binomial p=%.4g vs nominal "
        "%.4g) %s\n",
        b.significant_negative, b.regressions, b.binomial_p_value,
        b.nominal_rate, b.consistent ? "PASS" : "FAIL");
    return b.consistent ? kExitOk : kExitCheckFailed;
  }
  if (o.which == "campus") {
    const int runs = o.runs > 0 ? o.runs : 50;
    const CampusFixture f = SyntheticCampus(seed);
    auto sys = BuildMarginalInvariants(f.shape, f.specs);
    if (!sys.ok()) return internal::Fail(err, kExitMechanism, sys.status());
    auto shared = std::make_shared<const InvariantSystem>(*std::move(sys));
    internal::PrintRank(*shared, out);
    // c(eps, delta) = 1 at eps = 3, delta = e^-3; with sensitivity 1 the
    // per-coordinate scale is exactly 1.
    auto budget = PrivacyBudget::Create(3.0, std::exp(-3.0));
    if (!budget.ok()) return internal::Fail(err, kExitMechanism, budget.status());
    const int n = shared->n();
    auto mech = AdditiveMechanism::Plan(
        MechanismId::kProjectedGaussian,
        LinearQuery::Identity(n).WithDeclaredSensitivity(SensitivityNorm::kL2,
                                                         1.0),
        shared, *budget);
    if (!mech.ok()) return internal::Fail(err, kExitMechanism, mech.status());
    Eigen::VectorXd analytic = shared->proj_null_diagonal().cwiseSqrt();
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(n);
    for (int r = 0; r < runs; ++r) {
      NoiseSource noise(seed, static_cast<std::uint64_t>(r) + 1);
      auto release = mech->ReleaseAnswer(f.counts, noise);
      if (!release.ok()) return internal::Fail(err, kExitMechanism, release.status());
      sum_sq += (release->values - f.counts).cwiseAbs2();
    }
    Eigen::VectorXd empirical = (sum_sq / runs).cwiseSqrt();
    auto quantile = [](Eigen::VectorXd v, double q) {
      std::sort(v.data(), v.data() + v.size());
      const double pos = q * (v.size() - 1);
      const Eigen::Index lo = static_cast<Eigen::Index>(std::floor(pos));
      const Eigen::Index hi = std::min<Eigen::Index>(lo + 1, v.size() - 1);
      return v(lo) + (pos - lo) * (v(hi) - v(lo));
    };
    out << absl::StrFormat(
        "noise scale %.6g; median elementwise std: analytic %.4f, empirical "
        "%.4f over %d runs (empirical 5%%/95%% quantiles %.4f, %.4f)\n",
        mech->noise_scale(), quantile(analytic, 0.5), quantile(empirical, 0.5),
        runs, quantile(empirical, 0.05), quantile(empirical, 0.95));
    return kExitOk;
  }
  return internal::Fail(err, kExitUsage, "reproduce target must be census or campus");
}

inline int RunRegressCommand(const RegressOptions& o, std::ostream& out,
                             std::ostream& err) {
  if (o.released_columns.empty()) {
    return internal::Fail(err, kExitUsage,
                          "at least one --released-column is required");
  }
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) {
    return internal::Fail(err, kExitUsage, "--alpha must be in (0, 1)");
  }
  auto table_or = ReadCsvFile(o.input_csv);
  if (!table_or.ok()) return internal::Fail(err, kExitUsage, table_or.status());
  const CsvTable table = *std::move(table_or);
  auto column = [&](const std::string& name) -> std::optional<int> {
    return table.ColumnIndex(name);
  };
  const auto true_index = column(o.true_column);
  if (!true_index.has_value()) {
    return internal::Fail(err, kExitUsage,
                          "no column '" + o.true_column + "'");
  }
  std::vector<int> released_index;
  for (const std::string& name : o.released_columns) {
    const auto idx = column(name);
    if (!idx.has_value()) {
      return internal::Fail(err, kExitUsage, "no column '" + name + "'");
    }
    released_index.push_back(*idx);
  }
  std::optional<int> group_index;
  if (!o.group_column.empty()) {
    group_index = column(o.group_column);
    if (!group_index.has_value()) {
      return internal::Fail(err, kExitUsage,
                            "no column '" + o.group_column + "'");
    }
  }

  // Group name -> row indices, in first-appearance order.
  std::vector<std::string> group_names;
  std::map<std::string, int> group_of;
  std::vector<std::vector<int>> groups;
  const int runs = static_cast<int>(released_index.size());
  Eigen::VectorXd truth(table.rows.size());
  Eigen::MatrixXd errors(table.rows.size(), runs);
  int skipped = 0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::vector<std::string>& row = table.rows[r];
    auto number = [&](int idx, double* value) {
      return absl::SimpleAtod(row[idx], value) && std::isfinite(*value);
    };
    double t = 0.0;
    if (!number(*true_index, &t)) {
      return internal::Fail(err, kExitUsage,
                            absl::StrCat("row ", r + 2, ": column '",
                                         o.true_column, "' is not numeric"));
    }
    truth(r) = t;
    for (int k = 0; k < runs; ++k) {
      double y = 0.0;
      if (!number(released_index[k], &y)) {
        return internal::Fail(
            err, kExitUsage,
            absl::StrCat("row ", r + 2, ": column '", o.released_columns[k],
                         "' is not numeric"));
      }
      errors(r, k) = y - t;
    }
    if (t <= 0.0) {  // regressor is log(true)
      ++skipped;
      continue;
    }
    const std::string g = group_index.has_value() ? row[*group_index] : "all";
    auto [it, inserted] =
        group_of.emplace(g, static_cast<int>(group_names.size()));
    if (inserted) {
      group_names.push_back(g);
      groups.emplace_back();
    }
    groups[it->second].push_back(static_cast<int>(r));
  }
  if (skipped > 0) {
    err << "note: " << skipped
        << " rows with non-positive true value left out of the regression\n";
  }
  if (groups.empty()) {
    return internal::Fail(err, kExitUsage, "no rows with positive true value");
  }

  std::vector<RegressionFit> fits;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    Eigen::VectorXd t(groups[g].size());
    Eigen::MatrixXd e(groups[g].size(), runs);
    for (std::size_t u = 0; u < groups[g].size(); ++u) {
      t(u) = truth(groups[g][u]);
      e.row(u) = errors.row(groups[g][u]);
    }
    auto fit = BiasRegression(t, e, o.alpha);
    if (!fit.ok()) {
      return internal::Fail(err, kExitMechanism,
                            absl::StrCat("group ", group_names[g], ": ",
                                         fit.status().message()));
    }
    out << absl::StrFormat(
        "bias[%s]: slope %.4g CI [%.4g, %.4g] p=%.4g units=%d\n",
        group_names[g], fit->slope, fit->ci_low, fit->ci_high, fit->p_value,
        fit->units);
    fits.push_back(*fit);
  }

  Json j;
  j["input"] = o.input_csv;
  j["runs"] = runs;
  j["skipped_rows"] = skipped;
  Json per_group = Json::array();
  for (std::size_t g = 0; g < fits.size(); ++g) {
    Json f = RegressionToJson(fits[g]);
    f["group"] = group_names[g];
    per_group.push_back(std::move(f));
  }
  j["regressions"] = std::move(per_group);
  bool verdict = false;
  if (fits.size() == 1) {
    verdict = fits[0].ci_contains_zero();
    out << "bias: slope CI " << (verdict ? "contains" : "excludes") << " 0 "
        << (verdict ? "PASS" : "FAIL") << "\n";
  } else {
    const BiasBatchSummary b = SummarizeBiasBatch(fits, o.alpha);
    verdict = b.consistent;
    j["significant_negative"] = b.significant_negative;
    j["nominal_rate"] = b.nominal_rate;
    j["binomial_p_value"] = b.binomial_p_value;
    out << absl::StrFormat(
        "bias batch: %d/%d significant negative slopes, binomial p=%.4g "
        "(nominal rate %.4g) %s\n",
        b.significant_negative, b.regressions, b.binomial_p_value,
        b.nominal_rate, verdict ? "PASS" : "FAIL");
  }
  j["verdict"] = verdict;
  if (!o.report_json.empty()) {
    if (auto s = WriteTextFile(o.report_json, j.dump(2) + "\n"); !s.ok()) {
      return internal::Fail(err, kExitUsage, s);
    }
  }
  return verdict ? kExitOk : kExitCheckFailed;
}

}  // namespace subspace_dp::cli

#endif  // SUBSPACE_DP_CLI_COMMANDS_H_
