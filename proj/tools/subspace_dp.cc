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


// subspace_dp: release, audit and distributed runs over CSV count tables.
// See README.md for usage.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "subspace_dp/cli/commands.h"

namespace {

using ::subspace_dp::cli::AuditCliOptions;
using ::subspace_dp::cli::CommonOptions;
using ::subspace_dp::cli::DistributedOptions;
using ::subspace_dp::cli::ReleaseOptions;
using ::subspace_dp::cli::ReproduceOptions;
using ::subspace_dp::cli::SynthOptions;

struct SeedFlag {
  std::uint64_t value = 0;
  CLI::Option* option = nullptr;

  std::optional<std::uint64_t> get() const {
    if (option == nullptr || option->count() == 0) return std::nullopt;
    return value;
  }
};

void AddSeed(CLI::App* app, SeedFlag* seed) {
  seed->option = app->add_option("--seed", seed->value,
                                 "Noise seed (u64). Required.");
}

void AddCommon(CLI::App* app, CommonOptions* o, SeedFlag* seed) {
  app->add_option("--input", o->dataset.csv_path, "Input CSV with header")
      ->required();
  app->add_option("--keys", o->dataset.key_columns,
                  "Key columns, comma separated")
      ->required()
      ->delimiter(',');
  app->add_option("--value", o->dataset.value_column, "Count column")
      ->required();
  app->add_option("--invariant", o->invariants,
                  "\"exact-sum group-by a,b\" (repeatable; empty list = total)")
      ->allow_extra_args(false);
  app->add_option("--mechanism", o->mechanism,
                  "projected-gaussian, extended-gaussian, projected-laplace, "
                  "extended-laplace or correlated-gaussian")
      ->capture_default_str();
  app->add_option("--epsilon", o->epsilon, "Privacy parameter epsilon")
      ->capture_default_str();
  app->add_option("--delta", o->delta, "Privacy parameter delta")
      ->capture_default_str();
  AddSeed(app, seed);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private releases that keep linear invariants "
               "exact"};
  app.require_subcommand(1);

  ReleaseOptions release;
  SeedFlag release_seed;
  CLI::App* release_cmd = app.add_subcommand("release", "Sanitize a table");
  AddCommon(release_cmd, &release.common, &release_seed);
  release_cmd->add_option("--out", release.out_csv, "Sanitized CSV path")
      ->required();
  release_cmd->add_option("--report", release.report_json,
                          "Release JSON path (default <out>.release.json)");
  release_cmd->add_flag("--clip-negative", release.clip_negative,
                        "Clip negative values to zero (biased; breaks "
                        "invariants)");

  AuditCliOptions audit;
  SeedFlag audit_seed;
  CLI::App* audit_cmd =
      app.add_subcommand("audit", "Statistical checks of a mechanism");
  AddCommon(audit_cmd, &audit.common, &audit_seed);
  audit_cmd->add_option("--check", audit.check, "mse, bias or ratio")
      ->capture_default_str();
  audit_cmd->add_option("--repetitions", audit.repetitions,
                        "Releases for the mse and ratio checks")
      ->capture_default_str();
  audit_cmd->add_option("--runs", audit.runs, "Releases for the bias check")
      ->capture_default_str();
  audit_cmd->add_option("--report", audit.report_json, "Audit JSON path");
  audit_cmd->add_option("--errors-csv", audit.errors_csv,
                        "Per-run errors (bias check)");
  audit_cmd->add_option("--bias-group", audit.bias_group,
                        "Key column: one regression per level");
  int neighbor_from = -1;
  int neighbor_to = -1;
  CLI::Option* from_opt = audit_cmd->add_option(
      "--neighbor-from", neighbor_from, "Ratio probe: cell losing one unit");
  CLI::Option* to_opt = audit_cmd->add_option(
      "--neighbor-to", neighbor_to, "Ratio probe: cell gaining one unit");

  DistributedOptions dist;
  SeedFlag dist_seed;
  CLI::App* dist_cmd = app.add_subcommand(
      "distributed", "Simulate agents sanitizing blocks of the table");
  AddCommon(dist_cmd, &dist.common, &dist_seed);
  dist_cmd->add_option("--agents", dist.agents, "Number of agents")
      ->capture_default_str();
  dist_cmd->add_option("--inject-seed-fault", dist.inject_seed_fault,
                       "agent=K: agent K uses a wrong seed");
  dist_cmd->add_option("--out", dist.out_csv, "Aggregate sanitized CSV");
  dist_cmd->add_option("--report", dist.report_json,
                       "Per-agent and aggregate JSON");

  SynthOptions synth;
  SeedFlag synth_seed;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Write a synthetic census or campus table");
  synth_cmd->add_option("--kind", synth.kind, "census or campus")->required();
  synth_cmd->add_option("--states", synth.states, "Census states")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth.out_csv, "Output CSV")->required();
  AddSeed(synth_cmd, &synth_seed);

  ReproduceOptions repro;
  SeedFlag repro_seed;
  CLI::App* repro_cmd = app.add_subcommand(
      "reproduce", "Desk-scale census bias batch or campus error summary");
  repro_cmd->add_option("which", repro.which, "census or campus")->required();
  repro_cmd->add_option("--runs", repro.runs, "Releases per unit");
  AddSeed(repro_cmd, &repro_seed);

  subspace_dp::cli::RegressOptions regress;
  CLI::App* regress_cmd = app.add_subcommand(
      "regress", "Bias regression over a CSV of true and released values");
  regress_cmd->add_option("--input", regress.input_csv, "Paired CSV")
      ->required();
  regress_cmd->add_option("--true-column", regress.true_column,
                          "Column with true values")
      ->required();
  regress_cmd->add_option("--released-column", regress.released_columns,
                          "Released column; repeat once per run")
      ->required();
  regress_cmd->add_option("--group-column", regress.group_column,
                          "One regression per level of this column");
  regress_cmd->add_option("--alpha", regress.alpha, "Significance level")
      ->capture_default_str();
  regress_cmd->add_option("--report", regress.report_json, "Report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return subspace_dp::cli::kExitUsage;
  }

  if (*release_cmd) {
    release.common.seed = release_seed.get();
    return subspace_dp::cli::RunReleaseCommand(release, std::cout, std::cerr);
  }
  if (*audit_cmd) {
    audit.common.seed = audit_seed.get();
    if (from_opt->count() > 0) audit.neighbor_from = neighbor_from;
    if (to_opt->count() > 0) audit.neighbor_to = neighbor_to;
    return subspace_dp::cli::RunAuditCommand(audit, std::cout, std::cerr);
  }
  if (*dist_cmd) {
    dist.common.seed = dist_seed.get();
    return subspace_dp::cli::RunDistributedCommand(dist, std::cout, std::cerr);
  }
  if (*synth_cmd) {
    synth.seed = synth_seed.get();
    return subspace_dp::cli::RunSynthCommand(synth, std::cout, std::cerr);
  }
  if (*regress_cmd) {
    return subspace_dp::cli::RunRegressCommand(regress, std::cout, std::cerr);
  }
  repro.seed = repro_seed.get();
  return subspace_dp::cli::RunReproduceCommand(repro, std::cout, std::cerr);
}
