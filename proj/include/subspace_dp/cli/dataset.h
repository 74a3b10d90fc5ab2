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


// Count tables read from CSV: key columns become table axes, the value
// column becomes the histogram. Missing key combinations are filled with
// explicit zeros; levels keep first-appearance order.

#ifndef SUBSPACE_DP_CLI_DATASET_H_
#define SUBSPACE_DP_CLI_DATASET_H_

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "Eigen/Dense"
#include "absl/strings/numbers.h"
#include "absl/strings/str_join.h"
#include "subspace_dp/cli/csv.h"
#include "subspace_dp/query_model.h"
#include "subspace_dp/status.h"

namespace subspace_dp::cli {

inline constexpr std::int64_t kMaxDenseCells = 20'000'000;

struct DatasetSpec {
  std::string csv_path;
  std::vector<std::string> key_columns;
  std::string value_column;
};

struct Dataset {
  CsvTable table;
  std::vector<int> key_indices;
  int value_index = 0;
  // levels[a] lists the distinct values of key a.
  std::vector<std::vector<std::string>> levels;
  // Always set by LoadDataset.
  std::optional<TableShape> shape;
  Eigen::VectorXd counts;
  // Cell of every input row, in row order.
  std::vector<std::int64_t> row_cell;

  int num_cells() const { return static_cast<int>(counts.size()); }

  std::vector<std::string> CellKeys(std::int64_t cell) const {
    const std::vector<int> index = shape->Unflatten(cell);
    std::vector<std::string> out;
    for (std::size_t a = 0; a < index.size(); ++a) {
      out.push_back(levels[a][index[a]]);
    }
    return out;
  }

  std::vector<std::string> CellLabels() const {
    std::vector<std::string> out;
    out.reserve(counts.size());
    for (Eigen::Index c = 0; c < counts.size(); ++c) {
      out.push_back(absl::StrJoin(CellKeys(c), "|"));
    }
    return out;
  }
};

inline absl::StatusOr<Dataset> LoadDataset(CsvTable table,
                                           const std::vector<std::string>& keys,
                                           const std::string& value_column) {
  if (keys.empty()) {
    return MakeError(ErrorKind::kInvalidArgument, "need at least one key column");
  }
  Dataset data;
  const auto value_index = table.ColumnIndex(value_column);
  if (!value_index.has_value()) {
    return MakeError(ErrorKind::kInvalidArgument, "value column '",
                     value_column, "' not found in CSV header");
  }
  data.value_index = *value_index;
  for (const std::string& key : keys) {
    const auto index = table.ColumnIndex(key);
    if (!index.has_value()) {
      return MakeError(ErrorKind::kInvalidArgument, "key column '", key,
                       "' not found in CSV header");
    }
    if (*index == data.value_index) {
      return MakeError(ErrorKind::kInvalidArgument, "column '", key,
                       "' is both a key and the value");
    }
    for (int seen : data.key_indices) {
      if (seen == *index) {
        return MakeError(ErrorKind::kInvalidArgument, "key column '", key,
                         "' listed twice");
      }
    }
    data.key_indices.push_back(*index);
  }
  if (table.rows.empty()) {
    return MakeError(ErrorKind::kInvalidArgument, "CSV has no data rows");
  }

  const std::size_t num_keys = keys.size();
  std::vector<std::map<std::string, int>> level_ids(num_keys);
  data.levels.resize(num_keys);
  std::vector<std::vector<int>> row_index;
  std::vector<double> row_value;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::vector<int> index(num_keys);
    for (std::size_t a = 0; a < num_keys; ++a) {
      const std::string& level = row[data.key_indices[a]];
      auto [it, inserted] = level_ids[a].emplace(
          level, static_cast<int>(data.levels[a].size()));
      if (inserted) data.levels[a].push_back(level);
      index[a] = it->second;
    }
    double value = 0.0;
    if (!absl::SimpleAtod(row[data.value_index], &value) ||
        !std::isfinite(value)) {
      return MakeError(ErrorKind::kInvalidArgument, "row ", r + 1, ": column '",
                       value_column, "' value '", row[data.value_index],
                       "' is not a finite number");
    }
    if (value < 0.0) {
      return MakeError(ErrorKind::kInvalidArgument, "row ", r + 1, ": column '",
                       value_column, "' is negative");
    }
    row_index.push_back(std::move(index));
    row_value.push_back(value);
  }

  std::vector<int> dims;
  std::int64_t cells = 1;
  for (const auto& lv : data.levels) {
    dims.push_back(static_cast<int>(lv.size()));
    cells *= static_cast<std::int64_t>(lv.size());
    if (cells > kMaxDenseCells) {
      return MakeError(ErrorKind::kInvalidArgument,
                       "key cross-product exceeds ", kMaxDenseCells, " cells");
    }
  }
  SUBSPACE_DP_ASSIGN_OR_RETURN(data.shape, TableShape::Create(dims, keys));
  data.counts = Eigen::VectorXd::Zero(cells);
  std::vector<char> filled(static_cast<std::size_t>(cells), 0);
  for (std::size_t r = 0; r < row_index.size(); ++r) {
    const std::int64_t cell = data.shape->Flatten(row_index[r]);
    if (filled[cell]) {
      return MakeError(ErrorKind::kInvalidArgument, "row ", r + 1,
                       ": duplicate key combination (",
                       absl::StrJoin(data.CellKeys(cell), ","), ")");
    }
    filled[cell] = 1;
    data.counts(cell) = row_value[r];
    data.row_cell.push_back(cell);
  }
  data.table = std::move(table);
  return data;
}

inline absl::StatusOr<Dataset> LoadDataset(const DatasetSpec& spec) {
  SUBSPACE_DP_ASSIGN_OR_RETURN(CsvTable table, ReadCsvFile(spec.csv_path));
  return LoadDataset(std::move(table), spec.key_columns, spec.value_column);
}

// Input rows with the value column replaced, followed by one row per
// densified zero cell (other columns left empty).
inline CsvTable SanitizedTable(const Dataset& data,
                               const Eigen::VectorXd& values) {
  CsvTable out;
  out.header = data.table.header;
  std::vector<char> listed(data.counts.size(), 0);
  for (std::size_t r = 0; r < data.table.rows.size(); ++r) {
    std::vector<std::string> row = data.table.rows[r];
    row[data.value_index] = FormatDouble(values(data.row_cell[r]));
    listed[data.row_cell[r]] = 1;
    out.rows.push_back(std::move(row));
  }
  for (Eigen::Index c = 0; c < data.counts.size(); ++c) {
    if (listed[c]) continue;
    std::vector<std::string> row(out.header.size());
    const std::vector<std::string> keys = data.CellKeys(c);
    for (std::size_t a = 0; a < keys.size(); ++a) {
      row[data.key_indices[a]] = keys[a];
    }
    row[data.value_index] = FormatDouble(values(c));
    out.rows.push_back(std::move(row));
  }
  return out;
}

}  // namespace subspace_dp::cli

#endif  // SUBSPACE_DP_CLI_DATASET_H_
