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


// Minimal RFC 4180-ish CSV: comma separated, optional double quotes with ""
// escapes, header row required. Enough for count tables.

#ifndef SUBSPACE_DP_CLI_CSV_H_
#define SUBSPACE_DP_CLI_CSV_H_

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "absl/strings/str_format.h"
#include "subspace_dp/status.h"

namespace subspace_dp::cli {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<int> ColumnIndex(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return std::nullopt;
  }
};

namespace internal {

inline absl::StatusOr<std::vector<std::string>> SplitCsvLine(
    std::string_view line, int line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  bool was_quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(ch);
      }
    } else if (ch == '"' && current.empty() && !was_quoted) {
      quoted = true;
      was_quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
      was_quoted = false;
    } else {
      current.push_back(ch);
    }
  }
  if (quoted) {
    return MakeError(ErrorKind::kInvalidArgument, "line ", line_no,
                     ": unterminated quote");
  }
  fields.push_back(std::move(current));
  return fields;
}

inline std::string QuoteField(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

}  // namespace internal

inline absl::StatusOr<CsvTable> ParseCsv(std::istream& in) {
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // UTF-8 byte order mark.
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line.empty()) continue;
    SUBSPACE_DP_ASSIGN_OR_RETURN(std::vector<std::string> fields,
                                 internal::SplitCsvLine(line, line_no));
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      return MakeError(ErrorKind::kInvalidArgument, "line ", line_no, " has ",
                       fields.size(), " fields, header has ",
                       table.header.size());
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) {
    return MakeError(ErrorKind::kInvalidArgument, "CSV has no header row");
  }
  return table;
}

inline absl::StatusOr<CsvTable> ReadCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    return MakeError(ErrorKind::kInvalidArgument, "cannot open ", path);
  }
  return ParseCsv(in);
}

inline std::string FormatCsv(const CsvTable& table) {
  std::string out;
  auto append_row = [&out](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += internal::QuoteField(row[i]);
    }
    out.push_back('\n');
  };
  append_row(table.header);
  for (const auto& row : table.rows) append_row(row);
  return out;
}

inline absl::Status WriteTextFile(const std::string& path,
                                  const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return MakeError(ErrorKind::kInvalidArgument, "cannot write ", path);
  out << text;
  out.close();
  if (!out) return MakeError(ErrorKind::kInvalidArgument, "write failed: ", path);
  return absl::OkStatus();
}

// 17 significant digits: parses back to the same double.
inline std::string FormatDouble(double v) { return absl::StrFormat("%.17g", v); }

}  // namespace subspace_dp::cli

#endif  // SUBSPACE_DP_CLI_CSV_H_
