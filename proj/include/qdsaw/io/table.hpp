// Copyright 2026 The qdsaw Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qdsaw/errors.hpp"

namespace qdsaw::io {

/// Whitespace-delimited numeric table. Lines whose first non-blank character
/// is '#' are comments; blank lines are skipped. Every data row must have
/// between min_cols and max_cols columns, and all rows the same count.
inline std::vector<std::vector<double>> parse_table(std::istream& in, std::size_t min_cols,
                                                    std::size_t max_cols) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw FormatError("line " + std::to_string(lineno) + ": not a number: '" + tok + "'");
      row.push_back(v);
    }
    if (row.size() < min_cols || row.size() > max_cols)
      throw FormatError("line " + std::to_string(lineno) + ": expected " + std::to_string(min_cols) + ".." +
                        std::to_string(max_cols) + " columns, got " + std::to_string(row.size()));
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError("line " + std::to_string(lineno) + ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError("no data rows");
  return rows;
}

inline std::vector<std::vector<double>> parse_table(const std::string& text, std::size_t min_cols,
                                                    std::size_t max_cols) {
  std::istringstream in(text);
  return parse_table(in, min_cols, max_cols);
}

inline std::vector<std::vector<double>> read_table(const std::string& path, std::size_t min_cols,
                                                   std::size_t max_cols) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  try {
    return parse_table(in, min_cols, max_cols);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace qdsaw::io
