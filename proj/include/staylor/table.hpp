/*
 * Copyright 2026 The staylor Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "staylor/error.hpp"

namespace staylor {

// One table cell: a finite real number, or missing. Missing is a dedicated
// state so it can never leak into statistics as a sentinel value.
using Cell = std::optional<double>;

inline bool is_missing(const Cell& c) { return !c.has_value(); }

// A model is any deterministic function of a K-cell instance.
using ModelFn = std::function<double(std::span<const Cell>)>;

struct ColumnStats {
  double mean = 0.0;
  double stddev = 0.0;  // population (divide-by-N) standard deviation
  std::size_t missing = 0;
};

namespace detail {

// Canonical decimal rendering: the shortest string that parses back to the
// same double. All emitted artifacts use this, which is what makes CSV
// round-trips lossless and outputs byte-deterministic.
inline std::string render_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// Parses a full token as a finite double. Returns nullopt on any leftover
// characters, empty token, or non-finite value.
inline std::optional<double> parse_double(std::string_view token) {
  if (token.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

inline void split_line(std::string_view line, std::vector<std::string_view>* out) {
  out->clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out->push_back(line.substr(start));
      return;
    }
    out->push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

}  // namespace detail

// Immutable N x K table of cells with a named schema. Safe for concurrent
// reads once constructed.
class FeatureTable {
 public:
  FeatureTable(std::vector<std::string> names, std::vector<Cell> cells_row_major)
      : names_(std::move(names)), cells_(std::move(cells_row_major)) {
    validate_schema();
    if (cells_.empty() || cells_.size() % names_.size() != 0) {
      throw SchemaError("cell count is not a positive multiple of the column count");
    }
    num_rows_ = cells_.size() / names_.size();
  }

  static FeatureTable from_rows(std::vector<std::string> names,
                                const std::vector<std::vector<Cell>>& rows) {
    std::vector<Cell> flat;
    flat.reserve(rows.size() * (rows.empty() ? 0 : rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != names.size()) {
        throw SchemaError("row " + std::to_string(r + 1) + ": expected " +
                          std::to_string(names.size()) + " cells, got " +
                          std::to_string(rows[r].size()));
      }
      flat.insert(flat.end(), rows[r].begin(), rows[r].end());
    }
    return FeatureTable(std::move(names), std::move(flat));
  }

  // CSV: UTF-8, comma separated, first line is the header, `NA` is missing.
  static FeatureTable parse_csv(std::istream& in) {
    std::string line;
    std::vector<std::string> names;
    std::vector<Cell> cells;
    std::vector<std::string_view> tokens;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
      ++line_number;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      detail::split_line(line, &tokens);
      if (line_number == 1) {
        for (const auto& t : tokens) names.emplace_back(t);
        continue;
      }
      if (tokens.size() != names.size()) {
        throw SchemaError("line " + std::to_string(line_number) + ": expected " +
                          std::to_string(names.size()) + " cells, got " +
                          std::to_string(tokens.size()));
      }
      for (std::size_t c = 0; c < tokens.size(); ++c) {
        if (tokens[c] == "NA") {
          cells.push_back(std::nullopt);
          continue;
        }
        const auto value = detail::parse_double(tokens[c]);
        if (!value) {
          throw ParseError("row " + std::to_string(line_number - 1) + ", column '" +
                           names[c] + "': cannot parse '" + std::string(tokens[c]) + "'");
        }
        cells.push_back(*value);
      }
    }
    if (line_number == 0) throw SchemaError("empty input: no header line");
    if (cells.empty()) throw SchemaError("no data rows after the header");
    return FeatureTable(std::move(names), std::move(cells));
  }

  static FeatureTable load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return parse_csv(in);
  }

  void write_csv(std::ostream& out) const {
    for (std::size_t c = 0; c < names_.size(); ++c) {
      if (c > 0) out << ',';
      out << names_[c];
    }
    out << '\n';
    for (std::size_t r = 0; r < num_rows_; ++r) {
      for (std::size_t c = 0; c < names_.size(); ++c) {
        if (c > 0) out << ',';
        const Cell& cell = cells_[r * names_.size() + c];
        if (cell) {
          out << detail::render_double(*cell);
        } else {
          out << "NA";
        }
      }
      out << '\n';
    }
  }

  void save_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path + "'");
    write_csv(out);
  }

  std::size_t num_rows() const { return num_rows_; }
  std::size_t num_features() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  std::span<const Cell> row(std::size_t r) const {
    return std::span<const Cell>(cells_.data() + r * names_.size(), names_.size());
  }

  const Cell& cell(std::size_t r, std::size_t c) const {
    return cells_[r * names_.size() + c];
  }

  std::size_t feature_index(std::string_view name) const {
    for (std::size_t c = 0; c < names_.size(); ++c) {
      if (names_[c] == name) return c;
    }
    throw SchemaError("unknown feature '" + std::string(name) + "'");
  }

  // Mean, population standard deviation, and missing count over the
  // non-missing cells of one column.
  ColumnStats column_stats(std::size_t col) const {
    if (col >= names_.size()) throw DomainError("column index out of range");
    ColumnStats stats;
    std::size_t n = 0;
    double sum = 0.0;
    for (std::size_t r = 0; r < num_rows_; ++r) {
      const Cell& c = cell(r, col);
      if (!c) {
        ++stats.missing;
        continue;
      }
      sum += *c;
      ++n;
    }
    if (n == 0) {
      throw EmptyColumnError("column '" + names_[col] + "' has no observed values");
    }
    stats.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < num_rows_; ++r) {
      const Cell& c = cell(r, col);
      if (!c) continue;
      const double d = *c - stats.mean;
      ss += d * d;
    }
    stats.stddev = std::sqrt(ss / static_cast<double>(n));
    return stats;
  }

 private:
  void validate_schema() const {
    if (names_.empty()) throw SchemaError("a table needs at least one column");
    std::unordered_set<std::string_view> seen;
    for (const auto& name : names_) {
      if (name.empty()) throw SchemaError("empty feature name");
      if (!seen.insert(name).second) {
        throw SchemaError("duplicate feature name '" + name + "'");
      }
    }
  }

  std::vector<std::string> names_;
  std::vector<Cell> cells_;
  std::size_t num_rows_ = 0;
};

}  // namespace staylor
