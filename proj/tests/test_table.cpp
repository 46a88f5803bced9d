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

#include "staylor/table.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "staylor/error.hpp"
#include "staylor/rng.hpp"

namespace {

using staylor::Cell;
using staylor::FeatureTable;

FeatureTable parse(const std::string& text) {
  std::istringstream in(text);
  return FeatureTable::parse_csv(in);
}

TEST(Table, ParsesHeaderAndCells) {
  const FeatureTable t = parse("a,b\n1,2\n3.5,NA\n");
  EXPECT_EQ(t.num_rows(), 2u);
  EXPECT_EQ(t.num_features(), 2u);
  EXPECT_EQ(t.names()[0], "a");
  EXPECT_EQ(t.names()[1], "b");
  EXPECT_EQ(*t.cell(0, 0), 1.0);
  EXPECT_EQ(*t.cell(1, 0), 3.5);
  EXPECT_FALSE(t.cell(1, 1).has_value());
}

TEST(Table, HandlesCrLfAndNegativeAndExponent) {
  const FeatureTable t = parse("x\r\n-1.5e-3\r\n2\r\n");
  EXPECT_EQ(t.num_rows(), 2u);
  EXPECT_EQ(*t.cell(0, 0), -1.5e-3);
}

TEST(Table, RejectsRaggedRowWithLineNumber) {
  try {
    parse("a,b\n1,2\n3\n");
    FAIL() << "expected SchemaError";
  } catch (const staylor::SchemaError& e) {
    EXPECT_EQ(std::string(e.what()), "line 3: expected 2 cells, got 1");
  }
}

TEST(Table, RejectsBadCellWithRowAndColumn) {
  try {
    parse("a,b\n1,2\n3,oops\n");
    FAIL() << "expected ParseError";
  } catch (const staylor::ParseError& e) {
    EXPECT_EQ(std::string(e.what()), "row 2, column 'b': cannot parse 'oops'");
  }
}

TEST(Table, RejectsNonFiniteAndPartialTokens) {
  EXPECT_THROW(parse("a\nnan\n"), staylor::ParseError);
  EXPECT_THROW(parse("a\ninf\n"), staylor::ParseError);
  EXPECT_THROW(parse("a\n1.5x\n"), staylor::ParseError);
  EXPECT_THROW(parse("a\n\n"), staylor::ParseError);  // empty token is not a number
}

TEST(Table, RejectsEmptyInputHeaderOnlyAndDuplicates) {
  EXPECT_THROW(parse(""), staylor::SchemaError);
  EXPECT_THROW(parse("a,b\n"), staylor::SchemaError);
  EXPECT_THROW(parse("a,a\n1,2\n"), staylor::SchemaError);
}

TEST(Table, FeatureIndexThrowsOnUnknownName) {
  const FeatureTable t = parse("a,b\n1,2\n");
  EXPECT_EQ(t.feature_index("b"), 1u);
  EXPECT_THROW(t.feature_index("c"), staylor::SchemaError);
}

TEST(Table, ColumnStatsMeanStdAndMissing) {
  const FeatureTable t = parse("v\n1\n2\n3\nNA\n");
  const staylor::ColumnStats s = t.column_stats(0);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.stddev, std::sqrt(2.0 / 3.0));
  EXPECT_EQ(s.missing, 1u);
}

TEST(Table, ColumnStatsConstantColumnHasZeroStd) {
  const FeatureTable t = parse("v\n4\n4\n4\n");
  const staylor::ColumnStats s = t.column_stats(0);
  EXPECT_DOUBLE_EQ(s.mean, 4.0);
  EXPECT_DOUBLE_EQ(s.stddev, 0.0);
}

TEST(Table, ColumnStatsEmptyColumnThrows) {
  const FeatureTable t = parse("v,w\nNA,1\nNA,2\n");
  EXPECT_THROW(t.column_stats(0), staylor::EmptyColumnError);
  EXPECT_THROW(t.column_stats(5), staylor::DomainError);
}

TEST(Table, WriteThenParseIsLossless) {
  staylor::Rng rng(17);
  std::vector<Cell> cells;
  for (int i = 0; i < 300; ++i) {
    if (rng.uniform01() < 0.1) {
      cells.emplace_back(std::nullopt);
    } else {
      // Mix of magnitudes, including values with no short decimal form.
      const double v = (rng.uniform01() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
      cells.emplace_back(v);
    }
  }
  const FeatureTable t({"a", "b", "c"}, cells);
  std::ostringstream first;
  t.write_csv(first);
  std::istringstream in(first.str());
  const FeatureTable back = FeatureTable::parse_csv(in);
  ASSERT_EQ(back.num_rows(), t.num_rows());
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    for (std::size_t c = 0; c < 3; ++c) {
      ASSERT_EQ(back.cell(r, c).has_value(), t.cell(r, c).has_value());
      if (t.cell(r, c)) {
        // Bitwise equality: shortest round-trip rendering must not lose ulps.
        EXPECT_EQ(*back.cell(r, c), *t.cell(r, c));
      }
    }
  }
  std::ostringstream second;
  back.write_csv(second);
  EXPECT_EQ(first.str(), second.str());
}

TEST(Table, RendersCanonicalShortestForm) {
  EXPECT_EQ(staylor::detail::render_double(0.1), "0.1");
  EXPECT_EQ(staylor::detail::render_double(-2.0), "-2");
  EXPECT_EQ(staylor::detail::render_double(1e300), "1e+300");
}

TEST(Table, ConstructorRejectsBadShapes) {
  EXPECT_THROW(FeatureTable({}, {}), staylor::SchemaError);
  EXPECT_THROW(FeatureTable({"a", "b"}, {1.0, 2.0, 3.0}), staylor::SchemaError);
  EXPECT_THROW(FeatureTable({"a"}, {}), staylor::SchemaError);
  EXPECT_THROW(FeatureTable({""}, {1.0}), staylor::SchemaError);
}

TEST(Table, FromRowsMatchesFlatConstruction) {
  const FeatureTable t = FeatureTable::from_rows({"a", "b"}, {{1.0, 2.0}, {3.0, Cell{}}});
  EXPECT_EQ(t.num_rows(), 2u);
  EXPECT_EQ(*t.cell(1, 0), 3.0);
  EXPECT_FALSE(t.cell(1, 1).has_value());
  EXPECT_THROW(FeatureTable::from_rows({"a", "b"}, {{1.0}}), staylor::SchemaError);
}

}  // namespace
