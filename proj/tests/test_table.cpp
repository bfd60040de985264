// Copyright 2026 The STA Authors. All Rights Reserved.
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

#include <gtest/gtest.h>

#include "sta/table.hpp"
#include "test_util.hpp"

namespace {

using sta::ColumnVariant;
using sta::classify_column;

TEST(LoadTable, ParsesHeaderAndCells) {
    const auto t = sta::parse_table("col0,col1,col2\nRenaldo,Al-Nassr FC,Portugal\nDavid Beckham,LA Galaxy,England\n", "T1");
    EXPECT_EQ(t.n_cols(), 3u);
    EXPECT_EQ(t.n_rows(), 2u);
    EXPECT_EQ(t.headers[1], "col1");
    EXPECT_EQ(t.cell(1, 0), "David Beckham");
}

TEST(LoadTable, EmptyFileHasZeroColumns) {
    testutil::TempDir dir;
    const auto p = dir.write("empty.csv", "");
    try {
        sta::load_table(p, "empty");
        FAIL() << "expected an error";
    } catch (const sta::CsvError& e) {
        EXPECT_NE(std::string(e.what()).find("zero columns"), std::string::npos);
    }
}

TEST(LoadTable, ShortRowsArePaddedAndCellsNormalized) {
    const auto t = sta::parse_table("a,b,c\n  x  ,y\n1,  two   words ,3\n", "T");
    ASSERT_EQ(t.rows[0].size(), 3u);
    EXPECT_EQ(t.cell(0, 0), "x");
    EXPECT_EQ(t.cell(0, 2), "");
    EXPECT_EQ(t.cell(1, 1), "two words");
}

TEST(LoadTable, WideRowExtendsHeaders) {
    const auto t = sta::parse_table("a,b\n1,2,3\n", "T");
    EXPECT_EQ(t.n_cols(), 3u);
    EXPECT_FALSE(t.headers[2].has_value());
}

TEST(LoadTable, RoundTripIsIdentity) {
    const auto t = sta::parse_table("name,\"quoted, header\",c\nx,\"a \"\"b\"\"\",\n\"multi\nline\",,z\n", "T");
    EXPECT_EQ(sta::parse_table(sta::to_csv(t), "T"), t);
    const auto nh = sta::parse_table("1,2\n3,4\n", "N", false);
    EXPECT_EQ(nh.n_rows(), 2u);
    EXPECT_EQ(sta::parse_table(sta::to_csv(nh, false), "N", false), nh);
}

TEST(LoadTable, DirectoryUsesStemsInSortedOrder) {
    testutil::TempDir dir;
    dir.write("b.csv", "h\n1\n");
    dir.write("a.csv", "h\n2\n");
    dir.write("notes.txt", "ignored");
    const auto tables = sta::load_table_dir(dir.path());
    ASSERT_EQ(tables.size(), 2u);
    EXPECT_EQ(tables[0].table_id, "a");
    EXPECT_EQ(tables[1].table_id, "b");
}

TEST(Classify, HeaderMeaningfulness) {
    for (const char* h : {"col0", "COL12", "column3", "field7", "Unnamed: 2", "C", "", "  "}) {
        EXPECT_FALSE(sta::header_is_meaningful(std::string(h))) << h;
    }
    EXPECT_FALSE(sta::header_is_meaningful(std::nullopt));
    for (const char* h : {"name", "colour", "column", "fielder", "animal_count", "ID"}) {
        EXPECT_TRUE(sta::header_is_meaningful(std::string(h))) << h;
    }
}

TEST(Classify, WalkthroughExamples) {
    EXPECT_EQ(classify_column("col1", {"Ronaldo", "David Beckham", "Messi"}), ColumnVariant::HeaderlessWithCells);
    EXPECT_EQ(classify_column("animal_count", {"", "", ""}), ColumnVariant::HeadersWithEmptyCells);
    EXPECT_EQ(classify_column("name", {"Max", "Charlie"}), ColumnVariant::FullyMeaningful);
}

TEST(Classify, MeaninglessHeaderWithFewCells) {
    // Too few cells for topic detection and mostly empty: typed from headers.
    EXPECT_EQ(classify_column("C", {"", "", "", "x"}), ColumnVariant::HeadersWithEmptyCells);
    // Few cells but mostly filled: nothing better than the normal workflow.
    EXPECT_EQ(classify_column("col0", {"a", "b"}), ColumnVariant::FullyMeaningful);
}

TEST(Classify, ThresholdsAreConfigurable) {
    const sta::SituationThresholds th{2, 0.8};
    EXPECT_EQ(classify_column("col0", {"a", "b"}, th), ColumnVariant::HeaderlessWithCells);
    EXPECT_EQ(classify_column("name", {"a", "b", "", ""}, th), ColumnVariant::HeadersWithEmptyCells);
}

TEST(Classify, TablePartitionsColumns) {
    const auto t = sta::parse_table("col0,C,salary\nAlice,,1\nBob,,2\nCarol,,3\n", "T");
    const auto s = sta::classify_table(t);
    ASSERT_EQ(s.columns.size(), 3u);
    EXPECT_EQ(s.columns[0], ColumnVariant::HeaderlessWithCells);
    EXPECT_EQ(s.columns[1], ColumnVariant::HeadersWithEmptyCells);
    EXPECT_EQ(s.columns[2], ColumnVariant::FullyMeaningful);
}

TEST(Targets, ValidatesAgainstTables) {
    testutil::TempDir dir;
    const std::vector<sta::Table> tables{sta::parse_table("a,b\n1,2\n3,4\n", "T1")};
    const auto cea = dir.write("cea.csv", "T1,0,0\nT9,0,0\nT1,5,0\nT1,1,1\nT1,0,0\nT1,x,0\n");
    const auto cta = dir.write("cta.csv", "T1,1\nT1,4\nT9,0\n");
    const auto ts = sta::load_targets(cea, cta, tables);
    ASSERT_EQ(ts.cea_targets.size(), 2u);
    EXPECT_EQ(ts.cea_targets[0], (sta::CellRef{"T1", 0, 0}));
    EXPECT_EQ(ts.cea_targets[1], (sta::CellRef{"T1", 1, 1}));
    ASSERT_EQ(ts.cta_targets.size(), 1u);
    EXPECT_EQ(ts.cta_targets[0], (sta::ColumnRef{"T1", 1}));
    EXPECT_EQ(ts.warnings.size(), 5u);
}

TEST(Targets, EmptyFilesGiveEmptySet) {
    testutil::TempDir dir;
    const auto e = dir.write("e.csv", "");
    const auto ts = sta::load_targets(e, e, {});
    EXPECT_TRUE(ts.cea_targets.empty());
    EXPECT_TRUE(ts.cta_targets.empty());
    EXPECT_TRUE(ts.warnings.empty());
}

}  // namespace
