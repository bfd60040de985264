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

#include "sta/metrics.hpp"
#include "test_util.hpp"

namespace {

using sta::Task;

// gold: 8 cells, system: 5 answers, 4 of them right.
const char* kGold =
    "T,1,0,http://dbpedia.org/resource/A\n"
    "T,2,0,http://dbpedia.org/resource/B\n"
    "T,3,0,http://dbpedia.org/resource/C\n"
    "T,4,0,http://dbpedia.org/resource/D\n"
    "T,5,0,http://dbpedia.org/resource/E\n"
    "T,6,0,http://dbpedia.org/resource/F\n"
    "T,7,0,http://dbpedia.org/resource/G\n"
    "T,8,0,http://dbpedia.org/resource/H\n";
const char* kSystem =
    "T,1,0,http://dbpedia.org/resource/A\n"
    "T,2,0,http://dbpedia.org/resource/B\n"
    "T,3,0,http://dbpedia.org/resource/C\n"
    "T,4,0,http://dbpedia.org/resource/D\n"
    "T,5,0,http://dbpedia.org/resource/Wrong\n";

TEST(Metrics, CraftedPrecisionRecall) {
    const auto m = sta::score(sta::parse_system(kSystem, Task::CEA), sta::parse_gold(kGold, Task::CEA), Task::CEA);
    EXPECT_EQ(m.correct, 4u);
    EXPECT_EQ(m.system, 5u);
    EXPECT_EQ(m.target, 8u);
    EXPECT_NEAR(m.precision, 0.8, 1e-12);
    EXPECT_NEAR(m.recall, 0.5, 1e-12);
    EXPECT_NEAR(m.f1, 8.0 / 13.0, 1e-12);  // 2c / (s + t)
}

TEST(Metrics, SwappingRolesSwapsPrecisionAndRecall) {
    // Use the 4 correct rows as gold and all 8 as system.
    const std::string four =
        "T,1,0,http://dbpedia.org/resource/A\nT,2,0,http://dbpedia.org/resource/B\n"
        "T,3,0,http://dbpedia.org/resource/C\nT,4,0,http://dbpedia.org/resource/D\n";
    const auto a = sta::score(sta::parse_system(four, Task::CEA), sta::parse_gold(kGold, Task::CEA), Task::CEA);
    const auto b = sta::score(sta::parse_system(kGold, Task::CEA), sta::parse_gold(four, Task::CEA), Task::CEA);
    EXPECT_DOUBLE_EQ(a.precision, b.recall);
    EXPECT_DOUBLE_EQ(a.recall, b.precision);
    EXPECT_DOUBLE_EQ(a.f1, b.f1);
    EXPECT_NEAR(a.f1, 2.0 * 4 / 12, 1e-12);
}

TEST(Metrics, PerfectAndEmpty) {
    const auto perfect = sta::score(sta::parse_system(kGold, Task::CEA), sta::parse_gold(kGold, Task::CEA), Task::CEA);
    EXPECT_EQ(perfect.precision, 1.0);
    EXPECT_EQ(perfect.recall, 1.0);
    EXPECT_EQ(perfect.f1, 1.0);

    const auto empty = sta::score(sta::parse_system("", Task::CEA), sta::parse_gold(kGold, Task::CEA), Task::CEA);
    EXPECT_EQ(empty.precision, 0.0);
    EXPECT_EQ(empty.recall, 0.0);
    EXPECT_EQ(empty.f1, 0.0);

    const auto none = sta::score({}, {}, Task::CTA);
    EXPECT_EQ(none.f1, 0.0);
}

TEST(Metrics, DuplicateSystemKeyIsError) {
    EXPECT_THROW(sta::parse_system("T,1,0,http://x/A\nT,01,0,http://x/B\n", Task::CEA), sta::ScoreError);
    EXPECT_THROW(sta::parse_system("T,0,http://x/A\nT,0,http://x/A\n", Task::CTA), sta::ScoreError);
}

TEST(Metrics, MalformedRows) {
    EXPECT_THROW(sta::parse_system("T,1,http://x/A\n", Task::CEA), sta::ScoreError);
    EXPECT_THROW(sta::parse_gold("T,one,0,http://x/A\n", Task::CEA), sta::ScoreError);
}

TEST(Metrics, EmptyUriIsAbstention) {
    const auto sys = sta::parse_system("T,1,0,\nT,2,0,http://dbpedia.org/resource/B\n", Task::CEA);
    EXPECT_EQ(sys.size(), 1u);
}

TEST(Metrics, UriNormalization) {
    EXPECT_EQ(sta::normalize_uri("HTTP://DBpedia.org/resource/Fran%63e"), "http://dbpedia.org/resource/France");
    EXPECT_EQ(sta::normalize_uri(" http://dbpedia.org/resource/Caf%C3%A9 "), "http://dbpedia.org/resource/Café");
    // Path case is significant.
    EXPECT_NE(sta::normalize_uri("http://dbpedia.org/resource/paris"), sta::normalize_uri("http://dbpedia.org/resource/Paris"));
    const auto m = sta::score(sta::parse_system("T,0,http://dbpedia.org/ontology/City\n", Task::CTA),
                              sta::parse_gold("T,0,HTTP://DBPEDIA.ORG/ontology/C%69ty\n", Task::CTA), Task::CTA);
    EXPECT_EQ(m.correct, 1u);
}

TEST(Metrics, GoldAlternatives) {
    const auto gold = sta::parse_gold("T,0,http://x/A http://x/B\nT,1,http://x/C\nT,1,http://x/D\n", Task::CTA);
    EXPECT_EQ(gold.size(), 2u);
    const auto m = sta::score(sta::parse_system("T,0,http://x/B\nT,1,http://x/D\n", Task::CTA), gold, Task::CTA);
    EXPECT_EQ(m.correct, 2u);
    EXPECT_EQ(m.f1, 1.0);
}

TEST(Metrics, IndicesIgnoreLeadingZeros) {
    const auto m = sta::score(sta::parse_system("T,007,00,http://x/A\n", Task::CEA), sta::parse_gold("T,7,0,http://x/A\n", Task::CEA),
                              Task::CEA);
    EXPECT_EQ(m.correct, 1u);
}

TEST(Metrics, ScoreFilesAndJson) {
    testutil::TempDir dir;
    const auto m = sta::score_files(dir.write("sys.csv", kSystem), dir.write("gold.csv", kGold), Task::CEA);
    const auto j = m.to_json();
    EXPECT_EQ(j.at("task"), "CEA");
    EXPECT_EQ(j.at("correct"), 4);
    EXPECT_THROW(sta::score_files(dir / "missing.csv", dir / "gold.csv", Task::CEA), sta::Error);
}

}  // namespace
