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

#include <deque>

#include <gtest/gtest.h>

#include "sta/llm.hpp"
#include "sta/prompts.hpp"

namespace {

using sta::CandidateClass;
using sta::CandidateEntity;
using sta::LlmTask;
namespace prompts = sta::prompts;

/// Replies from a queue and records every request.
class ScriptedTransport final : public sta::LlmTransport {
public:
    explicit ScriptedTransport(std::deque<std::string> replies) : replies_(std::move(replies)) {}
    std::vector<sta::LlmRequest> requests;

    sta::LlmResponse complete(const sta::LlmRequest& r) override {
        requests.push_back(r);
        if (replies_.empty()) throw sta::LlmError("script exhausted");
        auto t = replies_.front();
        replies_.pop_front();
        return {t, std::nullopt, std::nullopt};
    }

private:
    std::deque<std::string> replies_;
};

std::vector<CandidateEntity> ronaldo_candidates() {
    return {{"http://dbpedia.org/resource/Ronaldo_(Brazilian_footballer)", "Ronaldo", 1, "Renaldo"},
            {"http://dbpedia.org/resource/Cristiano_Ronaldo", "Cristiano Ronaldo", 2, "Renaldo"}};
}

TEST(Prompts, RenderIsSinglePass) {
    EXPECT_EQ(prompts::render("a {x} b {y}", {{"x", "{y}"}, {"y", "Y"}}), "a {y} b Y");
    EXPECT_EQ(prompts::render("{unknown} {x", {{"x", "1"}}), "{unknown} {x");
}

TEST(Prompts, ParseOption) {
    EXPECT_EQ(prompts::parse_option("2", 3, false), 2u);
    EXPECT_EQ(prompts::parse_option(" Answer: 3. ", 3, false), 3u);
    EXPECT_EQ(prompts::parse_option("(1)", 3, false), 1u);
    EXPECT_EQ(prompts::parse_option("0", 3, true), 0u);
    EXPECT_FALSE(prompts::parse_option("0", 3, false));
    EXPECT_FALSE(prompts::parse_option("4", 3, true));
    EXPECT_FALSE(prompts::parse_option("I think 2", 3, true));
    EXPECT_FALSE(prompts::parse_option("", 3, true));
}

TEST(Prompts, ParseTopic) {
    EXPECT_EQ(prompts::parse_topic("\"Athlete\"\n"), "Athlete");
    EXPECT_EQ(prompts::parse_topic("Topic: Football club"), "Football club");
    EXPECT_FALSE(prompts::parse_topic("This column contains the names of many famous football players"));
    EXPECT_FALSE(prompts::parse_topic("{\"topic\": 1}"));
    EXPECT_FALSE(prompts::parse_topic("   "));
}

TEST(Prompts, ParseClassAndEntity) {
    const std::string dbo = "http://dbpedia.org/ontology/";
    const std::string dbr = "http://dbpedia.org/resource/";
    EXPECT_EQ(prompts::parse_class_name("SoccerPlayer", dbo).uri, dbo + "SoccerPlayer");
    EXPECT_EQ(prompts::parse_class_name("dbo:Company", dbo).uri, dbo + "Company");
    EXPECT_EQ(prompts::parse_class_name("<http://dbpedia.org/ontology/City>", dbo).uri, dbo + "City");
    EXPECT_EQ(prompts::parse_class_name("NONE", dbo).kind, prompts::FreeFormKind::None);
    EXPECT_EQ(prompts::parse_class_name("soccer player", dbo).kind, prompts::FreeFormKind::Invalid);
    EXPECT_EQ(prompts::parse_class_name("http://schema.org/Person", dbo).kind, prompts::FreeFormKind::Invalid);
    EXPECT_EQ(prompts::parse_entity_uri(dbr + "Paris", dbr).uri, dbr + "Paris");
    EXPECT_EQ(prompts::parse_entity_uri("Paris", dbr).kind, prompts::FreeFormKind::Invalid);
}

TEST(Prompts, ParseCorrections) {
    const auto ok = prompts::parse_corrections("2. KEEP: Rome\n1. SPELL: London\n", 2);
    ASSERT_TRUE(ok);
    EXPECT_EQ((*ok)[0].kind, prompts::CorrectionKind::SpellFix);
    EXPECT_EQ((*ok)[0].text, "London");
    EXPECT_EQ((*ok)[1].kind, prompts::CorrectionKind::Unchanged);
    EXPECT_FALSE(prompts::parse_corrections("1. SPELL: London", 2));
    EXPECT_FALSE(prompts::parse_corrections("1. SPELL: a\n1. KEEP: b", 2));
    EXPECT_FALSE(prompts::parse_corrections("1. FIX: a", 1));
}

TEST(SelectCea, StubPicksScriptedEntity) {
    sta::StubLlm stub(nlohmann::json::parse(R"({"cea": {"Renaldo": "http://dbpedia.org/resource/Cristiano_Ronaldo"}})"));
    sta::LlmClient llm(stub);
    const auto c = llm.select_cea("Renaldo", {"Al-Nassr FC", "Portugal"}, "Athlete", ronaldo_candidates());
    ASSERT_TRUE(c.entity);
    EXPECT_EQ(c.entity->uri, "http://dbpedia.org/resource/Cristiano_Ronaldo");
    EXPECT_FALSE(c.fallback);
}

TEST(SelectCea, SingleCandidateShortCircuit) {
    sta::StubLlm stub(nlohmann::json::parse(R"({"cea": {"x": "http://dbpedia.org/resource/Other"}})"));
    sta::LlmClient llm(stub);
    const auto c = llm.select_cea("x", {}, "h", {ronaldo_candidates()[1]});
    ASSERT_TRUE(c.entity);
    EXPECT_EQ(c.entity->uri, "http://dbpedia.org/resource/Cristiano_Ronaldo");
    EXPECT_FALSE(c.fallback);
}

TEST(SelectCea, OutOfListAnswerFallsBackAfterOneReask) {
    sta::StubLlm stub(nlohmann::json::parse(R"({"cea": {"Renaldo": "http://dbpedia.org/resource/Elsewhere"}})"));
    sta::LlmClient llm(stub);
    const auto c = llm.select_cea("Renaldo", {}, "Athlete", ronaldo_candidates());
    ASSERT_TRUE(c.entity);
    EXPECT_EQ(c.entity->uri, ronaldo_candidates()[0].uri);
    EXPECT_TRUE(c.fallback);
    EXPECT_FALSE(c.warning.empty());
    EXPECT_EQ(llm.usage_report()[LlmTask::CeaSelect].call_count, 2u);
}

TEST(SelectCea, ReaskRecovers) {
    ScriptedTransport t({"the second one", "2"});
    sta::LlmClient llm(t);
    const auto c = llm.select_cea("Renaldo", {}, "Athlete", ronaldo_candidates());
    ASSERT_TRUE(c.entity);
    EXPECT_EQ(c.entity->uri, ronaldo_candidates()[1].uri);
    EXPECT_FALSE(c.fallback);
    ASSERT_EQ(t.requests.size(), 2u);
    EXPECT_NE(t.requests[1].prompt.find("the second one"), std::string::npos);
}

TEST(SelectCea, ZeroAbstains) {
    ScriptedTransport t({"0"});
    sta::LlmClient llm(t);
    EXPECT_FALSE(llm.select_cea("x", {}, "h", ronaldo_candidates()).entity);
    EXPECT_THROW(llm.select_cea("x", {}, "h", {}), std::invalid_argument);
}

TEST(SelectCea, PromptListsNumberedOptions) {
    ScriptedTransport t({"1"});
    sta::LlmClient llm(t);
    llm.select_cea("Renaldo", {"Al-Nassr FC"}, "Athlete", ronaldo_candidates());
    const auto& p = t.requests.at(0).prompt;
    EXPECT_NE(p.find("1. Ronaldo <http://dbpedia.org/resource/Ronaldo_(Brazilian_footballer)>"), std::string::npos);
    EXPECT_NE(p.find("2. Cristiano Ronaldo"), std::string::npos);
    EXPECT_NE(p.find("Al-Nassr FC"), std::string::npos);
}

TEST(NameEntity, FreeFormUri) {
    sta::StubLlm stub(nlohmann::json::parse(R"({"cea": {"Paris": "http://dbpedia.org/resource/Paris"}})"));
    sta::LlmClient llm(stub);
    EXPECT_EQ(llm.name_entity("Paris", {}, "city").entity->uri, "http://dbpedia.org/resource/Paris");
    EXPECT_FALSE(llm.name_entity("qwerty", {}, "city").entity);
}

TEST(SelectCta, PicksScriptedClassFromCandidates) {
    sta::StubLlm stub(nlohmann::json::parse(R"({"cta": {"Athlete": "SoccerPlayer"}})"));
    sta::LlmClient llm(stub);
    const std::vector<CandidateClass> cands{{"http://dbpedia.org/ontology/Athlete", "Athlete", 1},
                                            {"http://dbpedia.org/ontology/SoccerPlayer", "SoccerPlayer", 2},
                                            {"http://dbpedia.org/ontology/Person", "Person", 3}};
    const auto c = llm.select_cta("Athlete", {"Renaldo"}, {}, cands);
    EXPECT_EQ(c.class_uri, "http://dbpedia.org/ontology/SoccerPlayer");
    EXPECT_EQ(c.option, 1u);
}

TEST(SelectCta, SingleCandidateReturned) {
    sta::StubLlm stub(nlohmann::json::parse(R"({"cta": {"Athlete": "SoccerPlayer"}})"));
    sta::LlmClient llm(stub);
    const auto c = llm.select_cta("Athlete", {}, {}, {{"http://dbpedia.org/ontology/Person", "Person", 1}});
    EXPECT_EQ(c.class_uri, "http://dbpedia.org/ontology/Person");
}

TEST(SelectCta, HeadersOnlyPathway) {
    sta::StubLlm stub(nlohmann::json::parse(R"({"cta": {"C": "Company"}})"));
    sta::LlmClient llm(stub);
    const auto c = llm.select_cta("C", {}, {"name", "salary"}, {});
    EXPECT_EQ(c.class_uri, "http://dbpedia.org/ontology/Company");
    EXPECT_FALSE(c.option);
    // Unscripted default
    EXPECT_EQ(llm.select_cta("zzz", {}, {}, {}).class_uri, "http://dbpedia.org/ontology/Thing");
}

TEST(SelectCta, InvalidFreeFormAbstainsAfterReask) {
    ScriptedTransport t({"a kind of company", "still prose"});
    sta::LlmClient llm(t);
    const auto c = llm.select_cta("C", {}, {}, {});
    EXPECT_FALSE(c.class_uri);
    EXPECT_FALSE(c.warning.empty());
    EXPECT_EQ(t.requests.size(), 2u);
}

TEST(Topic, StubDefaultsAndFallback) {
    sta::StubLlm stub(nlohmann::json::parse(R"({"topics": {"Renaldo|David Beckham": "Athlete"}})"));
    sta::LlmClient llm(stub);
    EXPECT_EQ(llm.detect_column_topic({"Renaldo", "David Beckham"}, {"col1"}).topic, "Athlete");
    EXPECT_EQ(llm.detect_column_topic({"1", "2", "3"}, {}).topic, "Number");
    EXPECT_EQ(llm.detect_column_topic({"x"}, {}).topic, "Thing");
    EXPECT_THROW(llm.detect_column_topic({}, {}), std::invalid_argument);

    ScriptedTransport bad({"{}", "{}"});
    sta::LlmClient llm2(bad);
    const auto r = llm2.detect_column_topic({"x"}, {});
    EXPECT_EQ(r.topic, "Entity");
    EXPECT_TRUE(r.fallback);
}

TEST(Usage, CountsPerTaskAndEstimatesTokens) {
    ScriptedTransport t({"1", "Athlete"});
    sta::LlmClient llm(t);
    llm.select_cea("x", {}, "h", ronaldo_candidates());
    llm.detect_column_topic({"x"}, {});
    const auto u = llm.usage_report();
    EXPECT_EQ(u[LlmTask::CeaSelect].call_count, 1u);
    EXPECT_EQ(u[LlmTask::ColumnTopic].call_count, 1u);
    EXPECT_EQ(u[LlmTask::CtaSelect].call_count, 0u);
    EXPECT_EQ(u[LlmTask::CeaSelect].prompt_tokens, sta::estimate_tokens(t.requests[0].prompt));
    EXPECT_EQ(u[LlmTask::CeaSelect].completion_tokens, 1u);
    EXPECT_EQ(u.total().call_count, 2u);
    EXPECT_EQ(sta::estimate_tokens("abcd"), 1u);
    EXPECT_EQ(sta::estimate_tokens("abcde"), 2u);
}

TEST(Usage, ReportedTokensWin) {
    class Reporting final : public sta::LlmTransport {
    public:
        sta::LlmResponse complete(const sta::LlmRequest&) override { return {"1", 100, 7}; }
    } rep;
    sta::LlmClient llm(rep);
    llm.select_cta("h", {}, {}, {{"http://dbpedia.org/ontology/A", "A", 1}, {"http://dbpedia.org/ontology/B", "B", 2}});
    EXPECT_EQ(llm.usage_report()[LlmTask::CtaSelect].prompt_tokens, 100u);
    EXPECT_EQ(llm.usage_report()[LlmTask::CtaSelect].completion_tokens, 7u);
}

TEST(Usage, TransportFailuresCounted) {
    ScriptedTransport empty({});
    sta::LlmClient llm(empty);
    const auto c = llm.select_cea("x", {}, "h", ronaldo_candidates());
    EXPECT_TRUE(c.fallback);
    EXPECT_EQ(llm.usage_report()[LlmTask::CeaSelect].failures, 1u);
}

TEST(RateLimiter, ZeroIsUnlimited) {
    sta::RateLimiter r(0);
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 1000; ++i) r.acquire();
    EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(1));
}

TEST(RateLimiter, BurstThenWaits) {
    sta::RateLimiter r(600);  // 10 per second, burst 600
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < 600; ++i) r.acquire();
    EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(500));
    r.acquire();  // bucket empty: roughly 100 ms
    EXPECT_GE(std::chrono::steady_clock::now() - t0, std::chrono::milliseconds(50));
}

}  // namespace
