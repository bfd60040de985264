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

#include <atomic>
#include <thread>

#include <gtest/gtest.h>

#include "sta/kg.hpp"
#include "test_util.hpp"

namespace {

using namespace std::chrono_literals;
using sta::KgItem;

/// Counts calls; optionally fails transiently a fixed number of times.
class FakeBackend final : public sta::KgBackend {
public:
    std::atomic<int> lookups{0};
    std::atomic<int> class_calls{0};
    std::atomic<int> transient_failures_left{0};
    std::atomic<int> concurrent{0};
    std::atomic<int> max_concurrent{0};
    std::chrono::milliseconds delay{0};

    std::vector<KgItem> lookup(const std::string& text, std::size_t limit) override {
        enter();
        ++lookups;
        if (transient_failures_left.fetch_sub(1) > 0) {
            leave();
            throw sta::KgTransientError("503");
        }
        std::vector<KgItem> out;
        for (std::size_t i = 0; i < limit && i < 3; ++i) {
            out.push_back({"http://dbpedia.org/resource/" + text + "_" + std::to_string(i), text + " " + std::to_string(i)});
        }
        leave();
        return out;
    }
    std::vector<KgItem> classes(const std::string& uri, std::size_t limit) override {
        ++class_calls;
        std::vector<KgItem> out{{"http://dbpedia.org/ontology/Person", "Person"}, {"http://dbpedia.org/ontology/Agent", "Agent"}};
        if (out.size() > limit) out.resize(limit);
        (void)uri;
        return out;
    }

private:
    void enter() {
        const int now = ++concurrent;
        int prev = max_concurrent.load();
        while (now > prev && !max_concurrent.compare_exchange_weak(prev, now)) {
        }
        if (delay.count()) std::this_thread::sleep_for(delay);
    }
    void leave() { --concurrent; }
};

sta::KgClientOptions no_sleep(std::vector<std::chrono::milliseconds>* sleeps = nullptr) {
    sta::KgClientOptions o;
    o.sleep = [sleeps](std::chrono::milliseconds d) {
        if (sleeps) sleeps->push_back(d);
    };
    return o;
}

TEST(KgClient, AssignsRanksAndSourceQuery) {
    FakeBackend fake;
    sta::KgClient kg(fake, no_sleep());
    const auto c = kg.lookup_entities("  Paris  ", 2);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].rank, 1u);
    EXPECT_EQ(c[1].rank, 2u);
    EXPECT_EQ(c[0].source_query, "Paris");
    const auto cls = kg.entity_classes(c[0].uri, 1);
    ASSERT_EQ(cls.size(), 1u);
    EXPECT_EQ(cls[0].uri, "http://dbpedia.org/ontology/Person");
}

TEST(KgClient, RejectsBadArguments) {
    FakeBackend fake;
    sta::KgClient kg(fake, no_sleep());
    EXPECT_THROW(kg.lookup_entities("   ", 5), std::invalid_argument);
    EXPECT_THROW(kg.lookup_entities("x", 0), std::invalid_argument);
    EXPECT_THROW(kg.entity_classes("", 5), std::invalid_argument);
}

TEST(KgClient, CacheServesRepeats) {
    FakeBackend fake;
    sta::KgClient kg(fake, no_sleep());
    const auto a = kg.lookup_entities("Paris", 5);
    const auto b = kg.lookup_entities("Paris", 5);
    EXPECT_EQ(a, b);
    EXPECT_EQ(fake.lookups.load(), 1);
    EXPECT_EQ(kg.stats().requests, 2u);
    EXPECT_EQ(kg.stats().cache_hits, 1u);
    EXPECT_EQ(kg.stats().backend_calls, 1u);
}

TEST(KgClient, CacheDisabledCallsEveryTime) {
    FakeBackend fake;
    auto o = no_sleep();
    o.cache = false;
    sta::KgClient kg(fake, o);
    kg.lookup_entities("Paris", 5);
    kg.lookup_entities("Paris", 5);
    EXPECT_EQ(fake.lookups.load(), 2);
}

TEST(KgClient, ConcurrentIdenticalRequestsShareOneCall) {
    FakeBackend fake;
    fake.delay = 20ms;
    sta::KgClient kg(fake, no_sleep());
    std::vector<std::jthread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&] { kg.lookup_entities("Rome", 3); });
    threads.clear();
    EXPECT_EQ(fake.lookups.load(), 1);
    EXPECT_EQ(kg.stats().requests, 8u);
    EXPECT_EQ(kg.stats().cache_hits, 7u);
}

TEST(KgClient, InFlightCap) {
    FakeBackend fake;
    fake.delay = 15ms;
    auto o = no_sleep();
    o.max_in_flight = 2;
    sta::KgClient kg(fake, o);
    std::vector<std::jthread> threads;
    for (int i = 0; i < 8; ++i) threads.emplace_back([&, i] { kg.lookup_entities("q" + std::to_string(i), 3); });
    threads.clear();
    EXPECT_EQ(fake.lookups.load(), 8);
    EXPECT_LE(fake.max_concurrent.load(), 2);
}

TEST(KgClient, RetriesWithExponentialBackoff) {
    FakeBackend fake;
    fake.transient_failures_left = 2;
    std::vector<std::chrono::milliseconds> sleeps;
    sta::KgClient kg(fake, no_sleep(&sleeps));
    const auto c = kg.lookup_entities("Paris", 3);
    EXPECT_EQ(c.size(), 3u);
    EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{500ms, 1000ms}));
    EXPECT_EQ(kg.stats().retries, 2u);
    EXPECT_EQ(kg.stats().backend_calls, 3u);
}

TEST(KgClient, GivesUpAfterThreeAttemptsAndDoesNotCacheFailure) {
    FakeBackend fake;
    fake.transient_failures_left = 3;
    sta::KgClient kg(fake, no_sleep());
    try {
        kg.lookup_entities("Paris", 3);
        FAIL() << "expected KgError";
    } catch (const sta::KgError& e) {
        EXPECT_NE(std::string(e.what()).find("unavailable"), std::string::npos);
    }
    EXPECT_EQ(fake.lookups.load(), 3);
    EXPECT_EQ(kg.stats().failures, 1u);
    // The failure was not cached: the next call reaches the backend again.
    EXPECT_EQ(kg.lookup_entities("Paris", 3).size(), 3u);
    EXPECT_EQ(fake.lookups.load(), 4);
}

TEST(KgFixture, ReplayServesExactPrefixAndComplete) {
    sta::KgFixture f;
    f.put({sta::KgOp::Lookup, "Paris", 10}, {{"u:1", "a"}, {"u:2", "b"}, {"u:3", "c"}});
    std::vector<KgItem> ten;
    for (int i = 0; i < 10; ++i) ten.push_back({"u:r" + std::to_string(i), ""});
    f.put({sta::KgOp::Lookup, "Rome", 10}, ten);
    sta::ReplayKgBackend replay(f);
    EXPECT_EQ(replay.lookup("Paris", 10).size(), 3u);
    EXPECT_EQ(replay.lookup("Paris", 2).size(), 2u);
    EXPECT_EQ(replay.lookup("Paris", 15).size(), 3u);  // complete recording
    EXPECT_EQ(replay.lookup("Rome", 5).size(), 5u);
    EXPECT_THROW(replay.lookup("Rome", 15), sta::KgFixtureMiss);  // might have had more
}

TEST(KgFixture, MissNamesTheKey) {
    sta::ReplayKgBackend replay{sta::KgFixture{}};
    sta::KgClient kg(replay, no_sleep());
    try {
        kg.lookup_entities("Atlantis", 10);
        FAIL() << "expected KgFixtureMiss";
    } catch (const sta::KgFixtureMiss& e) {
        EXPECT_EQ(e.key(), "lookup(\"Atlantis\", 10)");
    }
}

TEST(KgFixture, RecordThenReplayRoundTrip) {
    testutil::TempDir dir;
    FakeBackend fake;
    sta::RecordingKgBackend rec(fake);
    {
        sta::KgClient kg(rec, no_sleep());
        kg.lookup_entities("Paris", 5);
        kg.entity_classes("http://dbpedia.org/resource/Paris_0", 10);
    }
    rec.fixture().save(dir / "kg.json");
    sta::ReplayKgBackend replay(sta::KgFixture::load(dir / "kg.json"));
    sta::KgClient kg(replay, no_sleep());
    EXPECT_EQ(kg.lookup_entities("Paris", 5)[2].uri, "http://dbpedia.org/resource/Paris_2");
    EXPECT_EQ(kg.entity_classes("http://dbpedia.org/resource/Paris_0", 10).size(), 2u);
    EXPECT_FALSE(std::filesystem::exists(dir / "kg.json.tmp"));
}

TEST(KgFixture, RejectsBadJson) {
    EXPECT_THROW(sta::KgFixture::from_json(nlohmann::json::object()), sta::KgError);
    EXPECT_THROW(sta::KgFixture::from_json(nlohmann::json::parse(R"([{"op":"nope","query":"x","limit":1,"response":[]}])")),
                 sta::KgError);
}

}  // namespace
