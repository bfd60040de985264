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

// Knowledge-graph access: entity lookup by surface text and ontology classes
// per entity.
//
// KgBackend is the transport (live HTTP, replay fixture, or a test fake).
// KgClient adds the in-run cache, retries with exponential backoff, and a cap
// on concurrent backend requests. Concurrent callers asking for the same key
// share one backend request, so backend call counts do not depend on thread
// scheduling.
//
// Fixture file format (JSON array, sorted by op, query, limit):
//
//   [{"op": "lookup",  "query": "Renaldo", "limit": 10,
//     "response": [{"uri": "http://dbpedia.org/resource/...", "label": "..."}]},
//    {"op": "classes", "query": "http://dbpedia.org/resource/...", "limit": 10,
//     "response": [{"uri": "http://dbpedia.org/ontology/SoccerPlayer", "label": "SoccerPlayer"}]}]
//
// Ranks are implied by array order.

#ifndef STA_KG_HPP
#define STA_KG_HPP

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "sta/error.hpp"
#include "sta/text.hpp"

namespace sta {

struct CandidateEntity {
    std::string uri;
    std::string label;
    std::size_t rank = 1;
    std::string source_query;

    friend bool operator==(const CandidateEntity&, const CandidateEntity&) = default;
};

struct CandidateClass {
    std::string uri;
    std::string label;
    std::size_t rank = 1;

    friend bool operator==(const CandidateClass&, const CandidateClass&) = default;
};

/// One labelled URI as returned by a backend, before ranks are assigned.
struct KgItem {
    std::string uri;
    std::string label;

    friend bool operator==(const KgItem&, const KgItem&) = default;
};

enum class KgOp { Lookup, Classes };

inline std::string_view to_string(KgOp op) { return op == KgOp::Lookup ? "lookup" : "classes"; }

class KgBackend {
public:
    virtual ~KgBackend() = default;
    /// Rank-ordered entities matching `text`, at most `limit`.
    virtual std::vector<KgItem> lookup(const std::string& text, std::size_t limit) = 0;
    /// Rank-ordered ontology classes of `entity_uri`, at most `limit`.
    virtual std::vector<KgItem> classes(const std::string& entity_uri, std::size_t limit) = 0;
};

struct KgFixtureKey {
    KgOp op = KgOp::Lookup;
    std::string query;
    std::size_t limit = 0;

    friend auto operator<=>(const KgFixtureKey&, const KgFixtureKey&) = default;
};

inline std::string describe(const KgFixtureKey& k) {
    return std::string(to_string(k.op)) + "(\"" + k.query + "\", " + std::to_string(k.limit) + ")";
}

/// Recorded (op, query, limit) -> response map.
class KgFixture {
public:
    using Map = std::map<KgFixtureKey, std::vector<KgItem>>;

    void put(KgFixtureKey key, std::vector<KgItem> response) { entries_[std::move(key)] = std::move(response); }

    /// Exact key first. Otherwise a recording with a larger limit is truncated,
    /// and a recording that returned fewer items than its limit is complete and
    /// serves any larger limit too.
    std::optional<std::vector<KgItem>> find(const KgFixtureKey& key) const {
        if (auto it = entries_.find(key); it != entries_.end()) return it->second;
        const KgFixtureKey lo{key.op, key.query, 0};
        for (auto it = entries_.lower_bound(lo); it != entries_.end() && it->first.op == key.op &&
                                                 it->first.query == key.query;
             ++it) {
            const auto& [k, items] = *it;
            if (k.limit >= key.limit || items.size() < k.limit) {
                std::vector<KgItem> out(items.begin(),
                                        items.begin() + static_cast<std::ptrdiff_t>(std::min(items.size(), key.limit)));
                return out;
            }
        }
        return std::nullopt;
    }

    const Map& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    nlohmann::json to_json() const {
        auto arr = nlohmann::json::array();
        for (const auto& [k, items] : entries_) {
            auto resp = nlohmann::json::array();
            for (const auto& it : items) resp.push_back({{"uri", it.uri}, {"label", it.label}});
            arr.push_back({{"op", to_string(k.op)}, {"query", k.query}, {"limit", k.limit}, {"response", resp}});
        }
        return arr;
    }

    static KgFixture from_json(const nlohmann::json& j) {
        if (!j.is_array()) throw KgError("kg fixture must be a JSON array");
        KgFixture f;
        for (const auto& e : j) {
            const auto op_name = e.at("op").get<std::string>();
            KgOp op;
            if (op_name == "lookup") {
                op = KgOp::Lookup;
            } else if (op_name == "classes") {
                op = KgOp::Classes;
            } else {
                throw KgError("unknown fixture op: " + op_name);
            }
            std::vector<KgItem> items;
            for (const auto& r : e.at("response")) {
                items.push_back({r.at("uri").get<std::string>(), r.value("label", std::string{})});
            }
            f.put({op, e.at("query").get<std::string>(), e.at("limit").get<std::size_t>()}, std::move(items));
        }
        return f;
    }

    static KgFixture load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot read kg fixture: " + path.string());
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw KgError("bad kg fixture " + path.string() + ": " + e.what());
        }
    }

    void save(const std::filesystem::path& path) const {
        const auto tmp = path.string() + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot write kg fixture: " + tmp);
            out << to_json().dump(2) << '\n';
            if (!out) throw IoError("write failed: " + tmp);
        }
        std::filesystem::rename(tmp, path);
    }

private:
    Map entries_;
};

/// Serves only from a fixture; misses are hard errors naming the key.
class ReplayKgBackend final : public KgBackend {
public:
    explicit ReplayKgBackend(KgFixture fixture) : fixture_(std::move(fixture)) {}

    std::vector<KgItem> lookup(const std::string& text, std::size_t limit) override {
        return serve({KgOp::Lookup, text, limit});
    }
    std::vector<KgItem> classes(const std::string& uri, std::size_t limit) override {
        return serve({KgOp::Classes, uri, limit});
    }

private:
    std::vector<KgItem> serve(const KgFixtureKey& key) const {
        if (auto r = fixture_.find(key)) return *std::move(r);
        throw KgFixtureMiss(describe(key));
    }

    KgFixture fixture_;
};

/// Wraps a live backend and records every successful response.
class RecordingKgBackend final : public KgBackend {
public:
    explicit RecordingKgBackend(KgBackend& inner) : inner_(inner) {}

    std::vector<KgItem> lookup(const std::string& text, std::size_t limit) override {
        auto r = inner_.lookup(text, limit);
        record({KgOp::Lookup, text, limit}, r);
        return r;
    }
    std::vector<KgItem> classes(const std::string& uri, std::size_t limit) override {
        auto r = inner_.classes(uri, limit);
        record({KgOp::Classes, uri, limit}, r);
        return r;
    }

    KgFixture fixture() const {
        std::lock_guard lock(mu_);
        return fixture_;
    }

private:
    void record(KgFixtureKey key, const std::vector<KgItem>& r) {
        std::lock_guard lock(mu_);
        fixture_.put(std::move(key), r);
    }

    KgBackend& inner_;
    mutable std::mutex mu_;
    KgFixture fixture_;
};

struct KgClientOptions {
    bool cache = true;
    std::size_t attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    std::size_t max_in_flight = 4;
    /// Hook for tests; defaults to std::this_thread::sleep_for.
    std::function<void(std::chrono::milliseconds)> sleep;
};

struct KgStats {
    std::size_t requests = 0;       // calls into the client
    std::size_t cache_hits = 0;
    std::size_t backend_calls = 0;  // transport round-trips, including retries
    std::size_t retries = 0;
    std::size_t failures = 0;       // requests that surfaced an error
};

/// Thread-safe caching front end over a KgBackend.
class KgClient {
public:
    explicit KgClient(KgBackend& backend, KgClientOptions opts = {})
        : backend_(backend), opts_(std::move(opts)), in_flight_(static_cast<std::ptrdiff_t>(clamp_cap(opts_.max_in_flight))) {
        if (opts_.attempts == 0) opts_.attempts = 1;
        if (!opts_.sleep) opts_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    }

    KgClient(const KgClient&) = delete;
    KgClient& operator=(const KgClient&) = delete;

    std::vector<CandidateEntity> lookup_entities(const std::string& text, std::size_t limit) {
        const auto query = text::collapse_whitespace(text);
        if (query.empty()) throw std::invalid_argument("lookup text is empty");
        if (limit == 0) throw std::invalid_argument("lookup limit must be >= 1");
        const auto items = fetch({KgOp::Lookup, query, limit});
        std::vector<CandidateEntity> out;
        for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
            out.push_back({items[i].uri, items[i].label, i + 1, query});
        }
        return out;
    }

    std::vector<CandidateClass> entity_classes(const std::string& entity_uri, std::size_t limit) {
        if (entity_uri.empty()) throw std::invalid_argument("entity uri is empty");
        if (limit == 0) throw std::invalid_argument("class limit must be >= 1");
        const auto items = fetch({KgOp::Classes, entity_uri, limit});
        std::vector<CandidateClass> out;
        for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
            out.push_back({items[i].uri, items[i].label, i + 1});
        }
        return out;
    }

    KgStats stats() const {
        std::lock_guard lock(mu_);
        return stats_;
    }

private:
    using Result = std::shared_future<std::vector<KgItem>>;

    static std::size_t clamp_cap(std::size_t n) { return n == 0 ? 1 : (n > 1024 ? 1024 : n); }

    std::vector<KgItem> fetch(const KgFixtureKey& key) {
        std::promise<std::vector<KgItem>> promise;
        Result result;
        bool owner = false;
        {
            std::lock_guard lock(mu_);
            ++stats_.requests;
            if (opts_.cache) {
                if (auto it = cache_.find(key); it != cache_.end()) {
                    ++stats_.cache_hits;
                    result = it->second;
                } else {
                    result = promise.get_future().share();
                    cache_.emplace(key, result);
                    owner = true;
                }
            } else {
                result = promise.get_future().share();
                owner = true;
            }
        }
        if (owner) {
            try {
                promise.set_value(call_with_retries(key));
            } catch (...) {
                promise.set_exception(std::current_exception());
                std::lock_guard lock(mu_);
                // Failures are not cached so a later request can try again.
                cache_.erase(key);
            }
        }
        try {
            return result.get();
        } catch (...) {
            std::lock_guard lock(mu_);
            ++stats_.failures;
            throw;
        }
    }

    std::vector<KgItem> call_with_retries(const KgFixtureKey& key) {
        auto backoff = opts_.initial_backoff;
        for (std::size_t attempt = 1;; ++attempt) {
            try {
                in_flight_.acquire();
                struct Release {
                    std::counting_semaphore<1024>& s;
                    ~Release() { s.release(); }
                } release{in_flight_};
                {
                    std::lock_guard lock(mu_);
                    ++stats_.backend_calls;
                }
                return key.op == KgOp::Lookup ? backend_.lookup(key.query, key.limit)
                                              : backend_.classes(key.query, key.limit);
            } catch (const KgTransientError& e) {
                if (attempt >= opts_.attempts) {
                    throw KgError("kg backend unavailable after " + std::to_string(attempt) +
                                  " attempts for " + describe(key) + ": " + e.what());
                }
                {
                    std::lock_guard lock(mu_);
                    ++stats_.retries;
                }
                opts_.sleep(backoff);
                backoff *= 2;
            }
        }
    }

    KgBackend& backend_;
    KgClientOptions opts_;
    std::counting_semaphore<1024> in_flight_;
    mutable std::mutex mu_;
    std::map<KgFixtureKey, Result> cache_;
    KgStats stats_;
};

}  // namespace sta

#endif  // STA_KG_HPP
