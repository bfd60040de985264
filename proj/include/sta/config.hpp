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

// Run configuration. Sources, lowest precedence first: defaults, a JSON
// config file, environment variables, command-line flags. Relative paths in
// the file resolve against the file's directory. The LLM API key is read from
// the environment only.

#ifndef STA_CONFIG_HPP
#define STA_CONFIG_HPP

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "sta/annotator.hpp"
#include "sta/error.hpp"

namespace sta {

enum class KgMode { Replay, Record, Live };
enum class LlmMode { Stub, Http };

inline std::string_view to_string(KgMode m) {
    switch (m) {
        case KgMode::Replay: return "replay";
        case KgMode::Record: return "record";
        case KgMode::Live: return "live";
    }
    return "?";
}

inline std::string_view to_string(LlmMode m) { return m == LlmMode::Stub ? "stub" : "http"; }

struct KgSettings {
    KgMode mode = KgMode::Replay;
    std::filesystem::path fixture;
    std::string lookup_url = "https://lookup.dbpedia.org/api/search";
    std::string sparql_url = "https://dbpedia.org/sparql";
    bool cache = true;
    std::size_t attempts = 3;
    std::size_t initial_backoff_ms = 500;
    std::size_t max_in_flight = 4;
    std::size_t timeout_ms = 10000;
};

struct LlmSettings {
    LlmMode mode = LlmMode::Stub;
    std::filesystem::path stub_fixture;  // empty = unscripted defaults
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o-mini";
    std::string api_key;
    double requests_per_minute = 0.0;
    std::size_t max_output_tokens = 64;
    std::size_t timeout_ms = 60000;
    std::string resource_namespace = "http://dbpedia.org/resource/";
};

struct RunConfig {
    std::filesystem::path tables;
    bool has_header = true;
    std::filesystem::path cea_targets;
    std::filesystem::path cta_targets;
    std::filesystem::path cea_gold;
    std::filesystem::path cta_gold;
    std::filesystem::path output = "out";
    std::filesystem::path gazetteer;

    AnnotatorConfig annotator;
    std::size_t workers = 4;
    bool run_scoped_cache = false;

    KgSettings kg;
    LlmSettings llm;
};

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

inline void read_path(const nlohmann::json& j, const char* key, std::filesystem::path& dst, const std::filesystem::path& base) {
    if (!j.contains(key)) return;
    std::filesystem::path p = j.at(key).get<std::string>();
    dst = (p.empty() || p.is_absolute() || base.empty()) ? p : base / p;
}

inline void reject_unknown(const nlohmann::json& j, const std::set<std::string>& known, const std::string& where) {
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ConfigError("unknown config key " + where + k);
    }
}

}  // namespace detail

/// Builds a config from JSON. Unknown keys are errors, to catch typos.
inline RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    RunConfig c;
    try {
        detail::reject_unknown(j,
                               {"tables", "has_header", "cea_targets", "cta_targets", "cea_gold", "cta_gold", "output",
                                "gazetteer", "rep_cell_limit", "cea_candidate_limit", "cta_shortlist_limit", "class_depth_m",
                                "threshold_factor_k", "max_steps", "empty_cell_fraction", "min_valid_cells", "ontology_namespace",
                                "toggles", "workers", "reuse_scope", "kg", "llm"},
                               "");
        detail::read_path(j, "tables", c.tables, base_dir);
        detail::read_opt(j, "has_header", c.has_header);
        detail::read_path(j, "cea_targets", c.cea_targets, base_dir);
        detail::read_path(j, "cta_targets", c.cta_targets, base_dir);
        detail::read_path(j, "cea_gold", c.cea_gold, base_dir);
        detail::read_path(j, "cta_gold", c.cta_gold, base_dir);
        detail::read_path(j, "output", c.output, base_dir);
        detail::read_path(j, "gazetteer", c.gazetteer, base_dir);

        auto& a = c.annotator;
        detail::read_opt(j, "rep_cell_limit", a.rep_cell_limit);
        detail::read_opt(j, "cea_candidate_limit", a.cea_candidate_limit);
        detail::read_opt(j, "cta_shortlist_limit", a.cta_shortlist_limit);
        detail::read_opt(j, "class_depth_m", a.class_depth_m);
        detail::read_opt(j, "threshold_factor_k", a.threshold_factor_k);
        detail::read_opt(j, "max_steps", a.max_steps);
        detail::read_opt(j, "empty_cell_fraction", a.situation.empty_cell_fraction);
        detail::read_opt(j, "min_valid_cells", a.situation.min_valid_cells);
        detail::read_opt(j, "ontology_namespace", a.ontology_namespace);
        if (j.contains("toggles")) {
            const auto& t = j.at("toggles");
            detail::reject_unknown(t, {"dedup", "topic_detection", "kg_lookup", "lev_reuse", "correction"}, "toggles.");
            detail::read_opt(t, "dedup", a.dedup);
            detail::read_opt(t, "topic_detection", a.topic_detection);
            detail::read_opt(t, "kg_lookup", a.kg_lookup);
            detail::read_opt(t, "lev_reuse", a.lev_reuse);
            detail::read_opt(t, "correction", a.correction);
        }
        detail::read_opt(j, "workers", c.workers);
        if (j.contains("reuse_scope")) {
            const auto s = j.at("reuse_scope").get<std::string>();
            if (s != "table" && s != "run") throw ConfigError("reuse_scope must be \"table\" or \"run\"");
            c.run_scoped_cache = s == "run";
        }
        if (j.contains("kg")) {
            const auto& k = j.at("kg");
            detail::reject_unknown(k, {"mode", "fixture", "lookup_url", "sparql_url", "cache", "attempts", "initial_backoff_ms",
                                       "max_in_flight", "timeout_ms"},
                                   "kg.");
            if (k.contains("mode")) {
                const auto m = k.at("mode").get<std::string>();
                if (m == "replay") c.kg.mode = KgMode::Replay;
                else if (m == "record") c.kg.mode = KgMode::Record;
                else if (m == "live") c.kg.mode = KgMode::Live;
                else throw ConfigError("kg.mode must be replay, record or live");
            }
            detail::read_path(k, "fixture", c.kg.fixture, base_dir);
            detail::read_opt(k, "lookup_url", c.kg.lookup_url);
            detail::read_opt(k, "sparql_url", c.kg.sparql_url);
            detail::read_opt(k, "cache", c.kg.cache);
            detail::read_opt(k, "attempts", c.kg.attempts);
            detail::read_opt(k, "initial_backoff_ms", c.kg.initial_backoff_ms);
            detail::read_opt(k, "max_in_flight", c.kg.max_in_flight);
            detail::read_opt(k, "timeout_ms", c.kg.timeout_ms);
        }
        if (j.contains("llm")) {
            const auto& l = j.at("llm");
            detail::reject_unknown(l, {"mode", "stub_fixture", "base_url", "model", "requests_per_minute", "max_output_tokens",
                                       "timeout_ms", "resource_namespace"},
                                   "llm.");
            if (l.contains("mode")) {
                const auto m = l.at("mode").get<std::string>();
                if (m == "stub") c.llm.mode = LlmMode::Stub;
                else if (m == "http") c.llm.mode = LlmMode::Http;
                else throw ConfigError("llm.mode must be stub or http");
            }
            detail::read_path(l, "stub_fixture", c.llm.stub_fixture, base_dir);
            detail::read_opt(l, "base_url", c.llm.base_url);
            detail::read_opt(l, "model", c.llm.model);
            detail::read_opt(l, "requests_per_minute", c.llm.requests_per_minute);
            detail::read_opt(l, "max_output_tokens", c.llm.max_output_tokens);
            detail::read_opt(l, "timeout_ms", c.llm.timeout_ms);
            detail::read_opt(l, "resource_namespace", c.llm.resource_namespace);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j, path.parent_path());
}

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

inline std::optional<std::string> process_env(const char* name) {
    if (const char* v = std::getenv(name); v && *v) return std::string(v);
    return std::nullopt;
}

/// STA_LLM_API_KEY, STA_LLM_BASE_URL, STA_LOOKUP_URL, STA_SPARQL_URL.
inline void apply_env(RunConfig& c, const EnvLookup& env = process_env) {
    if (auto v = env("STA_LLM_API_KEY")) c.llm.api_key = *v;
    if (auto v = env("STA_LLM_BASE_URL")) c.llm.base_url = *v;
    if (auto v = env("STA_LOOKUP_URL")) c.kg.lookup_url = *v;
    if (auto v = env("STA_SPARQL_URL")) c.kg.sparql_url = *v;
}

/// Throws ConfigError on the first problem found.
inline void validate(const RunConfig& c) {
    const auto& a = c.annotator;
    auto at_least_one = [](std::size_t v, const char* name) {
        if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
    };
    at_least_one(a.rep_cell_limit, "rep_cell_limit");
    at_least_one(a.cea_candidate_limit, "cea_candidate_limit");
    at_least_one(a.cta_shortlist_limit, "cta_shortlist_limit");
    at_least_one(a.class_depth_m, "class_depth_m");
    at_least_one(a.max_steps, "max_steps");
    at_least_one(c.workers, "workers");
    at_least_one(c.kg.attempts, "kg.attempts");
    at_least_one(c.kg.max_in_flight, "kg.max_in_flight");
    if (!(a.threshold_factor_k > 0.0)) throw ConfigError("threshold_factor_k must be > 0");
    if (!(a.situation.empty_cell_fraction >= 0.0 && a.situation.empty_cell_fraction <= 1.0)) {
        throw ConfigError("empty_cell_fraction must be in [0, 1]");
    }
    if (c.llm.requests_per_minute < 0.0) throw ConfigError("llm.requests_per_minute must be >= 0");

    auto must_exist = [](const std::filesystem::path& p, const char* what) {
        if (!p.empty() && !std::filesystem::exists(p)) throw ConfigError(std::string(what) + " not found: " + p.string());
    };
    if (c.tables.empty()) throw ConfigError("no tables directory given");
    if (!std::filesystem::is_directory(c.tables)) throw ConfigError("tables directory not found: " + c.tables.string());
    must_exist(c.cea_targets, "cea_targets");
    must_exist(c.cta_targets, "cta_targets");
    must_exist(c.cea_gold, "cea_gold");
    must_exist(c.cta_gold, "cta_gold");
    must_exist(c.gazetteer, "gazetteer");
    must_exist(c.llm.stub_fixture, "llm.stub_fixture");
    if (c.kg.mode == KgMode::Replay) {
        if (c.kg.fixture.empty()) throw ConfigError("kg.mode replay needs kg.fixture");
        must_exist(c.kg.fixture, "kg.fixture");
    }
    if (c.kg.mode == KgMode::Record && c.kg.fixture.empty()) throw ConfigError("kg.mode record needs kg.fixture");
}

/// Effective settings, without secrets, for telemetry.
inline nlohmann::json describe(const RunConfig& c) {
    const auto& a = c.annotator;
    return {{"rep_cell_limit", a.rep_cell_limit},
            {"cea_candidate_limit", a.cea_candidate_limit},
            {"cta_shortlist_limit", a.cta_shortlist_limit},
            {"class_depth_m", a.class_depth_m},
            {"threshold_factor_k", a.threshold_factor_k},
            {"max_steps", a.max_steps},
            {"empty_cell_fraction", a.situation.empty_cell_fraction},
            {"min_valid_cells", a.situation.min_valid_cells},
            {"toggles",
             {{"dedup", a.dedup},
              {"topic_detection", a.topic_detection},
              {"kg_lookup", a.kg_lookup},
              {"lev_reuse", a.lev_reuse},
              {"correction", a.correction}}},
            {"reuse_scope", c.run_scoped_cache ? "run" : "table"},
            {"kg_mode", to_string(c.kg.mode)},
            {"llm_mode", to_string(c.llm.mode)}};
}

}  // namespace sta

#endif  // STA_CONFIG_HPP
