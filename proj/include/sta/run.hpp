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

// Run orchestration: load a corpus, build backends, annotate, write outputs.
//
// Output directory layout:
//   cea.csv           table_id,row,col,entity_uri
//   cta.csv           table_id,col,class_uri
//   corrections.csv   table_id,row,col,original,corrected,kind
//   telemetry.json    per-column routing and counters, KG stats
//   usage.json        LLM calls and tokens per task
//   metrics.json      only when gold files are configured
// No file contains timings, so repeated runs are byte-identical.

#ifndef STA_RUN_HPP
#define STA_RUN_HPP

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sta/annotator.hpp"
#include "sta/config.hpp"
#include "sta/csv.hpp"
#include "sta/kg.hpp"
#include "sta/kg_http.hpp"
#include "sta/llm.hpp"
#include "sta/llm_http.hpp"
#include "sta/metrics.hpp"
#include "sta/preprocessing.hpp"
#include "sta/prompts.hpp"
#include "sta/table.hpp"

namespace sta {

/// Writes via a sibling temp file and rename, so a present file is complete.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

struct Corpus {
    std::vector<Table> tables;
    TargetSet targets;
    bool has_targets = false;
    std::vector<TablePlan> plans;
};

inline Corpus make_corpus(std::vector<Table> tables, std::optional<TargetSet> targets) {
    Corpus c;
    c.tables = std::move(tables);
    c.has_targets = targets.has_value();
    if (targets) c.targets = std::move(*targets);
    for (const auto& t : c.tables) {
        c.plans.push_back(c.has_targets ? TablePlan::from_targets(c.targets, t.table_id) : TablePlan::everything());
    }
    return c;
}

inline Corpus load_corpus(const RunConfig& cfg) {
    auto tables = load_table_dir(cfg.tables, cfg.has_header);
    std::optional<TargetSet> targets;
    if (!cfg.cea_targets.empty() || !cfg.cta_targets.empty()) targets = load_targets(cfg.cea_targets, cfg.cta_targets, tables);
    return make_corpus(std::move(tables), std::move(targets));
}

struct RunResult {
    std::vector<TableResult> tables;
    KgStats kg;
    LlmUsage usage;
    std::optional<MetricsReport> cea_metrics;
    std::optional<MetricsReport> cta_metrics;
};

inline std::string cea_csv(const std::vector<TableResult>& results) {
    std::vector<CeaAnnotation> all;
    for (const auto& r : results) all.insert(all.end(), r.cea.begin(), r.cea.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.cell < b.cell; });
    std::string out;
    for (const auto& a : all) {
        out += csv::format_row({a.cell.table_id, std::to_string(a.cell.row), std::to_string(a.cell.col), a.entity_uri});
    }
    return out;
}

inline std::string cta_csv(const std::vector<TableResult>& results) {
    std::vector<CtaAnnotation> all;
    for (const auto& r : results) all.insert(all.end(), r.cta.begin(), r.cta.end());
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.column < b.column; });
    std::string out;
    for (const auto& a : all) out += csv::format_row({a.column.table_id, std::to_string(a.column.col), a.class_uri});
    return out;
}

inline std::string corrections_csv(const std::vector<TableResult>& results) {
    std::string out;
    for (const auto& r : results) {
        for (const auto& c : r.corrections) {
            out += csv::format_row({c.cell.table_id, std::to_string(c.cell.row), std::to_string(c.cell.col), c.original,
                                    c.corrected, std::string(prompts::to_string(c.kind))});
        }
    }
    return out;
}

/// Counters summed over every column of every table.
struct RunTotals {
    std::size_t columns = 0;
    std::size_t column_errors = 0;
    std::size_t cea_attempted = 0;
    std::size_t reuse_hits = 0;
    std::size_t fresh_annotations = 0;
    std::size_t abstains = 0;
    std::size_t llm_abstains = 0;
    std::size_t fallbacks = 0;
    std::size_t kg_entity_lookups = 0;
    std::size_t kg_class_lookups = 0;
    std::size_t topic_steps = 0;
    std::size_t cta_steps = 0;
    std::size_t correction_batches = 0;

    /// LLM requests the telemetry predicts per task, before any re-ask.
    std::size_t predicted_cea_requests(bool kg_lookup) const {
        return kg_lookup ? fresh_annotations - abstains : fresh_annotations;
    }
};

inline RunTotals totals(const std::vector<TableResult>& results) {
    RunTotals t;
    for (const auto& r : results) {
        for (const auto& c : r.telemetry.columns) {
            ++t.columns;
            if (c.error) ++t.column_errors;
            t.cea_attempted += c.cea_attempted;
            t.reuse_hits += c.reuse_hits;
            t.fresh_annotations += c.fresh_annotations;
            t.abstains += c.abstains;
            t.llm_abstains += c.llm_abstains;
            t.fallbacks += c.fallbacks;
            t.kg_entity_lookups += c.kg_entity_lookups;
            t.kg_class_lookups += c.kg_class_lookups;
            t.topic_steps += std::count(c.tool_sequence.begin(), c.tool_sequence.end(), Tool::ColumnTopic);
            t.cta_steps += std::count(c.tool_sequence.begin(), c.tool_sequence.end(), Tool::CtaSelect);
            if (c.flagged > 0) ++t.correction_batches;
        }
    }
    return t;
}

inline nlohmann::json to_json(const RunTotals& t, bool kg_lookup) {
    return {{"columns", t.columns},
            {"column_errors", t.column_errors},
            {"cea_attempted", t.cea_attempted},
            {"reuse_hits", t.reuse_hits},
            {"fresh_annotations", t.fresh_annotations},
            {"abstains", t.abstains},
            {"llm_abstains", t.llm_abstains},
            {"fallbacks", t.fallbacks},
            {"kg_entity_lookups", t.kg_entity_lookups},
            {"kg_class_lookups", t.kg_class_lookups},
            {"predicted_llm_requests",
             {{"ColumnTopic", t.topic_steps},
              {"CeaSelect", t.predicted_cea_requests(kg_lookup)},
              {"CtaSelect", t.cta_steps},
              {"CellCorrect", t.correction_batches}}}};
}

inline nlohmann::json to_json(const KgStats& s) {
    return {{"requests", s.requests},
            {"cache_hits", s.cache_hits},
            {"backend_calls", s.backend_calls},
            {"retries", s.retries},
            {"failures", s.failures}};
}

/// Annotates a loaded corpus against the given transports. Clients (and so
/// the KG cache and usage counters) are fresh per call.
inline RunResult execute(const RunConfig& cfg, const Corpus& corpus, KgBackend& kg_backend, LlmTransport& llm_transport,
                         const EntityTagger& tagger) {
    KgClientOptions ko;
    ko.cache = cfg.kg.cache;
    ko.attempts = cfg.kg.attempts;
    ko.initial_backoff = std::chrono::milliseconds(cfg.kg.initial_backoff_ms);
    ko.max_in_flight = cfg.kg.max_in_flight;
    KgClient kg(kg_backend, ko);

    LlmClientOptions lo;
    lo.requests_per_minute = cfg.llm.requests_per_minute;
    lo.max_output = cfg.llm.max_output_tokens;
    lo.ontology_namespace = cfg.annotator.ontology_namespace;
    lo.resource_namespace = cfg.llm.resource_namespace;
    LlmClient llm(llm_transport, lo);

    RunResult r;
    r.tables = annotate_corpus(corpus.tables, corpus.plans, AnnotatorDeps{kg, llm, tagger}, cfg.annotator, cfg.workers,
                               cfg.run_scoped_cache);
    r.kg = kg.stats();
    r.usage = llm.usage_report();
    if (!cfg.cea_gold.empty()) {
        r.cea_metrics = score(parse_system(cea_csv(r.tables), Task::CEA), parse_gold(csv::read_file(cfg.cea_gold), Task::CEA),
                              Task::CEA);
    }
    if (!cfg.cta_gold.empty()) {
        r.cta_metrics = score(parse_system(cta_csv(r.tables), Task::CTA), parse_gold(csv::read_file(cfg.cta_gold), Task::CTA),
                              Task::CTA);
    }
    return r;
}

/// Transports selected by the config.
class Backends {
public:
    explicit Backends(const RunConfig& cfg) : record_path_(cfg.kg.mode == KgMode::Record ? cfg.kg.fixture : "") {
        if (cfg.kg.mode == KgMode::Replay) {
            replay_ = std::make_unique<ReplayKgBackend>(KgFixture::load(cfg.kg.fixture));
            kg_ = replay_.get();
        } else {
            HttpKgOptions ho;
            ho.lookup_url = cfg.kg.lookup_url;
            ho.sparql_url = cfg.kg.sparql_url;
            ho.ontology_namespace = cfg.annotator.ontology_namespace;
            ho.timeout = std::chrono::milliseconds(cfg.kg.timeout_ms);
            http_kg_ = std::make_unique<HttpKgBackend>(ho);
            kg_ = http_kg_.get();
            if (cfg.kg.mode == KgMode::Record) {
                recorder_ = std::make_unique<RecordingKgBackend>(*http_kg_);
                kg_ = recorder_.get();
            }
        }
        if (cfg.llm.mode == LlmMode::Stub) {
            llm_ = cfg.llm.stub_fixture.empty() ? std::make_unique<StubLlm>()
                                                : std::make_unique<StubLlm>(StubLlm::load(cfg.llm.stub_fixture));
        } else {
            ChatCompletionOptions co;
            co.base_url = cfg.llm.base_url;
            co.model = cfg.llm.model;
            co.api_key = cfg.llm.api_key;
            co.timeout = std::chrono::milliseconds(cfg.llm.timeout_ms);
            llm_ = std::make_unique<ChatCompletionLlm>(co);
        }
        if (!cfg.gazetteer.empty()) tagger_ = GazetteerTagger::load(cfg.gazetteer);
    }

    KgBackend& kg() { return *kg_; }
    LlmTransport& llm() { return *llm_; }
    const EntityTagger& tagger() const { return tagger_; }

    /// Saves what the recorder captured; no-op unless in record mode.
    void save_recording() const {
        if (recorder_) recorder_->fixture().save(record_path_);
    }

private:
    std::filesystem::path record_path_;
    std::unique_ptr<ReplayKgBackend> replay_;
    std::unique_ptr<HttpKgBackend> http_kg_;
    std::unique_ptr<RecordingKgBackend> recorder_;
    KgBackend* kg_ = nullptr;
    std::unique_ptr<LlmTransport> llm_;
    GazetteerTagger tagger_;
};

inline nlohmann::json telemetry_json(const RunConfig& cfg, const Corpus& corpus, const RunResult& r) {
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& t : r.tables) tables.push_back(to_json(t.telemetry));
    return {{"prompt_version", prompts::kPromptVersion},
            {"config", describe(cfg)},
            {"lookup_text", cfg.annotator.correction ? "corrected" : "original"},
            {"target_warnings", corpus.targets.warnings},
            {"totals", to_json(totals(r.tables), cfg.annotator.kg_lookup)},
            {"tables", tables}};
}

inline void write_outputs(const RunConfig& cfg, const Corpus& corpus, const RunResult& r) {
    const auto& dir = cfg.output;
    write_file_atomic(dir / "cea.csv", cea_csv(r.tables));
    write_file_atomic(dir / "cta.csv", cta_csv(r.tables));
    write_file_atomic(dir / "corrections.csv", corrections_csv(r.tables));
    write_file_atomic(dir / "telemetry.json", telemetry_json(cfg, corpus, r).dump(2) + "\n");
    write_file_atomic(dir / "usage.json", r.usage.to_json().dump(2) + "\n");
    // Cache hit counters live apart from telemetry so that the cache setting
    // does not change telemetry.json.
    write_file_atomic(dir / "kg_stats.json", to_json(r.kg).dump(2) + "\n");
    if (r.cea_metrics || r.cta_metrics) {
        nlohmann::json m = nlohmann::json::object();
        if (r.cea_metrics) m["cea"] = r.cea_metrics->to_json();
        if (r.cta_metrics) m["cta"] = r.cta_metrics->to_json();
        write_file_atomic(dir / "metrics.json", m.dump(2) + "\n");
    }
}

/// Full annotate command: validate, load, annotate, write.
inline RunResult run(const RunConfig& cfg) {
    validate(cfg);
    const auto corpus = load_corpus(cfg);
    Backends backends(cfg);
    auto r = execute(cfg, corpus, backends.kg(), backends.llm(), backends.tagger());
    write_outputs(cfg, corpus, r);
    backends.save_recording();
    return r;
}

struct AblationVariant {
    std::string name;
    RunConfig config;
};

inline constexpr std::size_t kSweepValues[] = {1, 5, 10, 15};

/// Axis: "all", "k", "toggles", or a single variant name. The baseline is
/// always the first row.
inline std::vector<AblationVariant> ablation_variants(const RunConfig& base, const std::string& axis) {
    std::vector<AblationVariant> all;
    all.push_back({"baseline", base});
    for (auto k : kSweepValues) {
        auto c = base;
        c.annotator.cea_candidate_limit = k;
        c.annotator.cta_shortlist_limit = k;
        all.push_back({"k=" + std::to_string(k), c});
    }
    auto toggled = [&](const char* name, bool AnnotatorConfig::*flag) {
        auto c = base;
        c.annotator.*flag = false;
        all.push_back({name, c});
    };
    toggled("no_dedup", &AnnotatorConfig::dedup);
    toggled("no_topic_detection", &AnnotatorConfig::topic_detection);
    toggled("no_kg_lookup", &AnnotatorConfig::kg_lookup);
    toggled("no_lev_reuse", &AnnotatorConfig::lev_reuse);

    if (axis == "all") return all;
    std::vector<AblationVariant> out{all.front()};
    for (std::size_t i = 1; i < all.size(); ++i) {
        const auto& n = all[i].name;
        const bool is_k = n.rfind("k=", 0) == 0;
        if ((axis == "k" && is_k) || (axis == "toggles" && !is_k) || axis == n) out.push_back(all[i]);
    }
    if (out.size() == 1 && axis != "baseline") throw ConfigError("unknown ablation axis: " + axis);
    return out;
}

struct AblationRow {
    std::string name;
    RunResult result;
    RunTotals totals;
    std::int64_t wall_ms = 0;
};

/// Runs every variant over one corpus and one set of transports.
inline std::vector<AblationRow> ablate(const std::vector<AblationVariant>& variants, const Corpus& corpus, Backends& backends) {
    std::vector<AblationRow> rows;
    for (const auto& v : variants) {
        validate(v.config);
        const auto t0 = std::chrono::steady_clock::now();
        auto r = execute(v.config, corpus, backends.kg(), backends.llm(), backends.tagger());
        const auto t1 = std::chrono::steady_clock::now();
        AblationRow row;
        row.name = v.name;
        row.totals = totals(r.tables);
        row.result = std::move(r);
        row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
        rows.push_back(std::move(row));
    }
    return rows;
}

inline nlohmann::json ablation_json(const std::vector<AblationRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json calls = nlohmann::json::object();
        for (auto t : kAllLlmTasks) calls[std::string(to_string(t))] = row.result.usage.per_task[static_cast<std::size_t>(t)].call_count;
        nlohmann::json j = {{"variant", row.name},
                            {"llm_calls", calls},
                            {"llm_tokens", row.result.usage.total().prompt_tokens + row.result.usage.total().completion_tokens},
                            {"kg_backend_calls", row.result.kg.backend_calls},
                            {"kg_requests", row.result.kg.requests},
                            {"fresh_annotations", row.totals.fresh_annotations},
                            {"reuse_hits", row.totals.reuse_hits},
                            {"wall_ms", row.wall_ms}};
        j["cea"] = row.result.cea_metrics ? row.result.cea_metrics->to_json() : nlohmann::json(nullptr);
        j["cta"] = row.result.cta_metrics ? row.result.cta_metrics->to_json() : nlohmann::json(nullptr);
        out.push_back(std::move(j));
    }
    return out;
}

/// Fixed-width summary for the terminal.
inline std::string ablation_table(const std::vector<AblationRow>& rows) {
    auto f1 = [](const std::optional<MetricsReport>& m) {
        if (!m) return std::string("     -");
        char buf[16];
        std::snprintf(buf, sizeof buf, "%6.3f", m->f1);
        return std::string(buf);
    };
    std::string out = "variant               CEA-F1 CTA-F1  llm-calls  kg-calls  fresh  reused  wall-ms\n";
    for (const auto& r : rows) {
        char line[256];
        std::snprintf(line, sizeof line, "%-20s %s %s %10zu %9zu %6zu %7zu %8lld\n", r.name.c_str(), f1(r.result.cea_metrics).c_str(),
                      f1(r.result.cta_metrics).c_str(), r.result.usage.total().call_count, r.result.kg.backend_calls,
                      r.totals.fresh_annotations, r.totals.reuse_hits, static_cast<long long>(r.wall_ms));
        out += line;
    }
    return out;
}

}  // namespace sta

#endif  // STA_RUN_HPP
