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

// The annotation engine.
//
// Each column follows one of three workflows, picked from its ColumnVariant:
//
//   HeaderlessWithCells    ColumnTopic -> CellAnnotation -> ClassLookup -> RankClasses -> CtaSelect
//   FullyMeaningful        CellAnnotation -> ClassLookup -> RankClasses -> CtaSelect
//   HeadersWithEmptyCells  CtaSelect (free-form, from headers only; no CEA)
//
// A small router picks the next tool from the column state until nothing is
// left to do, bounded by max_steps. CellAnnotation walks the column's cells:
// a cell close enough to an already annotated cell of the same table reuses
// that annotation, every other cell goes through entity lookup and LLM
// selection. Columns of a table run in order because the reuse cache is
// order-dependent; tables run in parallel.

#ifndef STA_ANNOTATOR_HPP
#define STA_ANNOTATOR_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "sta/annotation_cache.hpp"
#include "sta/cta_score.hpp"
#include "sta/kg.hpp"
#include "sta/llm.hpp"
#include "sta/preprocessing.hpp"
#include "sta/table.hpp"

namespace sta {

struct AnnotatorConfig {
    std::size_t rep_cell_limit = 10;
    std::size_t cea_candidate_limit = 10;
    std::size_t cta_shortlist_limit = 10;
    std::size_t class_depth_m = 10;
    double threshold_factor_k = 0.2;
    std::size_t max_steps = 12;
    SituationThresholds situation;
    std::string ontology_namespace = "http://dbpedia.org/ontology/";

    bool dedup = true;
    bool topic_detection = true;
    bool kg_lookup = true;
    bool lev_reuse = true;
    bool correction = true;
};

enum class Provenance { LlmSelected, ReusedViaLevenshtein, Fallback };

inline std::string_view to_string(Provenance p) {
    switch (p) {
        case Provenance::LlmSelected: return "LlmSelected";
        case Provenance::ReusedViaLevenshtein: return "ReusedViaLevenshtein";
        case Provenance::Fallback: return "Fallback";
    }
    return "?";
}

struct CeaAnnotation {
    CellRef cell;
    std::string entity_uri;
    Provenance provenance = Provenance::LlmSelected;

    friend bool operator==(const CeaAnnotation&, const CeaAnnotation&) = default;
};

struct CtaAnnotation {
    ColumnRef column;
    std::string class_uri;
    double score = 0.0;  // CTA score of the chosen class; 0 on the headers-only pathway

    friend bool operator==(const CtaAnnotation&, const CtaAnnotation&) = default;
};

enum class Tool { ColumnTopic, CellAnnotation, ClassLookup, RankClasses, CtaSelect };

inline std::string_view to_string(Tool t) {
    switch (t) {
        case Tool::ColumnTopic: return "ColumnTopic";
        case Tool::CellAnnotation: return "CellAnnotation";
        case Tool::ClassLookup: return "ClassLookup";
        case Tool::RankClasses: return "RankClasses";
        case Tool::CtaSelect: return "CtaSelect";
    }
    return "?";
}

struct ColumnTelemetry {
    std::size_t col = 0;
    ColumnVariant variant = ColumnVariant::FullyMeaningful;
    std::string working_header;
    std::vector<Tool> tool_sequence;
    std::size_t flagged = 0;
    std::size_t corrected = 0;
    std::size_t cea_attempted = 0;      // cells that entered the reuse-or-annotate loop
    std::size_t reuse_hits = 0;
    std::size_t fresh_annotations = 0;  // cells sent down the lookup + selection path
    std::size_t abstains = 0;           // fresh cells with no candidates
    std::size_t llm_abstains = 0;       // fresh cells where the model picked none
    std::size_t fallbacks = 0;
    std::size_t kg_entity_lookups = 0;
    std::size_t kg_class_lookups = 0;
    std::string cta_pathway = "none";   // "candidates", "headers_only" or "none"
    bool cta_abstained = false;
    std::vector<std::string> warnings;
    std::optional<std::string> error;
};

struct TableTelemetry {
    std::string table_id;
    std::vector<ColumnTelemetry> columns;
    std::size_t cache_entries = 0;

    std::size_t sum(std::size_t ColumnTelemetry::*field) const {
        std::size_t s = 0;
        for (const auto& c : columns) s += c.*field;
        return s;
    }
};

struct TableResult {
    std::vector<CeaAnnotation> cea;
    std::vector<CtaAnnotation> cta;
    std::vector<CellCorrection> corrections;
    TableTelemetry telemetry;
};

/// Which cells and columns of one table are to be annotated. An unrestricted
/// plan annotates every non-empty cell and every column.
struct TablePlan {
    bool restricted = false;
    std::map<std::size_t, std::vector<std::size_t>> cea_rows;  // col -> sorted rows
    std::set<std::size_t> cta_cols;

    static TablePlan everything() { return {}; }

    static TablePlan from_targets(const TargetSet& targets, const std::string& table_id) {
        TablePlan p;
        p.restricted = true;
        for (const auto& t : targets.cea_targets) {
            if (t.table_id == table_id) p.cea_rows[t.col].push_back(t.row);
        }
        for (auto& [c, rows] : p.cea_rows) {
            std::sort(rows.begin(), rows.end());
            rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        }
        for (const auto& t : targets.cta_targets) {
            if (t.table_id == table_id) p.cta_cols.insert(t.col);
        }
        return p;
    }
};

struct AnnotatorDeps {
    KgClient& kg;
    LlmClient& llm;
    const EntityTagger& tagger;
};

struct CellOutcome {
    std::optional<CeaAnnotation> annotation;
    bool reused = false;
    bool fresh = false;
    bool no_candidates = false;
    bool llm_abstained = false;
    std::string warning;
};

/// Annotates one cell: reuse from `cache` when a close enough annotated cell
/// exists, otherwise entity lookup plus LLM selection. Every annotation is
/// appended to the cache. `cache` may be null when reuse is disabled.
inline CellOutcome annotate_cell(const CellRef& ref, const std::string& cell_text, const std::vector<std::string>& row_context,
                                 const std::string& header, AnnotationCache* cache, AnnotatorDeps& deps,
                                 const AnnotatorConfig& cfg) {
    CellOutcome out;
    if (cell_text.empty()) return out;
    if (cache && cfg.lev_reuse) {
        if (auto uri = try_reuse(cell_text, *cache)) {
            out.reused = true;
            out.annotation = CeaAnnotation{ref, *uri, Provenance::ReusedViaLevenshtein};
            cache->add(cell_text, *uri);
            return out;
        }
    }
    out.fresh = true;
    CeaChoice choice;
    if (cfg.kg_lookup) {
        const auto candidates = deps.kg.lookup_entities(cell_text, cfg.cea_candidate_limit);
        if (candidates.empty()) {
            out.no_candidates = true;
            return out;
        }
        choice = deps.llm.select_cea(cell_text, row_context, header, candidates);
    } else {
        choice = deps.llm.name_entity(cell_text, row_context, header);
    }
    out.warning = choice.warning;
    if (!choice.entity) {
        out.llm_abstained = true;
        return out;
    }
    out.annotation = CeaAnnotation{ref, choice.entity->uri, choice.fallback ? Provenance::Fallback : Provenance::LlmSelected};
    if (cache && cfg.lev_reuse) cache->add(cell_text, choice.entity->uri);
    return out;
}

namespace detail {

struct ColumnState {
    std::size_t col = 0;
    ColumnVariant variant = ColumnVariant::FullyMeaningful;
    std::vector<std::size_t> cea_rows;  // rows whose annotations are emitted
    std::vector<std::size_t> support_rows;  // rows annotated only to seed CTA
    bool cta_needed = false;

    bool topic_done = false;
    bool cells_done = false;
    bool classes_done = false;
    bool ranked = false;
    bool cta_done = false;

    std::string working_header;
    std::vector<CeaAnnotation> annotations;  // emitted and support, row order
    std::vector<std::vector<CandidateClass>> class_lists;
    std::vector<ScoredClass> scored;
};

inline bool has_cells(const ColumnState& s) { return !s.cea_rows.empty() || !s.support_rows.empty(); }

inline std::optional<Tool> next_tool(const ColumnState& s, const AnnotatorConfig& cfg) {
    const bool with_cells = s.variant != ColumnVariant::HeadersWithEmptyCells;
    if (s.variant == ColumnVariant::HeaderlessWithCells && cfg.topic_detection && !s.topic_done) return Tool::ColumnTopic;
    if (with_cells && has_cells(s) && !s.cells_done) return Tool::CellAnnotation;
    if (s.cta_needed && with_cells && cfg.kg_lookup && !s.annotations.empty() && !s.classes_done) return Tool::ClassLookup;
    if (s.classes_done && !s.ranked) return Tool::RankClasses;
    if (s.cta_needed && !s.cta_done) return Tool::CtaSelect;
    return std::nullopt;
}

inline std::vector<std::string> other_headers(const Table& t, std::size_t col) {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < t.n_cols(); ++c) {
        if (c != col && t.headers[c]) out.push_back(*t.headers[c]);
    }
    return out;
}

inline std::vector<std::string> rep_cells(const std::vector<std::string>& cells, const AnnotatorConfig& cfg) {
    return cfg.dedup ? dedup_representative_cells(cells, cfg.rep_cell_limit) : first_non_empty_cells(cells, cfg.rep_cell_limit);
}

}  // namespace detail

/// Annotates one table. `shared_cache` widens the reuse scope beyond this
/// table; when null a fresh per-table cache is used. KgFixtureMiss escapes;
/// any other per-column failure is recorded in telemetry and the remaining
/// columns continue.
inline TableResult annotate_table(const Table& table, const TablePlan& plan, AnnotatorDeps deps, const AnnotatorConfig& cfg,
                                  AnnotationCache* shared_cache = nullptr) {
    TableResult result;
    result.telemetry.table_id = table.table_id;
    AnnotationCache local_cache(cfg.threshold_factor_k);
    AnnotationCache* cache = shared_cache ? shared_cache : &local_cache;
    CorrectionOverlay overlay;
    const auto situation = classify_table(table, cfg.situation);

    for (std::size_t col = 0; col < table.n_cols(); ++col) {
        detail::ColumnState st;
        st.col = col;
        st.variant = situation.columns[col];
        st.working_header = table.header_or_empty(col);

        if (plan.restricted) {
            if (auto it = plan.cea_rows.find(col); it != plan.cea_rows.end()) st.cea_rows = it->second;
            st.cta_needed = plan.cta_cols.count(col) > 0;
        } else {
            for (std::size_t r = 0; r < table.n_rows(); ++r) {
                if (!table.cell(r, col).empty()) st.cea_rows.push_back(r);
            }
            st.cta_needed = true;
        }
        if (st.cea_rows.empty() && !st.cta_needed) continue;
        if (st.variant == ColumnVariant::HeadersWithEmptyCells) st.cea_rows.clear();

        ColumnTelemetry tel;
        tel.col = col;
        tel.variant = st.variant;
        try {
            if (st.variant != ColumnVariant::HeadersWithEmptyCells && cfg.correction) {
                const auto cells = table.column(col);
                const auto reps = detail::rep_cells(cells, cfg);
                const auto profile = profile_entity_types(reps, deps.tagger, {table.table_id, col});
                const auto flags = flag_inconsistent_cells(table, col, profile, deps.tagger);
                tel.flagged = flags.size();
                if (!flags.empty()) {
                    std::vector<std::pair<CellRef, std::string>> work;
                    for (const auto& f : flags) work.emplace_back(f, table.cell(f.row, f.col));
                    std::string warning;
                    auto fixes = correct_cells(work, table.header_or_empty(col), reps, deps.llm, &warning);
                    if (!warning.empty()) tel.warnings.push_back(warning);
                    for (auto& f : fixes) {
                        overlay.apply(f);
                        if (f.kind != prompts::CorrectionKind::Unchanged) ++tel.corrected;
                        result.corrections.push_back(std::move(f));
                    }
                }
            }

            const auto working_cells = overlay.column(table, col);
            if (st.cta_needed && st.cea_rows.empty() && st.variant != ColumnVariant::HeadersWithEmptyCells) {
                // CTA candidates come from annotated cells; annotate a few
                // representative cells without emitting them.
                std::unordered_set<std::string> seen;
                for (std::size_t r = 0; r < table.n_rows() && st.support_rows.size() < cfg.rep_cell_limit; ++r) {
                    const auto& c = working_cells[r];
                    if (c.empty() || (cfg.dedup && !seen.insert(c).second)) continue;
                    st.support_rows.push_back(r);
                }
            }

            std::size_t steps = 0;
            while (auto tool = detail::next_tool(st, cfg)) {
                if (steps++ >= cfg.max_steps) throw Error("tool step budget exhausted");
                tel.tool_sequence.push_back(*tool);
                switch (*tool) {
                    case Tool::ColumnTopic: {
                        const auto reps = detail::rep_cells(working_cells, cfg);
                        if (!reps.empty()) {
                            auto topic = deps.llm.detect_column_topic(reps, detail::other_headers(table, col));
                            if (!topic.warning.empty()) tel.warnings.push_back(topic.warning);
                            st.working_header = topic.topic;
                        }
                        st.topic_done = true;
                        break;
                    }
                    case Tool::CellAnnotation: {
                        const bool emit = !st.cea_rows.empty();
                        const auto& rows = emit ? st.cea_rows : st.support_rows;
                        for (std::size_t r : rows) {
                            const auto& cell_text = working_cells[r];
                            if (cell_text.empty()) continue;
                            ++tel.cea_attempted;
                            auto row = overlay.row(table, r);
                            row.erase(row.begin() + static_cast<std::ptrdiff_t>(col));
                            auto oc = annotate_cell({table.table_id, r, col}, cell_text, row, st.working_header,
                                                    cfg.lev_reuse ? cache : nullptr, deps, cfg);
                            if (oc.reused) ++tel.reuse_hits;
                            if (oc.fresh) {
                                ++tel.fresh_annotations;
                                if (cfg.kg_lookup) ++tel.kg_entity_lookups;
                            }
                            if (oc.no_candidates) ++tel.abstains;
                            if (oc.llm_abstained) ++tel.llm_abstains;
                            if (!oc.warning.empty()) tel.warnings.push_back(oc.warning);
                            if (oc.annotation) {
                                if (oc.annotation->provenance == Provenance::Fallback) ++tel.fallbacks;
                                st.annotations.push_back(*oc.annotation);
                                if (emit) result.cea.push_back(*oc.annotation);
                            }
                        }
                        st.cells_done = true;
                        break;
                    }
                    case Tool::ClassLookup: {
                        std::unordered_set<std::string> seen;
                        std::size_t used = 0;
                        for (const auto& a : st.annotations) {
                            if (used >= cfg.rep_cell_limit) break;
                            if (cfg.dedup && !seen.insert(working_cells[a.cell.row]).second) continue;
                            ++used;
                            ++tel.kg_class_lookups;
                            auto classes = deps.kg.entity_classes(a.entity_uri, cfg.class_depth_m);
                            std::vector<CandidateClass> kept;
                            for (auto& c : classes) {
                                if (c.uri.rfind(cfg.ontology_namespace, 0) == 0) kept.push_back(std::move(c));
                            }
                            for (std::size_t i = 0; i < kept.size(); ++i) kept[i].rank = i + 1;
                            st.class_lists.push_back(std::move(kept));
                        }
                        st.classes_done = true;
                        break;
                    }
                    case Tool::RankClasses: {
                        st.scored = cta_scores(st.class_lists);
                        st.ranked = true;
                        break;
                    }
                    case Tool::CtaSelect: {
                        std::vector<CandidateClass> shortlist;
                        for (std::size_t i = 0; i < st.scored.size() && i < cfg.cta_shortlist_limit; ++i) {
                            shortlist.push_back({st.scored[i].class_uri, text::local_name(st.scored[i].class_uri), i + 1});
                        }
                        const auto reps = detail::rep_cells(working_cells, cfg);
                        tel.cta_pathway = shortlist.empty() ? "headers_only" : "candidates";
                        auto choice = deps.llm.select_cta(st.working_header, reps, detail::other_headers(table, col), shortlist);
                        if (!choice.warning.empty()) tel.warnings.push_back(choice.warning);
                        if (choice.class_uri) {
                            const double score = choice.option ? st.scored[*choice.option].cta_score : 0.0;
                            result.cta.push_back({{table.table_id, col}, *choice.class_uri, score});
                        } else {
                            tel.cta_abstained = true;
                        }
                        st.cta_done = true;
                        break;
                    }
                }
            }
        } catch (const KgFixtureMiss&) {
            throw;
        } catch (const std::exception& e) {
            tel.error = e.what();
        }
        tel.working_header = st.working_header;
        result.telemetry.columns.push_back(std::move(tel));
    }
    result.telemetry.cache_entries = cache->size();
    return result;
}

/// Annotates tables on `workers` threads. Results keep the input order. With
/// a run-wide reuse cache the tables run sequentially.
inline std::vector<TableResult> annotate_corpus(const std::vector<Table>& tables, const std::vector<TablePlan>& plans,
                                                AnnotatorDeps deps, const AnnotatorConfig& cfg, std::size_t workers,
                                                bool run_scoped_cache = false) {
    std::vector<TableResult> results(tables.size());
    if (run_scoped_cache) {
        AnnotationCache cache(cfg.threshold_factor_k);
        for (std::size_t i = 0; i < tables.size(); ++i) results[i] = annotate_table(tables[i], plans[i], deps, cfg, &cache);
        return results;
    }
    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(tables.size(), 1));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(tables.size());
    const std::function<void()> work = [&] {
        for (std::size_t i = next++; i < tables.size(); i = next++) {
            try {
                results[i] = annotate_table(tables[i], plans[i], deps, cfg);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
        work();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return results;
}

inline nlohmann::json to_json(const ColumnTelemetry& c) {
    nlohmann::json tools = nlohmann::json::array();
    for (auto t : c.tool_sequence) tools.push_back(to_string(t));
    nlohmann::json j = {{"col", c.col},
                        {"variant", to_string(c.variant)},
                        {"working_header", c.working_header},
                        {"tool_sequence", tools},
                        {"flagged", c.flagged},
                        {"corrected", c.corrected},
                        {"cea_attempted", c.cea_attempted},
                        {"reuse_hits", c.reuse_hits},
                        {"fresh_annotations", c.fresh_annotations},
                        {"abstains", c.abstains},
                        {"llm_abstains", c.llm_abstains},
                        {"fallbacks", c.fallbacks},
                        {"kg_entity_lookups", c.kg_entity_lookups},
                        {"kg_class_lookups", c.kg_class_lookups},
                        {"cta_pathway", c.cta_pathway},
                        {"cta_abstained", c.cta_abstained},
                        {"warnings", c.warnings}};
    j["error"] = c.error ? nlohmann::json(*c.error) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const TableTelemetry& t) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : t.columns) cols.push_back(to_json(c));
    return {{"table_id", t.table_id}, {"cache_entries", t.cache_entries}, {"columns", cols}};
}

}  // namespace sta

#endif  // STA_ANNOTATOR_HPP
