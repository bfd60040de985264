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

// sta: annotate tables, score annotation files, run ablations, record KG
// fixtures.
//
// Exit status: 0 success, 1 runtime error, 2 bad configuration or usage,
// 3 replay fixture miss.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sta/config.hpp"
#include "sta/metrics.hpp"
#include "sta/run.hpp"

namespace {

// Flags shared by annotate, ablate and record-fixtures. Unset flags leave
// the config file / environment value alone.
struct RunFlags {
    std::optional<std::string> config;
    std::optional<std::string> tables, cea_targets, cta_targets, cea_gold, cta_gold, output, gazetteer;
    bool no_header = false;
    std::optional<std::string> kg_mode, kg_fixture, llm_mode, llm_stub, llm_model, reuse_scope;
    std::optional<std::size_t> rep_cell_limit, cea_candidate_limit, cta_shortlist_limit, class_depth_m, workers, max_steps;
    std::optional<double> k, rpm;
    bool no_dedup = false, no_topic = false, no_kg_lookup = false, no_lev_reuse = false, no_correction = false,
         no_kg_cache = false;

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config, "JSON config file");
        app->add_option("--tables", tables, "Directory of table CSV files");
        app->add_flag("--no-header", no_header, "Tables have no header row");
        app->add_option("--cea-targets", cea_targets, "CEA target file (table_id,row,col)");
        app->add_option("--cta-targets", cta_targets, "CTA target file (table_id,col)");
        app->add_option("--cea-gold", cea_gold, "CEA gold file");
        app->add_option("--cta-gold", cta_gold, "CTA gold file");
        app->add_option("-o,--output", output, "Output directory");
        app->add_option("--gazetteer", gazetteer, "Gazetteer JSON for the entity tagger");
        app->add_option("--kg-mode", kg_mode, "replay, record or live")->check(CLI::IsMember({"replay", "record", "live"}));
        app->add_option("--kg-fixture", kg_fixture, "KG fixture (read in replay mode, written in record mode)");
        app->add_option("--llm-mode", llm_mode, "stub or http")->check(CLI::IsMember({"stub", "http"}));
        app->add_option("--llm-stub", llm_stub, "Scripted LLM fixture");
        app->add_option("--llm-model", llm_model, "Model name for the http LLM");
        app->add_option("--rpm", rpm, "LLM requests per minute (0 = unlimited)");
        app->add_option("--rep-cell-limit", rep_cell_limit, "Representative cells per column");
        app->add_option("--cea-candidates", cea_candidate_limit, "Entity candidates per cell");
        app->add_option("--cta-shortlist", cta_shortlist_limit, "Classes offered to the final CTA choice");
        app->add_option("--class-depth", class_depth_m, "Classes fetched per entity");
        app->add_option("-k,--threshold-factor", k, "Reuse distance factor");
        app->add_option("--max-steps", max_steps, "Tool steps per column");
        app->add_option("-j,--workers", workers, "Tables annotated in parallel");
        app->add_option("--reuse-scope", reuse_scope, "table or run")->check(CLI::IsMember({"table", "run"}));
        app->add_flag("--no-dedup", no_dedup, "Representative cells keep duplicates");
        app->add_flag("--no-topic-detection", no_topic, "Skip column topic detection");
        app->add_flag("--no-kg-lookup", no_kg_lookup, "Annotate from the LLM alone");
        app->add_flag("--no-lev-reuse", no_lev_reuse, "Disable annotation reuse");
        app->add_flag("--no-correction", no_correction, "Skip cell correction");
        app->add_flag("--no-kg-cache", no_kg_cache, "Disable the KG response cache");
    }

    sta::RunConfig resolve() const {
        sta::RunConfig c = config ? sta::load_config(*config) : sta::RunConfig{};
        sta::apply_env(c);
        if (tables) c.tables = *tables;
        if (no_header) c.has_header = false;
        if (cea_targets) c.cea_targets = *cea_targets;
        if (cta_targets) c.cta_targets = *cta_targets;
        if (cea_gold) c.cea_gold = *cea_gold;
        if (cta_gold) c.cta_gold = *cta_gold;
        if (output) c.output = *output;
        if (gazetteer) c.gazetteer = *gazetteer;
        if (kg_mode) c.kg.mode = *kg_mode == "replay" ? sta::KgMode::Replay : *kg_mode == "record" ? sta::KgMode::Record : sta::KgMode::Live;
        if (kg_fixture) c.kg.fixture = *kg_fixture;
        if (llm_mode) c.llm.mode = *llm_mode == "stub" ? sta::LlmMode::Stub : sta::LlmMode::Http;
        if (llm_stub) c.llm.stub_fixture = *llm_stub;
        if (llm_model) c.llm.model = *llm_model;
        if (rpm) c.llm.requests_per_minute = *rpm;
        auto& a = c.annotator;
        if (rep_cell_limit) a.rep_cell_limit = *rep_cell_limit;
        if (cea_candidate_limit) a.cea_candidate_limit = *cea_candidate_limit;
        if (cta_shortlist_limit) a.cta_shortlist_limit = *cta_shortlist_limit;
        if (class_depth_m) a.class_depth_m = *class_depth_m;
        if (k) a.threshold_factor_k = *k;
        if (max_steps) a.max_steps = *max_steps;
        if (workers) c.workers = *workers;
        if (reuse_scope) c.run_scoped_cache = *reuse_scope == "run";
        if (no_dedup) a.dedup = false;
        if (no_topic) a.topic_detection = false;
        if (no_kg_lookup) a.kg_lookup = false;
        if (no_lev_reuse) a.lev_reuse = false;
        if (no_correction) a.correction = false;
        if (no_kg_cache) c.kg.cache = false;
        return c;
    }
};

void print_metrics(const sta::RunResult& r) {
    for (const auto* m : {&r.cea_metrics, &r.cta_metrics}) {
        if (*m) std::cout << (*m)->to_json().dump() << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semantic table annotation"};
    app.require_subcommand(1);

    RunFlags annotate_flags;
    auto* annotate = app.add_subcommand("annotate", "Annotate a directory of tables");
    annotate_flags.attach(annotate);

    std::string system_file, gold_file, task_name, score_out;
    auto* score = app.add_subcommand("score", "Score a system file against gold");
    score->add_option("--system", system_file, "System annotations")->required();
    score->add_option("--gold", gold_file, "Gold annotations")->required();
    score->add_option("--task", task_name, "cea or cta")->required()->check(CLI::IsMember({"cea", "cta"}));
    score->add_option("-o,--output", score_out, "Write the report JSON here too");

    RunFlags ablate_flags;
    std::string axis = "all";
    auto* ablate = app.add_subcommand("ablate", "Run ablation variants over one corpus");
    ablate_flags.attach(ablate);
    ablate->add_option("--axis", axis, "all, k, toggles, or one variant name (e.g. no_lev_reuse, k=5)");

    RunFlags record_flags;
    std::string record_axis = "all";
    auto* record = app.add_subcommand("record-fixtures", "Record a KG fixture covering every ablation variant");
    record_flags.attach(record);
    record->add_option("--axis", record_axis, "Variants to cover (as for ablate)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*annotate) {
            const auto cfg = annotate_flags.resolve();
            const auto r = sta::run(cfg);
            const auto t = sta::totals(r.tables);
            std::cerr << "annotated " << r.tables.size() << " tables, " << t.cea_attempted << " cells (" << t.reuse_hits
                      << " reused), " << t.columns << " columns";
            if (t.column_errors) std::cerr << ", " << t.column_errors << " column errors (see telemetry.json)";
            std::cerr << "\n";
            print_metrics(r);
        } else if (*score) {
            const auto task = task_name == "cea" ? sta::Task::CEA : sta::Task::CTA;
            const auto m = sta::score_files(system_file, gold_file, task);
            const auto text = m.to_json().dump(2) + "\n";
            if (!score_out.empty()) sta::write_file_atomic(score_out, text);
            std::cout << text;
        } else if (*ablate || *record) {
            auto cfg = (*ablate ? ablate_flags : record_flags).resolve();
            if (*record) cfg.kg.mode = sta::KgMode::Record;
            sta::validate(cfg);
            const auto corpus = sta::load_corpus(cfg);
            sta::Backends backends(cfg);
            const auto rows = sta::ablate(sta::ablation_variants(cfg, *ablate ? axis : record_axis), corpus, backends);
            if (*ablate) {
                sta::write_file_atomic(cfg.output / "ablation.json", sta::ablation_json(rows).dump(2) + "\n");
                std::cout << sta::ablation_table(rows);
            } else {
                backends.save_recording();
                std::cerr << "recorded " << rows.size() << " variants into " << cfg.kg.fixture << "\n";
            }
        }
    } catch (const sta::KgFixtureMiss& e) {
        std::cerr << "error: KG fixture has no entry for " << e.key() << "\n";
        return 3;
    } catch (const sta::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
