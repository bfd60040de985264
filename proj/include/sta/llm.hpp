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

// LLM access behind four task-shaped operations.
//
// LlmTransport sends one request and returns raw text. LlmClient builds the
// prompts, parses answers, re-asks once on a malformed answer and then falls
// back deterministically, and keeps per-task usage counters.
//
// Each request also carries the salient prompt fields in structured form
// (subject, options, items). Live transports ignore them; StubLlm answers from
// them, which keeps the stub a pure function of the prompt.

#ifndef STA_LLM_HPP
#define STA_LLM_HPP

#include <algorithm>
#include <array>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sta/error.hpp"
#include "sta/kg.hpp"
#include "sta/prompts.hpp"
#include "sta/text.hpp"

namespace sta {

enum class LlmTask { ColumnTopic = 0, CeaSelect = 1, CtaSelect = 2, CellCorrect = 3 };

inline constexpr std::array<LlmTask, 4> kAllLlmTasks = {LlmTask::ColumnTopic, LlmTask::CeaSelect,
                                                         LlmTask::CtaSelect, LlmTask::CellCorrect};

inline std::string_view to_string(LlmTask t) {
    switch (t) {
        case LlmTask::ColumnTopic: return "ColumnTopic";
        case LlmTask::CeaSelect: return "CeaSelect";
        case LlmTask::CtaSelect: return "CtaSelect";
        case LlmTask::CellCorrect: return "CellCorrect";
    }
    return "?";
}

struct LlmRequest {
    LlmTask task = LlmTask::ColumnTopic;
    std::string prompt;
    std::size_t max_output = 64;

    std::string subject;               // cell text, header, or joined cells
    std::vector<std::string> options;  // candidate URIs, in prompt order
    std::vector<std::string> items;    // cells listed in the prompt
};

struct LlmResponse {
    std::string text;
    std::optional<std::size_t> prompt_tokens;
    std::optional<std::size_t> completion_tokens;
};

class LlmTransport {
public:
    virtual ~LlmTransport() = default;
    /// Throws LlmError on transport failure.
    virtual LlmResponse complete(const LlmRequest& request) = 0;
};

/// Rough token estimate used when a backend does not report usage.
inline std::size_t estimate_tokens(std::string_view s) { return (s.size() + 3) / 4; }

struct TaskUsage {
    std::size_t prompt_tokens = 0;
    std::size_t completion_tokens = 0;
    std::size_t call_count = 0;
    std::size_t failures = 0;

    friend bool operator==(const TaskUsage&, const TaskUsage&) = default;
};

struct LlmUsage {
    std::array<TaskUsage, 4> per_task{};

    const TaskUsage& operator[](LlmTask t) const { return per_task[static_cast<std::size_t>(t)]; }
    TaskUsage& operator[](LlmTask t) { return per_task[static_cast<std::size_t>(t)]; }

    friend bool operator==(const LlmUsage&, const LlmUsage&) = default;

    TaskUsage total() const {
        TaskUsage s;
        for (const auto& u : per_task) {
            s.prompt_tokens += u.prompt_tokens;
            s.completion_tokens += u.completion_tokens;
            s.call_count += u.call_count;
            s.failures += u.failures;
        }
        return s;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        for (auto t : kAllLlmTasks) {
            const auto& u = (*this)[t];
            j["tasks"][std::string(to_string(t))] = {{"prompt_tokens", u.prompt_tokens},
                                                     {"completion_tokens", u.completion_tokens},
                                                     {"call_count", u.call_count},
                                                     {"failures", u.failures}};
        }
        const auto s = total();
        j["total"] = {{"prompt_tokens", s.prompt_tokens},
                      {"completion_tokens", s.completion_tokens},
                      {"call_count", s.call_count},
                      {"failures", s.failures}};
        return j;
    }
};

/// Token bucket: `per_minute` requests per minute with a burst of the same
/// size. Zero disables limiting.
class RateLimiter {
public:
    explicit RateLimiter(double per_minute = 0.0) : rate_(per_minute / 60.0), capacity_(per_minute), tokens_(per_minute) {}

    void acquire() {
        if (rate_ <= 0.0) return;
        for (;;) {
            std::chrono::duration<double> wait{};
            {
                std::lock_guard lock(mu_);
                refill();
                if (tokens_ >= 1.0) {
                    tokens_ -= 1.0;
                    return;
                }
                wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
            }
            std::this_thread::sleep_for(wait);
        }
    }

private:
    void refill() {
        const auto now = std::chrono::steady_clock::now();
        const std::chrono::duration<double> dt = now - last_;
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + dt.count() * rate_);
    }

    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
    std::mutex mu_;
};

/// Scripted offline backend.
///
/// Fixture JSON (every section optional):
///   {"topics":        {"<cell1>|<cell2>|...": "Athlete"},
///    "cea":           {"<cell text>": "<entity uri, or any raw answer>"},
///    "cta":           {"<working header>": "<class uri or class name>"},
///    "spelling":      {"Lodnon": "London"},
///    "abbreviations": {"NYC": "New York City"}}
///
/// A scripted CEA/CTA value that matches an option is answered with its
/// number; otherwise it is returned verbatim. A single option is always
/// answered with 1. Unscripted requests get the
/// defaults: topic "Number" for all-numeric cells else "Thing", option 1 for
/// selections, "NONE" / "Thing" for free-form CEA / CTA, KEEP for corrections.
class StubLlm final : public LlmTransport {
public:
    StubLlm() = default;
    explicit StubLlm(const nlohmann::json& fixture) {
        auto load = [&](const char* key, std::map<std::string, std::string>& dst) {
            if (!fixture.contains(key)) return;
            for (const auto& [k, v] : fixture.at(key).items()) dst[k] = v.get<std::string>();
        };
        load("topics", topics_);
        load("cea", cea_);
        load("cta", cta_);
        load("spelling", spelling_);
        load("abbreviations", abbreviations_);
    }

    static StubLlm load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot read llm stub fixture: " + path.string());
        try {
            return StubLlm(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw LlmError("bad llm stub fixture " + path.string() + ": " + e.what());
        }
    }

    LlmResponse complete(const LlmRequest& r) override {
        return LlmResponse{answer(r), std::nullopt, std::nullopt};
    }

private:
    static std::optional<std::string> find(const std::map<std::string, std::string>& m, const std::string& k) {
        if (auto it = m.find(k); it != m.end()) return it->second;
        return std::nullopt;
    }

    static std::string choose(const LlmRequest& r, const std::string& scripted) {
        for (std::size_t i = 0; i < r.options.size(); ++i) {
            if (r.options[i] == scripted || text::local_name(r.options[i]) == scripted) return std::to_string(i + 1);
        }
        return scripted;
    }

    std::string answer(const LlmRequest& r) const {
        switch (r.task) {
            case LlmTask::ColumnTopic: {
                if (auto v = find(topics_, r.subject)) return *v;
                const bool numeric = !r.items.empty() && std::all_of(r.items.begin(), r.items.end(),
                                                                     [](const std::string& s) { return text::looks_numeric(s); });
                return numeric ? "Number" : "Thing";
            }
            case LlmTask::CeaSelect: {
                if (r.options.size() == 1) return "1";
                if (auto v = find(cea_, r.subject)) return choose(r, *v);
                return r.options.empty() ? "NONE" : "1";
            }
            case LlmTask::CtaSelect: {
                if (r.options.size() == 1) return "1";
                if (auto v = find(cta_, r.subject)) return choose(r, *v);
                return r.options.empty() ? "Thing" : "1";
            }
            case LlmTask::CellCorrect: {
                std::string out;
                for (std::size_t i = 0; i < r.items.size(); ++i) {
                    const auto& item = r.items[i];
                    out += std::to_string(i + 1) + ". ";
                    if (auto v = find(spelling_, item)) {
                        out += "SPELL: " + *v;
                    } else if (auto a = find(abbreviations_, item)) {
                        out += "ABBREV: " + *a;
                    } else {
                        out += "KEEP: " + item;
                    }
                    out += "\n";
                }
                return out;
            }
        }
        return {};
    }

    std::map<std::string, std::string> topics_, cea_, cta_, spelling_, abbreviations_;
};

struct LlmClientOptions {
    double requests_per_minute = 0.0;
    std::size_t max_output = 64;
    std::string ontology_namespace = "http://dbpedia.org/ontology/";
    std::string resource_namespace = "http://dbpedia.org/resource/";
};

struct TopicResult {
    std::string topic;
    bool fallback = false;
    std::string warning;
};

struct CeaChoice {
    std::optional<CandidateEntity> entity;  // empty = abstain
    bool fallback = false;                  // rank-1 after two unusable answers
    std::string warning;
};

struct CtaChoice {
    std::optional<std::string> class_uri;  // empty = abstain
    std::optional<std::size_t> option;     // 0-based index when chosen from candidates
    std::string warning;
};

struct CorrectionResult {
    std::vector<prompts::CorrectionLine> lines;  // one per item; all KEEP on failure
    bool failed = false;
    std::string warning;
};

class LlmClient {
public:
    explicit LlmClient(LlmTransport& transport, LlmClientOptions opts = {})
        : transport_(transport), opts_(std::move(opts)), limiter_(opts_.requests_per_minute) {}

    LlmClient(const LlmClient&) = delete;
    LlmClient& operator=(const LlmClient&) = delete;

    const LlmClientOptions& options() const noexcept { return opts_; }

    /// Short topic for a column with a meaningless header. Falls back to
    /// "Entity" after two malformed answers or a transport failure.
    TopicResult detect_column_topic(const std::vector<std::string>& rep_cells, const std::vector<std::string>& other_headers) {
        if (rep_cells.empty()) throw std::invalid_argument("detect_column_topic needs at least one cell");
        LlmRequest req{LlmTask::ColumnTopic,
                       prompts::render(prompts::kColumnTopic,
                                       {{"headers", prompts::inline_list(other_headers)}, {"cells", prompts::bullet_list(rep_cells)}}),
                       opts_.max_output, text::join(rep_cells, "|"), {}, rep_cells};
        std::string last;
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto resp = send(req, attempt, last);
            if (!resp) break;
            if (auto t = prompts::parse_topic(*resp)) return {*t, false, {}};
            last = *resp;
        }
        return {"Entity", true, "topic detection fell back to \"Entity\""};
    }

    /// Picks one candidate for a cell, or abstains. Never returns a URI
    /// outside `candidates`.
    CeaChoice select_cea(const std::string& cell, const std::vector<std::string>& row_context, const std::string& header,
                         const std::vector<CandidateEntity>& candidates) {
        if (candidates.empty()) throw std::invalid_argument("select_cea needs candidates");
        std::vector<std::string> lines, uris;
        for (const auto& c : candidates) {
            lines.push_back(c.label.empty() ? "<" + c.uri + ">" : c.label + " <" + c.uri + ">");
            uris.push_back(c.uri);
        }
        LlmRequest req{LlmTask::CeaSelect,
                       prompts::render(prompts::kCeaSelect, {{"cell", cell},
                                                             {"header", header.empty() ? "(unknown)" : header},
                                                             {"row", prompts::inline_list(row_context)},
                                                             {"options", prompts::numbered_list(lines)}}),
                       opts_.max_output, cell, uris, {}};
        std::string last;
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto resp = send(req, attempt, last);
            if (!resp) break;
            if (auto idx = prompts::parse_option(*resp, candidates.size(), true)) {
                if (*idx == 0) return {};
                return {candidates[*idx - 1], false, {}};
            }
            last = *resp;
        }
        return {candidates.front(), true, "CEA answer unusable for \"" + cell + "\"; using rank-1 candidate"};
    }

    /// Free-form entity naming, used when KG lookup is disabled.
    CeaChoice name_entity(const std::string& cell, const std::vector<std::string>& row_context, const std::string& header) {
        LlmRequest req{LlmTask::CeaSelect,
                       prompts::render(prompts::kCeaFreeForm, {{"cell", cell},
                                                               {"header", header.empty() ? "(unknown)" : header},
                                                               {"row", prompts::inline_list(row_context)},
                                                               {"namespace", opts_.resource_namespace}}),
                       opts_.max_output, cell, {}, {}};
        std::string last;
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto resp = send(req, attempt, last);
            if (!resp) break;
            const auto f = prompts::parse_entity_uri(*resp, opts_.resource_namespace);
            if (f.kind == prompts::FreeFormKind::None) return {};
            if (f.kind == prompts::FreeFormKind::Value) {
                return {CandidateEntity{f.uri, text::local_name(f.uri), 1, cell}, false, {}};
            }
            last = *resp;
        }
        return {std::nullopt, false, "free-form CEA answer unusable for \"" + cell + "\""};
    }

    /// Final class for a column. With no candidates the model answers
    /// free-form from the headers and the answer must name an ontology class.
    CtaChoice select_cta(const std::string& header, const std::vector<std::string>& rep_cells,
                         const std::vector<std::string>& other_headers, const std::vector<CandidateClass>& candidates) {
        const auto h = header.empty() ? std::string("(unknown)") : header;
        if (candidates.empty()) {
            LlmRequest req{LlmTask::CtaSelect,
                           prompts::render(prompts::kCtaFreeForm, {{"header", h},
                                                                   {"headers", prompts::inline_list(other_headers)},
                                                                   {"cells", prompts::bullet_list(rep_cells)},
                                                                   {"namespace", opts_.ontology_namespace}}),
                           opts_.max_output, header, {}, rep_cells};
            std::string last;
            for (int attempt = 0; attempt < 2; ++attempt) {
                auto resp = send(req, attempt, last);
                if (!resp) break;
                const auto f = prompts::parse_class_name(*resp, opts_.ontology_namespace);
                if (f.kind == prompts::FreeFormKind::Value) return {f.uri, std::nullopt, {}};
                if (f.kind == prompts::FreeFormKind::None) return {};
                last = *resp;
            }
            return {std::nullopt, std::nullopt, "CTA answer for \"" + h + "\" is not an ontology class; abstaining"};
        }
        std::vector<std::string> lines, uris;
        for (const auto& c : candidates) {
            lines.push_back(c.label.empty() ? text::local_name(c.uri) : c.label);
            uris.push_back(c.uri);
        }
        LlmRequest req{LlmTask::CtaSelect,
                       prompts::render(prompts::kCtaSelect, {{"header", h},
                                                             {"headers", prompts::inline_list(other_headers)},
                                                             {"cells", prompts::bullet_list(rep_cells)},
                                                             {"options", prompts::numbered_list(lines)}}),
                       opts_.max_output, header, uris, rep_cells};
        std::string last;
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto resp = send(req, attempt, last);
            if (!resp) break;
            if (auto idx = prompts::parse_option(*resp, candidates.size(), false)) {
                return {candidates[*idx - 1].uri, *idx - 1, {}};
            }
            last = *resp;
        }
        return {std::nullopt, std::nullopt, "CTA answer unusable for \"" + h + "\"; abstaining"};
    }

    /// One batched request for all flagged cells of a column.
    CorrectionResult correct_cells(const std::string& header, const std::vector<std::string>& sample,
                                   const std::vector<std::string>& flagged) {
        CorrectionResult out;
        auto keep_all = [&] {
            out.lines.clear();
            for (const auto& f : flagged) out.lines.push_back({prompts::CorrectionKind::Unchanged, f});
        };
        if (flagged.empty()) return out;
        LlmRequest req{LlmTask::CellCorrect,
                       prompts::render(prompts::kCellCorrect, {{"header", header.empty() ? "(unknown)" : header},
                                                               {"sample", prompts::inline_list(sample)},
                                                               {"items", prompts::numbered_list(flagged)}}),
                       std::max<std::size_t>(opts_.max_output, 32 * flagged.size()), header, {}, flagged};
        std::string last;
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto resp = send(req, attempt, last);
            if (!resp) break;
            if (auto lines = prompts::parse_corrections(*resp, flagged.size())) {
                out.lines = std::move(*lines);
                return out;
            }
            last = *resp;
        }
        keep_all();
        out.failed = true;
        out.warning = "cell correction failed for column \"" + header + "\"; cells left unchanged";
        return out;
    }

    LlmUsage usage_report() const {
        std::lock_guard lock(mu_);
        return usage_;
    }

private:
    /// One transport round-trip. Attempt 1 is the re-ask. Returns nullopt on
    /// transport failure.
    std::optional<std::string> send(const LlmRequest& base, int attempt, const std::string& previous) {
        LlmRequest req = base;
        if (attempt > 0) req.prompt += prompts::render(prompts::kReask, {{"answer", previous}});
        limiter_.acquire();
        {
            std::lock_guard lock(mu_);
            ++usage_[req.task].call_count;
        }
        try {
            auto resp = transport_.complete(req);
            std::lock_guard lock(mu_);
            auto& u = usage_[req.task];
            u.prompt_tokens += resp.prompt_tokens.value_or(estimate_tokens(req.prompt));
            u.completion_tokens += resp.completion_tokens.value_or(estimate_tokens(resp.text));
            return std::move(resp.text);
        } catch (const LlmError&) {
            std::lock_guard lock(mu_);
            ++usage_[req.task].failures;
            return std::nullopt;
        }
    }

    LlmTransport& transport_;
    LlmClientOptions opts_;
    RateLimiter limiter_;
    mutable std::mutex mu_;
    LlmUsage usage_;
};

}  // namespace sta

#endif  // STA_LLM_HPP
