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

// Prompt templates and response grammars for the four LLM tasks.
//
// Selection prompts list candidates as numbered options and ask for a single
// option number, so parsing never depends on free text. Bump kPromptVersion
// whenever a template changes; it is written into run telemetry.

#ifndef STA_PROMPTS_HPP
#define STA_PROMPTS_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sta/text.hpp"

namespace sta::prompts {

inline constexpr std::string_view kPromptVersion = "sta-prompts/1";

inline constexpr std::string_view kColumnTopic = R"(You are annotating a table against a knowledge graph.
The header of one column is missing or meaningless. Infer what the column is about from its cells.

Other column headers: {headers}

Cells of the column:
{cells}

Answer with a short noun phrase of one to three words naming the kind of thing in the cells (for example "Athlete" or "City").
Answer with the topic only, on a single line.)";

inline constexpr std::string_view kCeaSelect = R"(You are linking a table cell to a knowledge-graph entity.

Cell: {cell}
Column: {header}
Other cells in the same row: {row}

Candidate entities:
{options}

Use the row and the column to tell apart entities with the same name.
Answer with the number of the best candidate, or 0 if none of them is the entity in the cell.
Answer with the number only.)";

inline constexpr std::string_view kCeaFreeForm = R"(You are linking a table cell to a knowledge-graph entity.

Cell: {cell}
Column: {header}
Other cells in the same row: {row}

Answer with the full URI of the entity in the namespace {namespace}, or NONE if the cell does not name an entity.
Answer with the URI only.)";

inline constexpr std::string_view kCtaSelect = R"(You are choosing the ontology class of a table column.

Column: {header}
Other column headers: {headers}
Cells of the column:
{cells}

Candidate classes, best scored first:
{options}

Pick the class that fits the cells, neither broader nor narrower than needed.
Answer with the number of the chosen class only.)";

inline constexpr std::string_view kCtaFreeForm = R"(You are choosing the ontology class of a table column whose cells are missing or unusable.

Column: {header}
Other column headers: {headers}
Cells of the column:
{cells}

Use the other headers as context. Answer with one class of the ontology {namespace}, as its class name (for example SoccerPlayer) or full URI.
Answer with the class only.)";

inline constexpr std::string_view kCellCorrect = R"(You are cleaning cells of a table column before entity linking.

Column: {header}
Sample cells of the column: {sample}

Check each numbered cell below for a spelling error or an abbreviation, using the column as context.
{items}

Answer with exactly one line per numbered cell, in the form
<number>. <KIND>: <text>
where KIND is SPELL for a corrected spelling, ABBREV for an expanded abbreviation, or KEEP if the cell is already correct (then repeat it unchanged).)";

inline constexpr std::string_view kReask = R"(

Your previous answer could not be used:
{answer}
Reply again, strictly in the requested format.)";

/// Replaces each {name} placeholder in one pass; substituted text is never
/// rescanned, so cell contents cannot inject placeholders.
inline std::string render(std::string_view tmpl, const std::vector<std::pair<std::string, std::string>>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            const auto close = tmpl.find('}', i);
            if (close != std::string_view::npos) {
                const auto name = tmpl.substr(i + 1, close - i - 1);
                const auto it = std::find_if(vars.begin(), vars.end(), [&](const auto& v) { return v.first == name; });
                if (it != vars.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

inline std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += "- " + s + "\n";
    if (!out.empty()) out.pop_back();
    return out.empty() ? "(none)" : out;
}

inline std::string numbered_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += std::to_string(i + 1) + ". " + items[i] + "\n";
    if (!out.empty()) out.pop_back();
    return out;
}

inline std::string inline_list(const std::vector<std::string>& items) {
    std::vector<std::string> kept;
    for (const auto& s : items) {
        if (!s.empty()) kept.push_back(s);
    }
    return kept.empty() ? "(none)" : text::join(kept, " | ");
}

namespace detail {

inline std::string strip_decorations(std::string_view s) {
    auto t = text::trim(s);
    while (!t.empty() && (t.front() == '"' || t.front() == '\'' || t.front() == '`' || t.front() == '<')) t.erase(0, 1);
    while (!t.empty() && (t.back() == '"' || t.back() == '\'' || t.back() == '`' || t.back() == '>' || t.back() == '.')) {
        t.pop_back();
    }
    return text::trim(t);
}

inline bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    const auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); };
    if (!alpha(s[0])) return false;
    for (char c : s) {
        if (!alpha(c) && !(c >= '0' && c <= '9') && c != '_') return false;
    }
    return true;
}

}  // namespace detail

/// Option number in [0, n] (0 only when allowed), or nullopt when malformed.
inline std::optional<std::size_t> parse_option(std::string_view answer, std::size_t n, bool allow_zero) {
    static const std::regex re(R"(^\s*(?:(?:answer|option)\s*[:=]?\s*)?[\[(#]?\s*(\d{1,4})\s*[\])]?\s*\.?\s*$)",
                               std::regex::icase);
    std::cmatch m;
    const std::string s(answer);
    if (!std::regex_match(s.c_str(), m, re)) return std::nullopt;
    const auto v = static_cast<std::size_t>(std::stoul(m[1].str()));
    if (v > n || (v == 0 && !allow_zero)) return std::nullopt;
    return v;
}

inline std::optional<std::string> parse_topic(std::string_view answer) {
    std::string line;
    for (const auto& l : text::split(answer, '\n')) {
        if (!text::trim(l).empty()) {
            line = l;
            break;
        }
    }
    auto t = text::collapse_whitespace(detail::strip_decorations(line));
    if (t.rfind("Topic:", 0) == 0 || t.rfind("topic:", 0) == 0) t = text::trim(t.substr(6));
    if (t.empty() || t.size() > 60) return std::nullopt;
    if (std::count(t.begin(), t.end(), ' ') >= 5) return std::nullopt;
    if (t.find_first_of(":{}[]") != std::string::npos) return std::nullopt;
    return t;
}

enum class FreeFormKind { Value, None, Invalid };

struct FreeForm {
    FreeFormKind kind = FreeFormKind::Invalid;
    std::string uri;
};

/// Accepts a full URI in `ns`, a "dbo:"-style prefixed name, or a bare
/// class name starting with an upper-case letter.
inline FreeForm parse_class_name(std::string_view answer, std::string_view ns) {
    const auto t = detail::strip_decorations(answer);
    if (t == "NONE" || t == "none") return {FreeFormKind::None, {}};
    if (t.rfind(ns, 0) == 0) {
        const auto local = t.substr(ns.size());
        if (detail::is_identifier(local)) return {FreeFormKind::Value, t};
        return {};
    }
    auto local = t;
    if (const auto colon = t.find(':'); colon != std::string::npos && t.find("://") == std::string::npos) {
        local = t.substr(colon + 1);
    }
    if (!local.empty() && local[0] >= 'A' && local[0] <= 'Z' && detail::is_identifier(local)) {
        return {FreeFormKind::Value, std::string(ns) + local};
    }
    return {};
}

/// Accepts a URI inside the resource namespace, or NONE.
inline FreeForm parse_entity_uri(std::string_view answer, std::string_view ns) {
    const auto t = detail::strip_decorations(answer);
    if (t == "NONE" || t == "none") return {FreeFormKind::None, {}};
    if (t.size() > ns.size() && t.rfind(ns, 0) == 0 && t.find_first_of(" \t\n") == std::string::npos) {
        return {FreeFormKind::Value, t};
    }
    return {};
}

enum class CorrectionKind { SpellFix, AbbrevExpansion, Unchanged };

inline std::string_view to_string(CorrectionKind k) {
    switch (k) {
        case CorrectionKind::SpellFix: return "SpellFix";
        case CorrectionKind::AbbrevExpansion: return "AbbrevExpansion";
        case CorrectionKind::Unchanged: return "Unchanged";
    }
    return "?";
}

struct CorrectionLine {
    CorrectionKind kind = CorrectionKind::Unchanged;
    std::string text;
};

/// One line per item, each index exactly once; nullopt otherwise.
inline std::optional<std::vector<CorrectionLine>> parse_corrections(std::string_view answer, std::size_t n) {
    static const std::regex re(R"(^\s*(\d{1,5})\s*[.):]\s*(SPELL|ABBREV|KEEP)\s*:\s*(.*?)\s*$)");
    std::vector<std::optional<CorrectionLine>> slots(n);
    for (const auto& line : text::split(answer, '\n')) {
        if (text::trim(line).empty()) continue;
        std::smatch m;
        if (!std::regex_match(line, m, re)) return std::nullopt;
        const auto idx = static_cast<std::size_t>(std::stoul(m[1].str()));
        if (idx == 0 || idx > n || slots[idx - 1]) return std::nullopt;
        const auto kind = m[2].str();
        CorrectionLine c;
        c.kind = kind == "SPELL"    ? CorrectionKind::SpellFix
                 : kind == "ABBREV" ? CorrectionKind::AbbrevExpansion
                                    : CorrectionKind::Unchanged;
        c.text = text::collapse_whitespace(m[3].str());
        slots[idx - 1] = std::move(c);
    }
    std::vector<CorrectionLine> out;
    out.reserve(n);
    for (auto& s : slots) {
        if (!s) return std::nullopt;
        out.push_back(*std::move(s));
    }
    return out;
}

}  // namespace sta::prompts

#endif  // STA_PROMPTS_HPP
