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

#ifndef STA_PREPROCESSING_HPP
#define STA_PREPROCESSING_HPP

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "sta/error.hpp"
#include "sta/llm.hpp"
#include "sta/table.hpp"
#include "sta/text.hpp"

namespace sta {

inline constexpr std::string_view kUntyped = "UNTYPED";

/// Maps a cell to zero or one entity-type tag.
class EntityTagger {
public:
    virtual ~EntityTagger() = default;
    virtual std::optional<std::string> tag(const std::string& cell) const = 0;
};

/// Offline tagger: case-insensitive gazetteer lookup, then NUMBER and DATE
/// patterns.
///
/// Gazetteer JSON: {"gazetteer": {"PLACE": ["Paris", ...], "PERSON": [...]}}
/// (a bare tag -> list object is accepted too).
class GazetteerTagger final : public EntityTagger {
public:
    GazetteerTagger() = default;

    explicit GazetteerTagger(const std::map<std::string, std::vector<std::string>>& gazetteer) {
        for (const auto& [tag, forms] : gazetteer) {
            for (const auto& f : forms) add(tag, f);
        }
    }

    static GazetteerTagger from_json(const nlohmann::json& j) {
        const auto& g = j.contains("gazetteer") ? j.at("gazetteer") : j;
        GazetteerTagger t;
        for (const auto& [tag, forms] : g.items()) {
            for (const auto& f : forms) t.add(tag, f.get<std::string>());
        }
        return t;
    }

    static GazetteerTagger load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot read gazetteer: " + path.string());
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad gazetteer " + path.string() + ": " + e.what());
        }
    }

    /// First registration of a surface form wins.
    void add(const std::string& tag, const std::string& surface) {
        forms_.emplace(text::case_fold(text::collapse_whitespace(surface)), tag);
    }

    std::optional<std::string> tag(const std::string& cell) const override {
        const auto key = text::case_fold(text::collapse_whitespace(cell));
        if (key.empty()) return std::nullopt;
        if (auto it = forms_.find(key); it != forms_.end()) return it->second;
        if (text::looks_numeric(key)) return "NUMBER";
        static const std::regex date(R"(^(\d{4}-\d{1,2}-\d{1,2}|\d{1,2}[/.]\d{1,2}[/.]\d{2,4})$)");
        if (std::regex_match(key, date)) return "DATE";
        return std::nullopt;
    }

private:
    std::unordered_map<std::string, std::string> forms_;
};

/// Up to `limit` distinct non-empty cells, first-occurrence order.
inline std::vector<std::string> dedup_representative_cells(const std::vector<std::string>& cells, std::size_t limit) {
    if (limit == 0) throw std::invalid_argument("limit must be >= 1");
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& c : cells) {
        if (out.size() >= limit) break;
        if (c.empty() || !seen.insert(c).second) continue;
        out.push_back(c);
    }
    return out;
}

/// First `limit` non-empty cells, duplicates kept.
inline std::vector<std::string> first_non_empty_cells(const std::vector<std::string>& cells, std::size_t limit) {
    std::vector<std::string> out;
    for (const auto& c : cells) {
        if (out.size() >= limit) break;
        if (!c.empty()) out.push_back(c);
    }
    return out;
}

struct EntityTypeProfile {
    ColumnRef column;
    std::map<std::string, std::size_t> type_counts;
    std::string predominant = std::string(kUntyped);
};

/// Tallies tags over representative cells. Untaggable cells count as UNTYPED.
/// The predominant tag is the most frequent; ties go to the smaller tag.
inline EntityTypeProfile profile_entity_types(const std::vector<std::string>& rep_cells, const EntityTagger& tagger,
                                              ColumnRef column = {}) {
    EntityTypeProfile p;
    p.column = std::move(column);
    for (const auto& c : rep_cells) ++p.type_counts[tagger.tag(c).value_or(std::string(kUntyped))];
    std::size_t best = 0;
    for (const auto& [tag, n] : p.type_counts) {
        if (n > best) {
            best = n;
            p.predominant = tag;
        }
    }
    return p;
}

/// Non-empty cells whose tag differs from the predominant one. Nothing is
/// flagged when the column is predominantly UNTYPED.
inline std::vector<CellRef> flag_inconsistent_cells(const Table& table, std::size_t col, const EntityTypeProfile& profile,
                                                    const EntityTagger& tagger) {
    std::vector<CellRef> out;
    if (profile.predominant == kUntyped) return out;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const auto& c = table.cell(r, col);
        if (c.empty()) continue;
        if (tagger.tag(c).value_or(std::string(kUntyped)) != profile.predominant) out.push_back({table.table_id, r, col});
    }
    return out;
}

struct CellCorrection {
    CellRef cell;
    std::string original;
    std::string corrected;
    prompts::CorrectionKind kind = prompts::CorrectionKind::Unchanged;
};

/// Corrected cell text keyed by cell; the source table is never modified.
class CorrectionOverlay {
public:
    void apply(const CellCorrection& c) {
        if (c.kind != prompts::CorrectionKind::Unchanged) fixes_[c.cell] = c.corrected;
    }

    std::string text(const Table& t, std::size_t row, std::size_t col) const {
        if (auto it = fixes_.find(CellRef{t.table_id, row, col}); it != fixes_.end()) return it->second;
        return t.cell(row, col);
    }

    std::vector<std::string> column(const Table& t, std::size_t col) const {
        std::vector<std::string> out;
        out.reserve(t.n_rows());
        for (std::size_t r = 0; r < t.n_rows(); ++r) out.push_back(text(t, r, col));
        return out;
    }

    std::vector<std::string> row(const Table& t, std::size_t r) const {
        std::vector<std::string> out;
        for (std::size_t c = 0; c < t.n_cols(); ++c) out.push_back(text(t, r, c));
        return out;
    }

    std::size_t size() const noexcept { return fixes_.size(); }

private:
    std::map<CellRef, std::string> fixes_;
};

/// Asks the LLM to fix flagged cells, one batched request. On backend
/// failure every cell comes back Unchanged and `warning` is set.
inline std::vector<CellCorrection> correct_cells(const std::vector<std::pair<CellRef, std::string>>& flagged,
                                                 const std::string& header, const std::vector<std::string>& sample,
                                                 LlmClient& llm, std::string* warning = nullptr) {
    std::vector<CellCorrection> out;
    if (flagged.empty()) return out;
    std::vector<std::string> texts;
    for (const auto& [ref, t] : flagged) texts.push_back(t);
    auto res = llm.correct_cells(header, sample, texts);
    if (res.failed && warning) *warning = res.warning;
    for (std::size_t i = 0; i < flagged.size(); ++i) {
        CellCorrection c{flagged[i].first, flagged[i].second, flagged[i].second, prompts::CorrectionKind::Unchanged};
        const auto& line = res.lines.at(i);
        if (line.kind != prompts::CorrectionKind::Unchanged && !line.text.empty() && line.text != c.original) {
            c.kind = line.kind;
            c.corrected = line.text;
        }
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace sta

#endif  // STA_PREPROCESSING_HPP
