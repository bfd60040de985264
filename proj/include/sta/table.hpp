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

#ifndef STA_TABLE_HPP
#define STA_TABLE_HPP

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "sta/csv.hpp"
#include "sta/error.hpp"
#include "sta/text.hpp"

namespace sta {

/// A loaded table. Cells are whitespace-normalized; case is preserved.
struct Table {
    std::string table_id;
    std::vector<std::optional<std::string>> headers;  // one per column
    std::vector<std::vector<std::string>> rows;       // data rows only

    std::size_t n_rows() const noexcept { return rows.size(); }
    std::size_t n_cols() const noexcept { return headers.size(); }

    const std::string& cell(std::size_t row, std::size_t col) const { return rows.at(row).at(col); }

    std::vector<std::string> column(std::size_t col) const {
        std::vector<std::string> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r.at(col));
        return out;
    }

    std::string header_or_empty(std::size_t col) const {
        return headers.at(col).value_or(std::string{});
    }

    friend bool operator==(const Table&, const Table&) = default;
};

/// Zero-based data-row / column address of a cell.
struct CellRef {
    std::string table_id;
    std::size_t row = 0;
    std::size_t col = 0;

    friend auto operator<=>(const CellRef&, const CellRef&) = default;
};

struct ColumnRef {
    std::string table_id;
    std::size_t col = 0;

    friend auto operator<=>(const ColumnRef&, const ColumnRef&) = default;
};

/// Which annotation workflow a column follows.
enum class ColumnVariant {
    HeaderlessWithCells,    // meaningless header, enough cells: topic detection first
    HeadersWithEmptyCells,  // cells missing: CTA from headers only, no CEA
    FullyMeaningful,        // header and cells usable: skip topic detection
};

inline std::string_view to_string(ColumnVariant v) {
    switch (v) {
        case ColumnVariant::HeaderlessWithCells: return "HeaderlessWithCells";
        case ColumnVariant::HeadersWithEmptyCells: return "HeadersWithEmptyCells";
        case ColumnVariant::FullyMeaningful: return "FullyMeaningful";
    }
    return "?";
}

struct SituationThresholds {
    std::size_t min_valid_cells = 3;
    double empty_cell_fraction = 0.5;
};

/// Per-column workflow assignment for one table.
struct TableSituation {
    std::vector<ColumnVariant> columns;
};

/// A header is meaningless when it is empty, a single character, or a
/// placeholder such as col3, column12, field0 or "Unnamed: 2".
inline bool header_is_meaningful(const std::optional<std::string>& header) {
    if (!header) return false;
    const auto h = text::case_fold(text::trim(*header));
    if (h.empty() || text::length(h) == 1) return false;
    if (h.rfind("unnamed", 0) == 0) return false;
    for (std::string_view prefix : {"column", "col", "field"}) {
        if (h.size() > prefix.size() && h.rfind(prefix, 0) == 0 &&
            text::is_digits(std::string_view(h).substr(prefix.size()))) {
            return false;
        }
    }
    return true;
}

inline ColumnVariant classify_column(const std::optional<std::string>& header,
                                     const std::vector<std::string>& cells,
                                     const SituationThresholds& th = {}) {
    const auto non_empty = static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const std::string& c) { return !c.empty(); }));
    const double fraction =
        cells.empty() ? 0.0 : static_cast<double>(non_empty) / static_cast<double>(cells.size());
    const bool meaningful = header_is_meaningful(header);
    if (!meaningful && non_empty >= th.min_valid_cells) return ColumnVariant::HeaderlessWithCells;
    // A column without usable cells can only be typed from headers, whatever
    // its own header looks like.
    if (fraction < th.empty_cell_fraction) return ColumnVariant::HeadersWithEmptyCells;
    return ColumnVariant::FullyMeaningful;
}

inline TableSituation classify_table(const Table& t, const SituationThresholds& th = {}) {
    TableSituation s;
    s.columns.reserve(t.n_cols());
    for (std::size_t c = 0; c < t.n_cols(); ++c) s.columns.push_back(classify_column(t.headers[c], t.column(c), th));
    return s;
}

inline std::string normalize_cell(std::string_view raw) { return text::collapse_whitespace(raw); }

/// Builds a table from CSV text. Row 0 is the header unless `has_header` is false.
inline Table parse_table(std::string_view data, std::string table_id, bool has_header = true) {
    if (table_id.empty()) throw Error("table_id must be non-empty");
    auto raw = csv::parse(data);
    std::size_t width = 0;
    for (const auto& r : raw) width = std::max(width, r.size());
    if (raw.empty() || width == 0) throw CsvError("zero columns in table " + table_id, 0);

    Table t;
    t.table_id = std::move(table_id);
    std::size_t first = 0;
    if (has_header) {
        for (const auto& h : raw[0]) {
            auto v = normalize_cell(h);
            t.headers.push_back(v.empty() ? std::nullopt : std::optional<std::string>(std::move(v)));
        }
        first = 1;
    }
    t.headers.resize(width);
    for (std::size_t i = first; i < raw.size(); ++i) {
        std::vector<std::string> row;
        row.reserve(width);
        for (const auto& f : raw[i]) row.push_back(normalize_cell(f));
        row.resize(width);
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline Table load_table(const std::filesystem::path& path, std::string table_id, bool has_header = true) {
    return parse_table(csv::read_file(path), std::move(table_id), has_header);
}

/// Serializes a table back to CSV. Absent headers are written as empty fields.
inline std::string to_csv(const Table& t, bool with_header = true) {
    std::string out;
    if (with_header) {
        csv::Row h;
        for (const auto& x : t.headers) h.push_back(x.value_or(std::string{}));
        out += csv::format_row(h);
    }
    for (const auto& r : t.rows) out += csv::format_row(r);
    return out;
}

/// Loads every *.csv in a directory, keyed by file stem, in sorted order.
inline std::vector<Table> load_table_dir(const std::filesystem::path& dir, bool has_header = true) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Table> tables;
    std::set<std::string> seen;
    for (const auto& f : files) {
        auto id = f.stem().string();
        if (!seen.insert(id).second) throw Error("duplicate table id: " + id);
        tables.push_back(load_table(f, id, has_header));
    }
    return tables;
}

/// CEA / CTA targets, validated against the loaded tables.
struct TargetSet {
    std::vector<CellRef> cea_targets;
    std::vector<ColumnRef> cta_targets;
    std::vector<std::string> warnings;
};

namespace detail {

inline std::optional<std::size_t> parse_index(const std::string& s) {
    const auto t = text::trim(s);
    if (!text::is_digits(t) || t.size() > 18) return std::nullopt;
    return static_cast<std::size_t>(std::stoull(t));
}

}  // namespace detail

/// Parses SemTab target files. Either path may be empty. References to unknown
/// tables or out-of-range cells become warnings and are skipped.
inline TargetSet load_targets(const std::filesystem::path& cea_path, const std::filesystem::path& cta_path,
                              const std::vector<Table>& tables) {
    std::map<std::string, const Table*, std::less<>> by_id;
    for (const auto& t : tables) by_id[t.table_id] = &t;

    TargetSet ts;
    auto warn = [&](const std::filesystem::path& p, std::size_t line, const std::string& msg) {
        ts.warnings.push_back(p.filename().string() + ":" + std::to_string(line) + ": " + msg);
    };

    if (!cea_path.empty()) {
        const auto rows = csv::parse(csv::read_file(cea_path));
        std::set<CellRef> seen;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (r.size() < 3) {
                warn(cea_path, i + 1, "expected table_id,row,col");
                continue;
            }
            const auto id = text::trim(r[0]);
            const auto row = detail::parse_index(r[1]);
            const auto col = detail::parse_index(r[2]);
            if (!row || !col) {
                warn(cea_path, i + 1, "non-numeric row/col");
                continue;
            }
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                warn(cea_path, i + 1, "unknown table " + id);
                continue;
            }
            if (*row >= it->second->n_rows() || *col >= it->second->n_cols()) {
                warn(cea_path, i + 1, "cell out of range in table " + id);
                continue;
            }
            CellRef ref{id, *row, *col};
            if (seen.insert(ref).second) ts.cea_targets.push_back(std::move(ref));
        }
    }
    if (!cta_path.empty()) {
        const auto rows = csv::parse(csv::read_file(cta_path));
        std::set<ColumnRef> seen;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            if (r.size() < 2) {
                warn(cta_path, i + 1, "expected table_id,col");
                continue;
            }
            const auto id = text::trim(r[0]);
            const auto col = detail::parse_index(r[1]);
            if (!col) {
                warn(cta_path, i + 1, "non-numeric col");
                continue;
            }
            auto it = by_id.find(id);
            if (it == by_id.end()) {
                warn(cta_path, i + 1, "unknown table " + id);
                continue;
            }
            if (*col >= it->second->n_cols()) {
                warn(cta_path, i + 1, "column out of range in table " + id);
                continue;
            }
            ColumnRef ref{id, *col};
            if (seen.insert(ref).second) ts.cta_targets.push_back(std::move(ref));
        }
    }
    return ts;
}

}  // namespace sta

#endif  // STA_TABLE_HPP
