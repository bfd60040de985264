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

// Precision / recall / F1 of a system annotation file against a gold file.
//
// CEA rows are table_id,row,col,uri and CTA rows table_id,col,uri. A gold URI
// field may hold several space-separated alternatives; matching any one of
// them counts as correct.

#ifndef STA_METRICS_HPP
#define STA_METRICS_HPP

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sta/csv.hpp"
#include "sta/error.hpp"
#include "sta/text.hpp"

namespace sta {

enum class Task { CEA, CTA };

inline std::string_view to_string(Task t) { return t == Task::CEA ? "CEA" : "CTA"; }

struct MetricsReport {
    Task task = Task::CEA;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t correct = 0;
    std::size_t system = 0;
    std::size_t target = 0;

    nlohmann::json to_json() const {
        return {{"task", to_string(task)}, {"precision", precision}, {"recall", recall}, {"f1", f1},
                {"correct", correct},      {"system", system},       {"target", target}};
    }
};

inline MetricsReport make_report(Task task, std::size_t correct, std::size_t system, std::size_t target) {
    MetricsReport m;
    m.task = task;
    m.correct = correct;
    m.system = system;
    m.target = target;
    m.precision = system ? static_cast<double>(correct) / static_cast<double>(system) : 0.0;
    m.recall = target ? static_cast<double>(correct) / static_cast<double>(target) : 0.0;
    m.f1 = (m.precision + m.recall) > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    return m;
}

/// Lower-cases scheme and host, then percent-decodes the whole URI.
inline std::string normalize_uri(std::string_view uri) {
    std::string u = text::trim(uri);
    const auto scheme_end = u.find("://");
    if (scheme_end != std::string::npos) {
        auto host_end = u.find('/', scheme_end + 3);
        if (host_end == std::string::npos) host_end = u.size();
        u = text::to_lower_ascii(u.substr(0, host_end)) + u.substr(host_end);
    }
    return text::percent_decode(u);
}

using AnnotationKey = std::vector<std::string>;  // table_id, [row,] col

namespace detail {

inline std::size_t key_width(Task t) { return t == Task::CEA ? 3 : 2; }

inline AnnotationKey parse_key(const csv::Row& r, Task task, const std::string& where) {
    const auto w = key_width(task);
    if (r.size() < w + 1) throw ScoreError(where + ": expected " + std::to_string(w + 1) + " fields");
    AnnotationKey k;
    k.push_back(text::trim(r[0]));
    for (std::size_t i = 1; i < w; ++i) {
        auto f = text::trim(r[i]);
        if (!text::is_digits(f)) throw ScoreError(where + ": non-numeric index '" + f + "'");
        f.erase(0, std::min(f.find_first_not_of('0'), f.size() - 1));  // "007" == "7"
        k.push_back(std::move(f));
    }
    return k;
}

}  // namespace detail

/// Parsed annotation file: key -> set of acceptable normalized URIs.
using AnnotationMap = std::map<AnnotationKey, std::set<std::string>>;

/// Reads a system file; a key given twice is an error. Rows with an empty
/// URI are ignored (treated as abstentions).
inline AnnotationMap parse_system(std::string_view data, Task task, const std::string& name = "system") {
    AnnotationMap out;
    const auto rows = csv::parse(data);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto where = name + ":" + std::to_string(i + 1);
        auto key = detail::parse_key(rows[i], task, where);
        const auto uri = text::trim(rows[i][detail::key_width(task)]);
        if (uri.empty()) continue;
        if (!out.emplace(std::move(key), std::set<std::string>{normalize_uri(uri)}).second) {
            throw ScoreError(where + ": duplicate system annotation");
        }
    }
    return out;
}

/// Reads a gold file. Repeated keys merge their alternatives.
inline AnnotationMap parse_gold(std::string_view data, Task task, const std::string& name = "gold") {
    AnnotationMap out;
    const auto rows = csv::parse(data);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto where = name + ":" + std::to_string(i + 1);
        auto key = detail::parse_key(rows[i], task, where);
        auto& alts = out[std::move(key)];
        for (std::size_t f = detail::key_width(task); f < rows[i].size(); ++f) {
            for (const auto& u : text::split(rows[i][f], ' ')) {
                if (!text::trim(u).empty()) alts.insert(normalize_uri(u));
            }
        }
    }
    return out;
}

inline MetricsReport score(const AnnotationMap& system, const AnnotationMap& gold, Task task) {
    std::size_t correct = 0;
    for (const auto& [key, uris] : system) {
        auto it = gold.find(key);
        if (it != gold.end() && it->second.count(*uris.begin())) ++correct;
    }
    return make_report(task, correct, system.size(), gold.size());
}

inline MetricsReport score_files(const std::filesystem::path& system_file, const std::filesystem::path& gold_file, Task task) {
    return score(parse_system(csv::read_file(system_file), task, system_file.filename().string()),
                 parse_gold(csv::read_file(gold_file), task, gold_file.filename().string()), task);
}

}  // namespace sta

#endif  // STA_METRICS_HPP
