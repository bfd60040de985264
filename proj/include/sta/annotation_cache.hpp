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

// Similarity-keyed reuse of earlier cell annotations.
//
// An unannotated cell copies the annotation of the first cached cell whose
// edit distance is strictly below k * min(len(cell), len(cached)). Entries are
// scanned in insertion order, so the cache is order-dependent and must be fed
// sequentially.

#ifndef STA_ANNOTATION_CACHE_HPP
#define STA_ANNOTATION_CACHE_HPP

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "sta/error.hpp"
#include "sta/levenshtein.hpp"
#include "sta/text.hpp"

namespace sta {

class AnnotationCache {
public:
    struct Entry {
        std::u32string key;  // case-folded, whitespace-collapsed
        std::string text;    // key as UTF-8, kept for telemetry and tests
        std::string entity_uri;
    };

    struct Hit {
        std::string entity_uri;
        std::size_t entry_index = 0;
        std::size_t distance = 0;
    };

    explicit AnnotationCache(double threshold_factor = 0.2) : k_(threshold_factor) {
        if (!(k_ > 0.0)) throw ConfigError("threshold factor k must be > 0");
    }

    static std::u32string normalize(std::string_view cell) {
        return text::case_fold(text::decode_utf8(text::collapse_whitespace(cell)));
    }

    double threshold_factor() const noexcept { return k_; }
    const std::vector<Entry>& entries() const noexcept { return entries_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }

    std::optional<Hit> lookup(std::string_view cell) const {
        const auto key = normalize(cell);
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            const auto& e = entries_[i];
            const double threshold = static_cast<double>(std::min(key.size(), e.key.size())) * k_;
            // Cheap lower bound before the full distance.
            const auto len_gap = key.size() > e.key.size() ? key.size() - e.key.size() : e.key.size() - key.size();
            if (static_cast<double>(len_gap) >= threshold) continue;
            const auto d = levenshtein(key, e.key);
            if (static_cast<double>(d) < threshold) return Hit{e.entity_uri, i, d};
        }
        return std::nullopt;
    }

    /// Appends an annotated cell. A key identical to an existing entry is
    /// dropped: the earlier entry is always reached first and matches at d=0.
    void add(std::string_view cell, std::string entity_uri) {
        if (entity_uri.empty()) throw Error("cannot cache an empty entity uri");
        auto key = normalize(cell);
        if (key.empty()) return;
        auto utf8 = text::encode_utf8(key);
        if (!keys_.insert(utf8).second) return;
        entries_.push_back(Entry{std::move(key), std::move(utf8), std::move(entity_uri)});
    }

    void clear() {
        entries_.clear();
        keys_.clear();
    }

private:
    double k_;
    std::vector<Entry> entries_;
    std::unordered_set<std::string> keys_;
};

/// Returns the reusable annotation for `cell_text`, if any.
inline std::optional<std::string> try_reuse(std::string_view cell_text, const AnnotationCache& cache) {
    if (auto hit = cache.lookup(cell_text)) return hit->entity_uri;
    return std::nullopt;
}

}  // namespace sta

#endif  // STA_ANNOTATION_CACHE_HPP
