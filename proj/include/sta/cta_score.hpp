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

#ifndef STA_CTA_SCORE_HPP
#define STA_CTA_SCORE_HPP

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "sta/kg.hpp"

namespace sta {

struct ScoredClass {
    std::string class_uri;
    double cta_score = 0.0;

    friend bool operator==(const ScoredClass&, const ScoredClass&) = default;
};

/// Score of a class at 1-based `rank`: (11 - rank) / 10, i.e. 1.0 for the top
/// class down to 0.1 for the tenth.
inline double rank_score(std::size_t rank) {
    return rank >= 1 && rank <= 10 ? static_cast<double>(11 - rank) / 10.0 : 0.0;
}

/// Sums per-list rank scores for every class across the per-cell candidate
/// lists. Positions inside a list are taken from list order. Output is sorted
/// by score descending, ties by URI ascending.
inline std::vector<ScoredClass> cta_scores(const std::vector<std::vector<CandidateClass>>& candidate_lists) {
    // Integer tenths keep sums exact and make tie detection reliable.
    std::map<std::string, long> tenths;
    for (const auto& list : candidate_lists) {
        const std::size_t n = std::min<std::size_t>(list.size(), 10);
        for (std::size_t i = 0; i < n; ++i) tenths[list[i].uri] += static_cast<long>(10 - i);
    }
    std::vector<std::pair<std::string, long>> ordered(tenths.begin(), tenths.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<ScoredClass> out;
    out.reserve(ordered.size());
    for (auto& [uri, t] : ordered) out.push_back({std::move(uri), static_cast<double>(t) / 10.0});
    return out;
}

}  // namespace sta

#endif  // STA_CTA_SCORE_HPP
