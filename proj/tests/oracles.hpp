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

// Independent reference implementations used by the tests. They are written
// for obviousness, not speed, and share no code with the library.

#ifndef STA_TESTS_ORACLES_HPP
#define STA_TESTS_ORACLES_HPP

#include <algorithm>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

/// Levenshtein distance by the textbook recursion over prefixes, no memo.
/// Exponential; fine for strings up to ~8 symbols.
inline std::size_t lev(const std::u32string& a, std::size_t i, const std::u32string& b, std::size_t j) {
    if (i == 0) return j;
    if (j == 0) return i;
    const std::size_t cost = a[i - 1] == b[j - 1] ? 0 : 1;
    return std::min({lev(a, i - 1, b, j) + 1, lev(a, i, b, j - 1) + 1, lev(a, i - 1, b, j - 1) + cost});
}

inline std::size_t lev(const std::u32string& a, const std::u32string& b) { return lev(a, a.size(), b, b.size()); }

inline std::size_t lev(const std::string& a, const std::string& b) {
    return lev(std::u32string(a.begin(), a.end()), std::u32string(b.begin(), b.end()));
}

/// Tally-then-sort CTA scoring: every (class, rank) occurrence adds
/// (11 - rank) / 10, counted in tenths as integers. Lists are taken as given
/// (rank = position + 1), truncated at 10.
inline std::vector<std::pair<std::string, double>> cta_scores(const std::vector<std::vector<std::string>>& lists) {
    std::map<std::string, int> tenths;
    for (const auto& list : lists) {
        for (std::size_t pos = 0; pos < list.size() && pos < 10; ++pos) tenths[list[pos]] += static_cast<int>(10 - pos);
    }
    std::vector<std::pair<std::string, int>> v(tenths.begin(), tenths.end());
    // Bubble sort: score descending, URI ascending.
    for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j + 1 < v.size() - i; ++j) {
            const bool swap = v[j].second < v[j + 1].second || (v[j].second == v[j + 1].second && v[j].first > v[j + 1].first);
            if (swap) std::swap(v[j], v[j + 1]);
        }
    }
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [k, t] : v) out.emplace_back(k, t / 10.0);
    return out;
}

}  // namespace oracle

#endif  // STA_TESTS_ORACLES_HPP
