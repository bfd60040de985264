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

#ifndef STA_LEVENSHTEIN_HPP
#define STA_LEVENSHTEIN_HPP

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <ranges>
#include <string_view>
#include <vector>

#include "sta/text.hpp"

namespace sta {

/// Unit-cost edit distance (insert, delete, substitute) between two
/// random-access sequences. Two-row dynamic program, O(|a|*|b|) time and
/// O(min(|a|,|b|)) memory.
template <std::ranges::random_access_range A, std::ranges::random_access_range B>
std::size_t levenshtein(const A& a, const B& b) {
    const auto n = static_cast<std::size_t>(std::ranges::size(a));
    const auto m = static_cast<std::size_t>(std::ranges::size(b));
    if (n < m) return levenshtein(b, a);
    if (m == 0) return n;

    std::vector<std::size_t> prev(m + 1);
    std::vector<std::size_t> cur(m + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    auto ai = std::ranges::begin(a);
    for (std::size_t i = 1; i <= n; ++i, ++ai) {
        cur[0] = i;
        auto bj = std::ranges::begin(b);
        for (std::size_t j = 1; j <= m; ++j, ++bj) {
            const std::size_t subst = prev[j - 1] + (*ai == *bj ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, subst});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

/// Distance over Unicode scalar values of two UTF-8 strings.
inline std::size_t levenshtein_utf8(std::string_view a, std::string_view b) {
    return levenshtein(text::decode_utf8(a), text::decode_utf8(b));
}

}  // namespace sta

#endif  // STA_LEVENSHTEIN_HPP
