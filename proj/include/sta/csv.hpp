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

// RFC 4180 reader/writer. The reader is strict about quoting and reports the
// byte offset of the first violation; it accepts LF or CRLF line endings and
// an optional UTF-8 byte-order mark.

#ifndef STA_CSV_HPP
#define STA_CSV_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sta/error.hpp"

namespace sta::csv {

using Row = std::vector<std::string>;

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return ss.str();
}

/// Parses CSV text into rows of raw (untrimmed) fields. Blank lines are skipped.
inline std::vector<Row> parse(std::string_view data) {
    std::vector<Row> rows;
    std::size_t i = 0;
    if (data.substr(0, 3) == "\xEF\xBB\xBF") i = 3;

    Row row;
    std::string field;
    bool row_has_content = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&] {
        end_field();
        if (row_has_content || row.size() > 1) rows.push_back(std::move(row));
        row.clear();
        row_has_content = false;
    };

    while (i < data.size()) {
        const char c = data[i];
        if (c == '"') {
            if (!field.empty()) throw CsvError("unexpected quote inside unquoted field", i);
            const std::size_t open = i;
            ++i;
            bool closed = false;
            while (i < data.size()) {
                if (data[i] == '"') {
                    if (i + 1 < data.size() && data[i + 1] == '"') {
                        field.push_back('"');
                        i += 2;
                        continue;
                    }
                    closed = true;
                    ++i;
                    break;
                }
                field.push_back(data[i++]);
            }
            if (!closed) throw CsvError("unterminated quoted field", open);
            row_has_content = true;
            if (i < data.size() && data[i] != ',' && data[i] != '\n' && data[i] != '\r') {
                throw CsvError("unexpected character after closing quote", i);
            }
            continue;
        }
        if (c == ',') {
            end_field();
            row_has_content = true;
            ++i;
        } else if (c == '\r' || c == '\n') {
            end_row();
            ++i;
            if (c == '\r' && i < data.size() && data[i] == '\n') ++i;
        } else {
            field.push_back(c);
            row_has_content = true;
            ++i;
        }
    }
    if (row_has_content || !field.empty() || !row.empty()) end_row();
    return rows;
}

inline std::string quote_field(std::string_view f) {
    const bool needs = f.find_first_of(",\"\r\n") != std::string_view::npos ||
                       (!f.empty() && (f.front() == ' ' || f.back() == ' '));
    if (!needs) return std::string(f);
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string format_row(const Row& row) {
    std::string out;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) out.push_back(',');
        out += quote_field(row[i]);
    }
    out.push_back('\n');
    return out;
}

}  // namespace sta::csv

#endif  // STA_CSV_HPP
