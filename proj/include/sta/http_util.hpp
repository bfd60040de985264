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

// Small helpers shared by the live HTTP transports. HTTPS needs the including
// target to define CPPHTTPLIB_OPENSSL_SUPPORT and link OpenSSL.

#ifndef STA_HTTP_UTIL_HPP
#define STA_HTTP_UTIL_HPP

#include <chrono>
#include <memory>
#include <string>
#include <string_view>

#include <httplib.h>

#include "sta/error.hpp"
#include "sta/text.hpp"

namespace sta::http {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;    // starts with '/', may be just "/"
};

inline Url parse_url(std::string_view url) {
    const auto t = text::trim(url);
    const auto sep = t.find("://");
    if (sep == std::string::npos) throw ConfigError("URL without scheme: " + t);
    const auto scheme = text::to_lower_ascii(t.substr(0, sep));
    if (scheme != "http" && scheme != "https") throw ConfigError("unsupported URL scheme: " + t);
    const auto path_start = t.find('/', sep + 3);
    Url u;
    u.origin = path_start == std::string::npos ? t : t.substr(0, path_start);
    u.path = path_start == std::string::npos ? "/" : t.substr(path_start);
    if (u.origin.size() == sep + 3) throw ConfigError("URL without host: " + t);
    while (u.path.size() > 1 && u.path.back() == '/') u.path.pop_back();
    return u;
}

/// Joins a base path and a suffix with exactly one '/'.
inline std::string join_path(std::string_view base, std::string_view suffix) {
    std::string out(base);
    while (!out.empty() && out.back() == '/') out.pop_back();
    if (suffix.empty() || suffix.front() != '/') out += '/';
    out += suffix;
    return out;
}

inline std::unique_ptr<httplib::Client> make_client(const Url& u, std::chrono::milliseconds timeout) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (u.origin.rfind("https", 0) == 0) throw ConfigError("this build has no TLS support: " + u.origin);
#endif
    auto c = std::make_unique<httplib::Client>(u.origin);
    c->set_connection_timeout(timeout);
    c->set_read_timeout(timeout);
    c->set_write_timeout(timeout);
    c->set_follow_location(true);
    return c;
}

/// True for statuses worth retrying.
inline bool is_transient_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace sta::http

#endif  // STA_HTTP_UTIL_HPP
