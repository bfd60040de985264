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

// Live DBpedia backend: the Lookup service for entity candidates and the
// SPARQL endpoint for rdf:type classes.

#ifndef STA_KG_HTTP_HPP
#define STA_KG_HTTP_HPP

#include <chrono>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sta/http_util.hpp"
#include "sta/kg.hpp"

namespace sta {

struct HttpKgOptions {
    std::string lookup_url = "https://lookup.dbpedia.org/api/search";
    std::string sparql_url = "https://dbpedia.org/sparql";
    std::string ontology_namespace = "http://dbpedia.org/ontology/";
    std::chrono::milliseconds timeout{10000};
};

/// SELECT query for the ontology classes of one entity.
inline std::string class_query(const std::string& entity_uri, const std::string& ontology_namespace, std::size_t limit) {
    if (entity_uri.find_first_of("<>\"{}|^`\\ \t\n") != std::string::npos) {
        throw KgError("entity URI not usable in SPARQL: " + entity_uri);
    }
    return "SELECT DISTINCT ?type WHERE { <" + entity_uri + "> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> ?type . "
           "FILTER(STRSTARTS(STR(?type), \"" + ontology_namespace + "\")) } LIMIT " + std::to_string(limit);
}

/// Parses a Lookup response: {"docs": [{"resource": [uri], "label": [label]}, ...]}.
inline std::vector<KgItem> parse_lookup_response(const std::string& body) {
    static const std::regex tags("</?[A-Za-z]+>");
    std::vector<KgItem> out;
    try {
        const auto j = nlohmann::json::parse(body);
        for (const auto& d : j.value("docs", nlohmann::json::array())) {
            if (!d.contains("resource") || d["resource"].empty()) continue;
            KgItem item;
            item.uri = d["resource"][0].get<std::string>();
            if (d.contains("label") && !d["label"].empty()) {
                item.label = std::regex_replace(d["label"][0].get<std::string>(), tags, "");
            } else {
                item.label = text::local_name(item.uri);
            }
            out.push_back(std::move(item));
        }
    } catch (const nlohmann::json::exception& e) {
        throw KgError(std::string("malformed lookup response: ") + e.what());
    }
    return out;
}

/// Parses SPARQL JSON results, reading the ?type binding.
inline std::vector<KgItem> parse_class_response(const std::string& body) {
    std::vector<KgItem> out;
    try {
        const auto j = nlohmann::json::parse(body);
        for (const auto& b : j.at("results").at("bindings")) {
            const auto uri = b.at("type").at("value").get<std::string>();
            out.push_back({uri, text::local_name(uri)});
        }
    } catch (const nlohmann::json::exception& e) {
        throw KgError(std::string("malformed SPARQL response: ") + e.what());
    }
    return out;
}

class HttpKgBackend final : public KgBackend {
public:
    explicit HttpKgBackend(HttpKgOptions opts)
        : opts_(std::move(opts)), lookup_(http::parse_url(opts_.lookup_url)), sparql_(http::parse_url(opts_.sparql_url)) {}

    std::vector<KgItem> lookup(const std::string& text, std::size_t limit) override {
        const httplib::Params params{{"query", text}, {"maxResults", std::to_string(limit)}, {"format", "JSON"}};
        auto items = parse_lookup_response(get(lookup_, params));
        if (items.size() > limit) items.resize(limit);
        return items;
    }

    std::vector<KgItem> classes(const std::string& entity_uri, std::size_t limit) override {
        const httplib::Params params{{"query", class_query(entity_uri, opts_.ontology_namespace, limit)},
                                     {"format", "application/sparql-results+json"}};
        auto items = parse_class_response(get(sparql_, params));
        if (items.size() > limit) items.resize(limit);
        return items;
    }

private:
    std::string get(const http::Url& url, const httplib::Params& params) const {
        auto client = http::make_client(url, opts_.timeout);
        auto res = client->Get(url.path, params, httplib::Headers{{"Accept", "application/json"}});
        if (!res) throw KgTransientError(url.origin + ": " + httplib::to_string(res.error()));
        if (http::is_transient_status(res->status)) {
            throw KgTransientError(url.origin + url.path + ": HTTP " + std::to_string(res->status));
        }
        if (res->status != 200) throw KgError(url.origin + url.path + ": HTTP " + std::to_string(res->status));
        return res->body;
    }

    HttpKgOptions opts_;
    http::Url lookup_;
    http::Url sparql_;
};

}  // namespace sta

#endif  // STA_KG_HTTP_HPP
