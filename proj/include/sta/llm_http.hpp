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

// OpenAI-style chat-completion transport.

#ifndef STA_LLM_HTTP_HPP
#define STA_LLM_HTTP_HPP

#include <chrono>
#include <string>

#include <nlohmann/json.hpp>

#include "sta/http_util.hpp"
#include "sta/llm.hpp"

namespace sta {

struct ChatCompletionOptions {
    std::string base_url = "https://api.openai.com/v1";
    std::string model = "gpt-4o-mini";
    std::string api_key;  // sent as a bearer token when non-empty
    double temperature = 0.0;
    std::chrono::milliseconds timeout{60000};
};

class ChatCompletionLlm final : public LlmTransport {
public:
    explicit ChatCompletionLlm(ChatCompletionOptions opts) : opts_(std::move(opts)), url_(http::parse_url(opts_.base_url)) {}

    LlmResponse complete(const LlmRequest& r) override {
        const nlohmann::json body = {{"model", opts_.model},
                                     {"temperature", opts_.temperature},
                                     {"max_tokens", r.max_output},
                                     {"messages", {{{"role", "user"}, {"content", r.prompt}}}}};
        httplib::Headers headers;
        if (!opts_.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts_.api_key);
        auto client = http::make_client(url_, opts_.timeout);
        auto res = client->Post(http::join_path(url_.path, "chat/completions"), headers, body.dump(), "application/json");
        if (!res) throw LlmError("chat completion: " + httplib::to_string(res.error()));
        if (res->status != 200) throw LlmError("chat completion: HTTP " + std::to_string(res->status));
        return parse_response(res->body);
    }

    static LlmResponse parse_response(const std::string& body) {
        try {
            const auto j = nlohmann::json::parse(body);
            LlmResponse out;
            const auto& content = j.at("choices").at(0).at("message").at("content");
            out.text = content.is_null() ? "" : content.get<std::string>();
            if (j.contains("usage") && j["usage"].is_object()) {
                const auto& u = j["usage"];
                if (u.contains("prompt_tokens")) out.prompt_tokens = u["prompt_tokens"].get<std::size_t>();
                if (u.contains("completion_tokens")) out.completion_tokens = u["completion_tokens"].get<std::size_t>();
            }
            return out;
        } catch (const nlohmann::json::exception& e) {
            throw LlmError(std::string("malformed chat completion response: ") + e.what());
        }
    }

private:
    ChatCompletionOptions opts_;
    http::Url url_;
};

}  // namespace sta

#endif  // STA_LLM_HTTP_HPP
