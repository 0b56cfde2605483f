// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "sgedit/error.hpp"
#include "sgedit/hash.hpp"
#include "sgedit/image.hpp"
#include "sgedit/llm/chat.hpp"

namespace sgedit::llm {

std::optional<ProviderConfig> ProviderConfig::from_env() {
    const char* url = std::getenv("SGEDIT_LLM_BASE_URL");
    if (url == nullptr || *url == '\0') return std::nullopt;
    ProviderConfig c;
    c.base_url = url;
    if (const char* m = std::getenv("SGEDIT_LLM_MODEL")) c.model = m;
    if (const char* k = std::getenv("SGEDIT_LLM_API_KEY")) c.api_key = k;
    return c;
}

ProviderConfig ProviderConfig::from_file(const std::string& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string("bad provider config: ") + e.what(), path);
    }
    ProviderConfig c;
    c.base_url = j.value("base_url", "");
    c.model = j.value("model", "");
    c.api_key = j.value("api_key", "");
    c.retries = j.value("retries", 2);
    if (c.base_url.empty()) throw Error(ErrorCode::ConfigError, "provider config needs base_url", path);
    return c;
}

Json HttpChatProvider::request_body(const std::vector<ChatTurn>& turns) const {
    Json messages = Json::array();
    for (const auto& t : turns) {
        if (t.attachments.empty()) {
            messages.push_back({{"role", to_string(t.role)}, {"content", t.content}});
            continue;
        }
        Json parts = Json::array();
        if (!t.content.empty()) parts.push_back({{"type", "text"}, {"text", t.content}});
        for (const auto& a : t.attachments) {
            parts.push_back({{"type", "image_url"},
                             {"image_url", {{"url", "data:" + a.media_type + ";base64," + base64_encode(a.bytes)}}}});
        }
        messages.push_back({{"role", to_string(t.role)}, {"content", parts}});
    }
    return {{"model", config_.model}, {"messages", messages}, {"temperature", 0}};
}

std::string HttpChatProvider::complete(const std::vector<ChatTurn>& turns) {
    httplib::Client client(config_.base_url);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_connection_timeout(10, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);
    const auto body = request_body(turns).dump();

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.retries; ++attempt) {
        auto res = client.Post("/v1/chat/completions", headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            continue;
        }
        if (res->status != 200) {
            last_error = "HTTP " + std::to_string(res->status);
            if (res->status >= 500) continue;
            break;
        }
        try {
            auto j = Json::parse(res->body);
            return j.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const Json::exception& e) {
            throw Error(ErrorCode::ProviderUnavailable, std::string("unexpected provider response: ") + e.what());
        }
    }
    throw Error(ErrorCode::ProviderUnavailable, "chat provider request failed", last_error);
}

}  // namespace sgedit::llm
