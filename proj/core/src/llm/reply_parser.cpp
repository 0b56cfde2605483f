// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/llm/reply_parser.hpp"

#include <cctype>
#include <cmath>

#include "sgedit/error.hpp"

namespace sgedit::llm {

using Json = nlohmann::json;

namespace {

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

/// End offset (exclusive) of the JSON value starting at `start`, or npos.
std::size_t value_end(std::string_view s, std::size_t start) {
    if (start >= s.size()) return std::string_view::npos;
    const char first = s[start];
    if (first == '[' || first == '{') {
        int depth = 0;
        bool in_string = false;
        for (std::size_t i = start; i < s.size(); ++i) {
            const char c = s[i];
            if (in_string) {
                if (c == '\\') ++i;
                else if (c == '"') in_string = false;
                continue;
            }
            if (c == '"') in_string = true;
            else if (c == '[' || c == '{') ++depth;
            else if (c == ']' || c == '}') {
                if (--depth == 0) return i + 1;
            }
        }
        return std::string_view::npos;
    }
    if (first == '"') {
        for (std::size_t i = start + 1; i < s.size(); ++i) {
            if (s[i] == '\\') ++i;
            else if (s[i] == '"') return i + 1;
        }
        return std::string_view::npos;
    }
    std::size_t i = start;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '.' || s[i] == '-' || s[i] == '+')) ++i;
    return i == start ? std::string_view::npos : i;
}

std::optional<Json> try_parse(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error&) {
        return std::nullopt;
    }
}

std::string span_of(std::string_view reply) {
    constexpr std::size_t limit = 160;
    return std::string(reply.substr(0, limit)) + (reply.size() > limit ? "..." : "");
}

[[noreturn]] void malformed(const std::string& why, std::string_view span) {
    throw Error(ErrorCode::MalformedReply, why, span_of(span));
}

Json require_block(std::string_view reply, ReplySchema schema) {
    auto block = find_tagged_block(reply, block_key(schema));
    if (!block) malformed("no '" + std::string(block_key(schema)) + "' block in reply", reply);
    return *block;
}

std::vector<std::string> string_list(const Json& j, std::string_view reply, const char* what) {
    if (!j.is_array()) malformed(std::string(what) + " must be a list", reply);
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string() || v.get<std::string>().empty()) malformed(std::string(what) + " entries must be non-empty strings", j.dump());
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::array<double, 4> four_numbers(const Json& j, std::string_view reply) {
    if (!j.is_array() || j.size() != 4) malformed("bbox must have exactly 4 numbers", j.dump());
    std::array<double, 4> out{};
    for (std::size_t k = 0; k < 4; ++k) {
        if (!j[k].is_number()) malformed("bbox entries must be numbers", j.dump());
        out[k] = j[k].get<double>();
        if (!std::isfinite(out[k])) malformed("bbox entries must be finite", j.dump());
    }
    (void)reply;
    return out;
}

std::string non_empty_text(const Json& j, std::string_view reply, const char* what) {
    if (!j.is_string()) malformed(std::string(what) + " must be a string", reply);
    auto text = j.get<std::string>();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) malformed(std::string(what) + " is empty", reply);
    return text;
}

}  // namespace

std::string_view block_key(ReplySchema schema) noexcept {
    switch (schema) {
        case ReplySchema::ObjectList: return "objects";
        case ReplySchema::RelationList: return "relations";
        case ReplySchema::Caption: return "caption";
        case ReplySchema::TextPrompt: return "prompt";
        case ReplySchema::EditPlanReply: return "plan";
        case ReplySchema::BBoxReply: return "bbox";
        case ReplySchema::ChecklistReply: return "scores";
    }
    return "";
}

std::optional<Json> find_tagged_block(std::string_view reply, std::string_view key) {
    // Fenced form: ```key\n<json>\n```
    const std::string fence = "```" + std::string(key);
    for (auto pos = reply.find(fence); pos != std::string_view::npos; pos = reply.find(fence, pos + 1)) {
        auto body = reply.find('\n', pos);
        if (body == std::string_view::npos) break;
        auto info = reply.substr(pos + 3, body - pos - 3);
        if (info.find_first_not_of(" \t\r", key.size()) != std::string_view::npos) continue;
        auto end = reply.find("```", body);
        if (end == std::string_view::npos) break;
        if (auto j = try_parse(reply.substr(body + 1, end - body - 1))) return j;
    }
    // Inline form: key: <json>, optionally with the key quoted.
    for (auto pos = reply.find(key); pos != std::string_view::npos; pos = reply.find(key, pos + 1)) {
        if (pos > 0 && is_word(reply[pos - 1])) continue;
        std::size_t i = pos + key.size();
        if (i < reply.size() && is_word(reply[i])) continue;
        if (i < reply.size() && reply[i] == '"') ++i;
        while (i < reply.size() && (reply[i] == ' ' || reply[i] == '\t')) ++i;
        if (i >= reply.size() || reply[i] != ':') continue;
        ++i;
        while (i < reply.size() && std::isspace(static_cast<unsigned char>(reply[i]))) ++i;
        auto end = value_end(reply, i);
        if (end == std::string_view::npos) continue;
        if (auto j = try_parse(reply.substr(i, end - i))) return j;
    }
    return std::nullopt;
}

ReplyValue parse_tagged_reply(std::string_view reply, ReplySchema schema) {
    switch (schema) {
        case ReplySchema::ObjectList: {
            ObjectListReply out;
            out.objects = string_list(require_block(reply, schema), reply, "objects");
            if (auto bg = find_tagged_block(reply, "background")) out.background = string_list(*bg, reply, "background");
            return out;
        }
        case ReplySchema::RelationList: {
            auto j = require_block(reply, schema);
            if (!j.is_array()) malformed("relations must be a list of triples", reply);
            RelationListReply out;
            for (const auto& t : j) {
                auto parts = string_list(t, reply, "relation");
                if (parts.size() != 3) malformed("relation must have exactly 3 parts", t.dump());
                out.relations.push_back({parts[0], parts[1], parts[2]});
            }
            return out;
        }
        case ReplySchema::Caption:
        case ReplySchema::TextPrompt:
            return TextReply{non_empty_text(require_block(reply, schema), reply, schema == ReplySchema::Caption ? "caption" : "prompt")};
        case ReplySchema::EditPlanReply: {
            auto j = require_block(reply, schema);
            if (!j.is_object()) malformed("plan must be an object", reply);
            EditPlanReplyValue out;
            out.remove = string_list(j.value("remove", Json::array()), reply, "remove");
            const auto ins = j.value("insert", Json::array());
            if (!ins.is_array()) malformed("insert must be a list", j.dump());
            for (const auto& item : ins) {
                if (!item.is_object() || !item.contains("id") || !item["id"].is_string()) {
                    malformed("insert entries need an id", item.dump());
                }
                PlannedInsertion p{item["id"].get<std::string>(), std::nullopt};
                if (item.contains("bbox") && !item["bbox"].is_null()) p.bbox = four_numbers(item["bbox"], reply);
                out.insert.push_back(std::move(p));
            }
            return out;
        }
        case ReplySchema::BBoxReply: {
            auto j = require_block(reply, schema);
            auto v = four_numbers(j, reply);
            BoundingBox box{v[0], v[1], v[2], v[3]};
            if (!box.valid()) malformed("bbox must satisfy 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1", j.dump());
            return BBoxReplyValue{box};
        }
        case ReplySchema::ChecklistReply: {
            auto j = require_block(reply, schema);
            if (!j.is_array()) malformed("scores must be a list", reply);
            ChecklistReplyValue out;
            for (const auto& v : j) {
                if (!v.is_number()) malformed("scores must be numbers", j.dump());
                out.scores.push_back(v.get<double>());
            }
            return out;
        }
    }
    malformed("unknown schema", reply);
}

}  // namespace sgedit::llm
