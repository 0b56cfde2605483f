// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgedit/mask.hpp"

namespace sgedit::llm {

/// Each schema reads one tagged block: `key: <json>` inline, or a fenced
/// block whose info string is the key.
enum class ReplySchema {
    ObjectList,      // objects: ["..."]   (optional  background: ["..."])
    RelationList,    // relations: [["subject","predicate","object"], ...]
    Caption,         // caption: "..."
    TextPrompt,      // prompt: "..."
    EditPlanReply,   // plan: {"remove":["id"], "insert":[{"id":"..","bbox":[x0,y0,x1,y1]}]}
    BBoxReply,       // bbox: [x0,y0,x1,y1]
    ChecklistReply,  // scores: [n, ...]
};

std::string_view block_key(ReplySchema schema) noexcept;

struct ObjectListReply {
    std::vector<std::string> objects;
    std::vector<std::string> background;
};

struct Triple {
    std::string subject, predicate, object;
    friend bool operator==(const Triple&, const Triple&) = default;
};

struct RelationListReply {
    std::vector<Triple> relations;
};

struct TextReply {
    std::string text;
};

struct PlannedInsertion {
    std::string id;
    std::optional<std::array<double, 4>> bbox;  // unvalidated, the controller clips
};

struct EditPlanReplyValue {
    std::vector<std::string> remove;
    std::vector<PlannedInsertion> insert;
};

struct BBoxReplyValue {
    BoundingBox box;
};

struct ChecklistReplyValue {
    std::vector<double> scores;
};

using ReplyValue = std::variant<ObjectListReply, RelationListReply, TextReply, EditPlanReplyValue, BBoxReplyValue,
                                ChecklistReplyValue>;

/// Locates the block for `key` and parses its JSON value. Tolerates
/// surrounding prose; returns nullopt when no parseable block exists.
std::optional<nlohmann::json> find_tagged_block(std::string_view reply, std::string_view key);

/// Throws MalformedReply with the offending span in Error::detail.
ReplyValue parse_tagged_reply(std::string_view reply, ReplySchema schema);

template <typename T>
T parse_reply_as(std::string_view reply, ReplySchema schema) {
    return std::get<T>(parse_tagged_reply(reply, schema));
}

}  // namespace sgedit::llm
