// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "sgedit/image.hpp"
#include "sgedit/llm/chat.hpp"
#include "sgedit/scene_graph.hpp"
#include "sgedit/segmenter.hpp"

namespace sgedit {

struct ParseNote {
    enum class Kind { UnresolvedRelation, DroppedRelation, Ungrounded };
    Kind kind;
    std::string detail;
};

struct ParseResult {
    SceneGraph graph;
    std::string description;
    std::vector<ParseNote> notes;
};

/// describe -> list instances -> list relations. Nodes carry labels and the
/// background flag only. Relations naming unlisted instances are dropped and
/// reported as UnresolvedRelation notes.
ParseResult build_scene_graph(const Image& image, llm::ChatProvider& provider);

/// Per-node caption query. Throws MalformedReply on an empty or untagged reply.
std::string caption_node(const ObjectNode& node, const Image& image, llm::ChatProvider& provider);

/// Grounds every node with the best segmenter candidate and captions it.
/// Nodes without a candidate are flagged `ungrounded` and kept.
SceneGraph annotate_nodes(const SceneGraph& graph, const Image& image, Segmenter& segmenter,
                          llm::ChatProvider& provider, std::vector<ParseNote>* notes = nullptr);

/// build_scene_graph followed by annotate_nodes.
ParseResult parse_scene(const Image& image, llm::ChatProvider& provider, Segmenter& segmenter);

}  // namespace sgedit
