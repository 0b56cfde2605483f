// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "sgedit/scene_graph.hpp"

namespace sgedit {

using Json = nlohmann::json;

/// `[x0, y0, x1, y1]`.
Json box_to_json(const BoundingBox& box);
BoundingBox box_from_json(const Json& j);

Json edge_to_json(const RelationEdge& e);
RelationEdge edge_from_json(const Json& j);

/// Scene-graph document:
/// `{"image_size":[W,H],"nodes":[{"id","label","caption","bbox","mask","token"}],"edges":[{"s","p","o"}]}`
/// Nodes may also carry `"flags":["background","ungrounded"]`.
Json graph_to_json(const SceneGraph& graph);
SceneGraph graph_from_json(const Json& j);

/// Canonical text form (sorted keys, two-space indent, trailing newline).
std::string dump_graph(const SceneGraph& graph);
SceneGraph parse_graph(std::string_view text);

/// `{"actions":[{"op":"add"|"remove"|"replace"|"modify_edge", ...}]}`
Json delta_to_json(const GraphDelta& delta);
GraphDelta delta_from_json(const Json& j);

/// Parses JSON text, mapping parse failures to Error(InvalidFormat).
Json parse_json(std::string_view text);

}  // namespace sgedit
