// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sgedit/mask.hpp"

namespace sgedit {

struct ObjectNode {
    std::string id;
    std::string label;
    std::string caption;  // empty until annotated
    std::optional<RegionMask> mask;
    std::optional<BoundingBox> bbox;
    std::optional<std::string> token;  // learned concept handle, e.g. "<opt_0>"
    bool background = false;           // simplified background element ("floor", "field")
    bool ungrounded = false;           // the segmenter found no candidate

    friend bool operator==(const ObjectNode&, const ObjectNode&) = default;
};

struct RelationEdge {
    std::string subject;
    std::string predicate;
    std::string object;

    friend bool operator==(const RelationEdge&, const RelationEdge&) = default;
    friend auto operator<=>(const RelationEdge&, const RelationEdge&) = default;
};

struct SceneGraph {
    ImageSize image_size;
    std::vector<ObjectNode> nodes;
    std::vector<RelationEdge> edges;

    [[nodiscard]] const ObjectNode* find(std::string_view id) const noexcept;
    [[nodiscard]] ObjectNode* find(std::string_view id) noexcept;
    [[nodiscard]] bool has_edge(const RelationEdge& e) const noexcept;
    /// Edges where `id` is subject or object, in graph order.
    [[nodiscard]] std::vector<RelationEdge> incident(std::string_view id) const;

    friend bool operator==(const SceneGraph&, const SceneGraph&) = default;
};

// Delta actions ------------------------------------------------------------

struct AddNode {
    std::string id;  // empty: derived from the label
    std::string label;
    std::vector<RelationEdge> relations;  // each must reference the new node

    friend bool operator==(const AddNode&, const AddNode&) = default;
};

struct RemoveNode {
    std::string id;
    friend bool operator==(const RemoveNode&, const RemoveNode&) = default;
};

struct ReplaceNode {
    std::string id;
    std::string label;
    friend bool operator==(const ReplaceNode&, const ReplaceNode&) = default;
};

struct ModifyEdge {
    RelationEdge edge;
    std::string predicate;
    friend bool operator==(const ModifyEdge&, const ModifyEdge&) = default;
};

using DeltaAction = std::variant<AddNode, RemoveNode, ReplaceNode, ModifyEdge>;

struct GraphDelta {
    std::vector<DeltaAction> actions;

    [[nodiscard]] bool empty() const noexcept { return actions.empty(); }
    friend bool operator==(const GraphDelta&, const GraphDelta&) = default;
};

/// Lowercase, hyphen-joined form of a label ("ginger cat" -> "ginger-cat").
std::string slugify(std::string_view label);

/// Returns `base` or `base-2`, `base-3`, ... whichever is not yet a node id.
std::string unique_node_id(const SceneGraph& graph, std::string_view base);

/// Applies the actions in order to a copy of `graph`. Replaced nodes keep their
/// geometry and incident edges; their caption and token are cleared.
SceneGraph apply_delta(const SceneGraph& graph, const GraphDelta& delta);

/// Delta that turns `src` into `dst`. Exact for any `dst` reachable from `src`
/// by delta actions; edge differences outside that vocabulary are not expressed.
GraphDelta diff_graphs(const SceneGraph& src, const SceneGraph& dst);

enum class ViolationRule {
    DuplicateNodeId,
    EmptyNodeId,
    DuplicateEdge,
    DanglingEdge,
    EmptyPredicate,
    MaskSizeMismatch,
    MaskBoxMismatch,
    InvalidBox,
    InvalidImageSize,
};

std::string_view to_string(ViolationRule rule) noexcept;

struct Violation {
    ViolationRule rule;
    std::string id;  // node id, or "s|p|o" for edges
    friend bool operator==(const Violation&, const Violation&) = default;
};

std::vector<Violation> validate_graph(const SceneGraph& graph);

}  // namespace sgedit
