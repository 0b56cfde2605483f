// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgedit/llm/chat.hpp"
#include "sgedit/scene_graph.hpp"

namespace sgedit {

/// Fixed prompt used for every removal and for the non-object region.
inline constexpr const char* kNonObjectPrompt = "A photo with no objects or people, only the background.";

std::string non_object_prompt();

struct Removal {
    std::string node_id;
    RegionMask mask;
};

struct Insertion {
    std::string node_id;
    std::string label;
    std::string name;            // learned token or label
    BoundingBox bbox;
    std::string prompt;          // single-object prompt, "a photo of <name>."
    bool fallback_box = false;   // the model's box was missing or degenerate
};

/// Ordered remove-then-insert edit operations.
struct EditPlan {
    std::vector<Removal> removals;
    std::vector<Insertion> insertions;
    std::string combined_prompt;
    std::string non_object_prompt = kNonObjectPrompt;
    SceneGraph source;
    SceneGraph target;

    [[nodiscard]] bool empty() const noexcept { return removals.empty() && insertions.empty(); }
};

/// Name used in prompts: the learned token when present, otherwise the label.
std::string prompt_name(const ObjectNode& node);

/// Fills in the ids apply_delta would assign to AddNode actions without one.
GraphDelta resolve_new_ids(const SceneGraph& graph, const GraphDelta& delta);

/// Queries the controller model for (removals, insertions, boxes) and builds
/// the plan. Throws MalformedReply, MissingMask, UnknownId.
EditPlan plan_edit(const SceneGraph& graph, const GraphDelta& delta, llm::ChatProvider& provider);

/// Single insertion: "A photo of <name> <predicate> the <object>". Several:
/// asks the model to integrate them by their relations. Throws
/// PreconditionViolation for an empty list and MalformedReply when the reply
/// omits an object's name.
std::string render_generation_prompt(const std::vector<Insertion>& insertions, const SceneGraph& target,
                                     llm::ChatProvider& provider);

/// Deterministic placement when the model gives no usable box. For "on X":
/// X's width, 35% of X's height, resting on X's top edge. For "in front of X":
/// X's width over X's lower third. Otherwise a 25% x 25% box at center bottom.
BoundingBox propose_bbox_fallback(const DeltaAction& action, const SceneGraph& graph);

nlohmann::json plan_to_json(const EditPlan& plan);
EditPlan plan_from_json(const nlohmann::json& j);

}  // namespace sgedit
