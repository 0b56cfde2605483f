// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/edit_controller.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "sgedit/error.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/llm/reply_parser.hpp"
#include "sgedit/prompt_library.hpp"

namespace sgedit {

namespace {

const BoundingBox kDefaultBox{0.375, 0.70, 0.625, 0.95};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool has_word(std::string_view text, std::string_view word) {
    const auto t = lower(text);
    for (auto pos = t.find(word); pos != std::string::npos; pos = t.find(word, pos + 1)) {
        const bool left = pos == 0 || !std::isalpha(static_cast<unsigned char>(t[pos - 1]));
        const auto end = pos + word.size();
        const bool right = end == t.size() || !std::isalpha(static_cast<unsigned char>(t[end]));
        if (left && right) return true;
    }
    return false;
}

std::optional<BoundingBox> node_box(const SceneGraph& g, std::string_view id) {
    const auto* n = g.find(id);
    if (n == nullptr) return std::nullopt;
    if (n->bbox) return n->bbox;
    if (n->mask) {
        if (auto t = n->mask->tight_bounds()) return BoundingBox::from_pixels(*t, g.image_size);
    }
    return std::nullopt;
}

BoundingBox place_relative(std::string_view predicate, const std::optional<BoundingBox>& anchor) {
    if (!anchor) return kDefaultBox;
    const auto& x = *anchor;
    BoundingBox box = kDefaultBox;
    if (lower(predicate).find("in front of") != std::string::npos) {
        const double third = x.height() / 3.0;
        box = {x.x0, x.y1 - third, x.x1, x.y1 + third};
    } else if (has_word(predicate, "on") || has_word(predicate, "onto")) {
        box = {x.x0, x.y0 - 0.35 * x.height(), x.x1, x.y0};
    } else {
        return kDefaultBox;
    }
    box = box.clipped();
    return box.valid() ? box : kDefaultBox;
}

/// Source graph as shown to the controller: ids, labels, boxes, edges.
Json graph_summary(const SceneGraph& g) {
    Json nodes = Json::array();
    for (const auto& n : g.nodes) {
        auto box = node_box(g, n.id);
        nodes.push_back({{"id", n.id}, {"label", n.label}, {"bbox", box ? box_to_json(*box) : Json(nullptr)}});
    }
    Json edges = Json::array();
    for (const auto& e : g.edges) edges.push_back(edge_to_json(e));
    return {{"nodes", nodes}, {"edges", edges}};
}

/// Delta as shown to the controller; replacements carry the old region.
Json modifications_summary(const SceneGraph& g, const GraphDelta& delta) {
    Json actions = delta_to_json(delta)["actions"];
    for (std::size_t k = 0; k < delta.actions.size(); ++k) {
        if (const auto* r = std::get_if<ReplaceNode>(&delta.actions[k])) {
            if (auto box = node_box(g, r->id)) actions[k]["hint_bbox"] = box_to_json(*box);
        }
    }
    return actions;
}

const DeltaAction* action_inserting(const GraphDelta& delta, std::string_view id) {
    const DeltaAction* found = nullptr;
    for (const auto& a : delta.actions) {
        std::visit(
            [&](const auto& act) {
                using T = std::decay_t<decltype(act)>;
                if constexpr (std::is_same_v<T, AddNode> || std::is_same_v<T, ReplaceNode>) {
                    if (act.id == id) found = &a;
                } else if constexpr (std::is_same_v<T, ModifyEdge>) {
                    if (act.edge.subject == id) found = &a;
                }
            },
            a);
    }
    return found;
}

bool mentions(std::string_view text, std::string_view name) { return lower(text).find(lower(name)) != std::string::npos; }

}  // namespace

std::string non_object_prompt() { return kNonObjectPrompt; }

std::string prompt_name(const ObjectNode& node) { return node.token ? *node.token : node.label; }

GraphDelta resolve_new_ids(const SceneGraph& graph, const GraphDelta& delta) {
    GraphDelta out = delta;
    SceneGraph g = graph;
    for (auto& action : out.actions) {
        if (auto* add = std::get_if<AddNode>(&action); add && add->id.empty()) {
            add->id = unique_node_id(g, slugify(add->label));
            for (auto& r : add->relations) {
                if (r.subject.empty()) r.subject = add->id;
                if (r.object.empty()) r.object = add->id;
            }
        }
        g = apply_delta(g, GraphDelta{{action}});
    }
    return out;
}

BoundingBox propose_bbox_fallback(const DeltaAction& action, const SceneGraph& graph) {
    return std::visit(
        [&](const auto& a) -> BoundingBox {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, AddNode>) {
                for (const auto& r : a.relations) {
                    if ((r.subject == a.id || r.subject.empty()) && r.object != a.id) {
                        return place_relative(r.predicate, node_box(graph, r.object));
                    }
                }
                return kDefaultBox;
            } else if constexpr (std::is_same_v<T, ModifyEdge>) {
                return place_relative(a.predicate, node_box(graph, a.edge.object));
            } else if constexpr (std::is_same_v<T, ReplaceNode>) {
                auto box = node_box(graph, a.id);
                return box && box->valid() ? *box : kDefaultBox;
            } else {
                return kDefaultBox;
            }
        },
        action);
}

std::string render_generation_prompt(const std::vector<Insertion>& insertions, const SceneGraph& target,
                                     llm::ChatProvider& provider) {
    if (insertions.empty()) throw Error(ErrorCode::PreconditionViolation, "generation prompt needs an insertion");
    auto name_of = [&](std::string_view id) {
        const auto* n = target.find(id);
        return n ? prompt_name(*n) : std::string(id);
    };
    auto label_of = [&](std::string_view id) {
        const auto* n = target.find(id);
        return n ? n->label : std::string(id);
    };

    if (insertions.size() == 1) {
        const auto& id = insertions.front().node_id;
        std::string text = "A photo of " + name_of(id);
        for (const auto& e : target.edges) {
            if (e.subject == id && e.object != id) {
                text += " " + e.predicate + " the " + label_of(e.object);
                break;
            }
        }
        return text;
    }

    std::set<std::string> inserted;
    Json objects = Json::array();
    for (const auto& ins : insertions) {
        inserted.insert(ins.node_id);
        objects.push_back(name_of(ins.node_id));
    }
    Json relations = Json::array();
    for (const auto& e : target.edges) {
        if (!inserted.contains(e.subject) && !inserted.contains(e.object)) continue;
        auto side = [&](const std::string& id) { return inserted.contains(id) ? name_of(id) : label_of(id); };
        relations.push_back({side(e.subject), e.predicate, side(e.object)});
    }
    auto req = llm::render_template(prompts::combine_prompt(),
                                    {{"objects", objects.dump()}, {"relations", relations.dump()}});
    auto text = llm::parse_reply_as<llm::TextReply>(llm::complete_chat(req, provider), llm::ReplySchema::TextPrompt).text;
    for (const auto& o : objects) {
        if (!mentions(text, o.get<std::string>())) {
            throw Error(ErrorCode::MalformedReply, "combined prompt omits an inserted object", o.get<std::string>());
        }
    }
    return text;
}

EditPlan plan_edit(const SceneGraph& graph, const GraphDelta& delta_in, llm::ChatProvider& provider) {
    const GraphDelta delta = resolve_new_ids(graph, delta_in);
    EditPlan plan;
    plan.source = graph;
    plan.target = apply_delta(graph, delta);
    if (delta.empty()) return plan;

    auto req = llm::render_template(prompts::plan_operations(),
                                    {{"graph", graph_summary(graph).dump()},
                                     {"modifications", modifications_summary(graph, delta).dump()}});
    const auto reply_text = llm::complete_chat(req, provider);
    auto reply = llm::parse_reply_as<llm::EditPlanReplyValue>(reply_text, llm::ReplySchema::EditPlanReply);

    std::set<std::string> seen_rm;
    for (const auto& id : reply.remove) {
        if (!seen_rm.insert(id).second) continue;
        const auto* node = graph.find(id);
        if (node == nullptr) throw Error(ErrorCode::MalformedReply, "plan removes an unknown node", id);
        std::optional<RegionMask> mask = node->mask;
        if (!mask && node->bbox && node->bbox->valid()) mask = RegionMask::from_box(graph.image_size, *node->bbox);
        if (!mask || mask->empty()) throw Error(ErrorCode::MissingMask, "removal target has neither mask nor box", id);
        plan.removals.push_back({id, std::move(*mask)});
    }

    std::set<std::string> seen_ins;
    for (const auto& item : reply.insert) {
        if (!seen_ins.insert(item.id).second) continue;
        const auto* node = plan.target.find(item.id);
        if (node == nullptr) throw Error(ErrorCode::MalformedReply, "plan inserts a node absent from the target graph", item.id);
        Insertion ins;
        ins.node_id = item.id;
        ins.label = node->label;
        ins.name = prompt_name(*node);
        std::optional<BoundingBox> box;
        if (item.bbox) {
            const auto& v = *item.bbox;
            auto clipped = BoundingBox{v[0], v[1], v[2], v[3]}.clipped();
            if (clipped.valid()) box = clipped;
        }
        if (!box) {
            const auto* action = action_inserting(delta, item.id);
            box = action ? propose_bbox_fallback(*action, plan.target) : kDefaultBox;
            ins.fallback_box = true;
        }
        ins.bbox = *box;
        ins.prompt = "a photo of " + ins.name + ".";
        plan.insertions.push_back(std::move(ins));
    }

    if (!plan.insertions.empty()) plan.combined_prompt = render_generation_prompt(plan.insertions, plan.target, provider);
    return plan;
}

Json plan_to_json(const EditPlan& plan) {
    Json removals = Json::array();
    for (const auto& r : plan.removals) removals.push_back({{"id", r.node_id}, {"mask", r.mask.to_rle()}});
    Json insertions = Json::array();
    for (const auto& i : plan.insertions) {
        insertions.push_back({{"id", i.node_id},
                              {"label", i.label},
                              {"name", i.name},
                              {"bbox", box_to_json(i.bbox)},
                              {"prompt", i.prompt},
                              {"fallback_box", i.fallback_box}});
    }
    return {{"removals", removals},
            {"insertions", insertions},
            {"combined_prompt", plan.combined_prompt},
            {"non_object_prompt", plan.non_object_prompt},
            {"source_graph", graph_to_json(plan.source)},
            {"target_graph", graph_to_json(plan.target)}};
}

EditPlan plan_from_json(const Json& j) {
    EditPlan plan;
    plan.source = graph_from_json(j.at("source_graph"));
    plan.target = graph_from_json(j.at("target_graph"));
    for (const auto& r : j.at("removals")) {
        plan.removals.push_back({r.at("id").get<std::string>(),
                                 RegionMask::from_rle(r.at("mask").get<std::string>(), plan.source.image_size)});
    }
    for (const auto& i : j.at("insertions")) {
        Insertion ins;
        ins.node_id = i.at("id").get<std::string>();
        ins.label = i.at("label").get<std::string>();
        ins.name = i.value("name", ins.label);
        ins.bbox = box_from_json(i.at("bbox"));
        ins.prompt = i.at("prompt").get<std::string>();
        ins.fallback_box = i.value("fallback_box", false);
        plan.insertions.push_back(std::move(ins));
    }
    plan.combined_prompt = j.value("combined_prompt", "");
    plan.non_object_prompt = j.value("non_object_prompt", std::string(kNonObjectPrompt));
    return plan;
}

}  // namespace sgedit
