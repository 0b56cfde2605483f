// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/graph_json.hpp"

#include "sgedit/error.hpp"

namespace sgedit {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidFormat, what); }

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
    return j.at(key);
}

std::string string_field(const Json& j, const char* key) {
    const auto& v = field(j, key);
    if (!v.is_string()) bad(std::string("field '") + key + "' must be a string");
    return v.get<std::string>();
}

}  // namespace

Json box_to_json(const BoundingBox& box) { return Json::array({box.x0, box.y0, box.x1, box.y1}); }

BoundingBox box_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 4) bad("bbox must be an array of 4 numbers");
    for (const auto& v : j) {
        if (!v.is_number()) bad("bbox must be an array of 4 numbers");
    }
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

Json edge_to_json(const RelationEdge& e) { return {{"s", e.subject}, {"p", e.predicate}, {"o", e.object}}; }

RelationEdge edge_from_json(const Json& j) {
    return {string_field(j, "s"), string_field(j, "p"), string_field(j, "o")};
}

Json graph_to_json(const SceneGraph& graph) {
    Json nodes = Json::array();
    for (const auto& n : graph.nodes) {
        Json node = {
            {"id", n.id},
            {"label", n.label},
            {"caption", n.caption},
            {"bbox", n.bbox ? box_to_json(*n.bbox) : Json(nullptr)},
            {"mask", n.mask ? Json(n.mask->to_rle()) : Json(nullptr)},
            {"token", n.token ? Json(*n.token) : Json(nullptr)},
        };
        Json flags = Json::array();
        if (n.background) flags.push_back("background");
        if (n.ungrounded) flags.push_back("ungrounded");
        if (!flags.empty()) node["flags"] = std::move(flags);
        nodes.push_back(std::move(node));
    }
    Json edges = Json::array();
    for (const auto& e : graph.edges) edges.push_back(edge_to_json(e));
    return {{"image_size", {graph.image_size.width, graph.image_size.height}}, {"nodes", nodes}, {"edges", edges}};
}

SceneGraph graph_from_json(const Json& j) {
    SceneGraph g;
    const auto& size = field(j, "image_size");
    if (!size.is_array() || size.size() != 2 || !size[0].is_number_integer() || !size[1].is_number_integer()) {
        bad("image_size must be [W,H]");
    }
    g.image_size = {size[0].get<int>(), size[1].get<int>()};
    for (const auto& jn : field(j, "nodes")) {
        ObjectNode n;
        n.id = string_field(jn, "id");
        n.label = string_field(jn, "label");
        if (jn.contains("caption") && !jn["caption"].is_null()) n.caption = jn["caption"].get<std::string>();
        if (jn.contains("bbox") && !jn["bbox"].is_null()) n.bbox = box_from_json(jn["bbox"]);
        if (jn.contains("mask") && !jn["mask"].is_null()) {
            if (!jn["mask"].is_string()) bad("mask must be an rle string");
            n.mask = RegionMask::from_rle(jn["mask"].get<std::string>(), g.image_size);
        }
        if (jn.contains("token") && !jn["token"].is_null()) n.token = jn["token"].get<std::string>();
        if (jn.contains("flags")) {
            for (const auto& f : jn["flags"]) {
                if (f == "background") n.background = true;
                else if (f == "ungrounded") n.ungrounded = true;
                else bad("unknown node flag");
            }
        }
        g.nodes.push_back(std::move(n));
    }
    for (const auto& je : field(j, "edges")) g.edges.push_back(edge_from_json(je));
    return g;
}

std::string dump_graph(const SceneGraph& graph) { return graph_to_json(graph).dump(2) + "\n"; }

SceneGraph parse_graph(std::string_view text) { return graph_from_json(parse_json(text)); }

Json delta_to_json(const GraphDelta& delta) {
    Json actions = Json::array();
    for (const auto& action : delta.actions) {
        std::visit(
            [&](const auto& a) {
                using T = std::decay_t<decltype(a)>;
                if constexpr (std::is_same_v<T, AddNode>) {
                    Json rels = Json::array();
                    for (const auto& r : a.relations) rels.push_back(edge_to_json(r));
                    actions.push_back({{"op", "add"}, {"id", a.id}, {"label", a.label}, {"relations", rels}});
                } else if constexpr (std::is_same_v<T, RemoveNode>) {
                    actions.push_back({{"op", "remove"}, {"id", a.id}});
                } else if constexpr (std::is_same_v<T, ReplaceNode>) {
                    actions.push_back({{"op", "replace"}, {"id", a.id}, {"label", a.label}});
                } else {
                    actions.push_back({{"op", "modify_edge"}, {"edge", edge_to_json(a.edge)}, {"predicate", a.predicate}});
                }
            },
            action);
    }
    return {{"actions", actions}};
}

GraphDelta delta_from_json(const Json& j) {
    GraphDelta d;
    for (const auto& ja : field(j, "actions")) {
        const auto op = string_field(ja, "op");
        if (op == "add") {
            AddNode a;
            if (ja.contains("id")) a.id = ja["id"].get<std::string>();
            a.label = string_field(ja, "label");
            if (ja.contains("relations")) {
                for (const auto& r : ja["relations"]) a.relations.push_back(edge_from_json(r));
            }
            d.actions.emplace_back(std::move(a));
        } else if (op == "remove") {
            d.actions.emplace_back(RemoveNode{string_field(ja, "id")});
        } else if (op == "replace") {
            d.actions.emplace_back(ReplaceNode{string_field(ja, "id"), string_field(ja, "label")});
        } else if (op == "modify_edge") {
            d.actions.emplace_back(ModifyEdge{edge_from_json(field(ja, "edge")), string_field(ja, "predicate")});
        } else {
            bad("unknown delta op '" + op + "'");
        }
    }
    return d;
}

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::InvalidFormat, std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace sgedit
