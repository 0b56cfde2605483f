// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/scene_graph.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "sgedit/error.hpp"

namespace sgedit {

namespace {

std::string edge_key(const RelationEdge& e) { return e.subject + "|" + e.predicate + "|" + e.object; }

void require_node(const SceneGraph& g, std::string_view id) {
    if (g.find(id) == nullptr) throw Error(ErrorCode::UnknownId, "delta references a missing node", std::string(id));
}

void apply_one(SceneGraph& g, const AddNode& a) {
    if (a.label.empty()) throw Error(ErrorCode::InvalidDelta, "added node needs a label");
    std::string id = a.id.empty() ? unique_node_id(g, slugify(a.label)) : a.id;
    if (g.find(id) != nullptr) throw Error(ErrorCode::InvalidDelta, "added node id already exists", id);
    ObjectNode node;
    node.id = id;
    node.label = a.label;
    g.nodes.push_back(std::move(node));
    for (auto r : a.relations) {
        // An empty endpoint stands for the node being added.
        if (r.subject.empty()) r.subject = id;
        if (r.object.empty()) r.object = id;
        if (r.subject != id && r.object != id) {
            throw Error(ErrorCode::InvalidDelta, "relation does not reference the added node", edge_key(r));
        }
        require_node(g, r.subject);
        require_node(g, r.object);
        if (r.predicate.empty()) throw Error(ErrorCode::InvalidDelta, "relation predicate is empty", edge_key(r));
        if (g.has_edge(r)) throw Error(ErrorCode::InvalidDelta, "relation already exists", edge_key(r));
        g.edges.push_back(std::move(r));
    }
}

void apply_one(SceneGraph& g, const RemoveNode& a) {
    require_node(g, a.id);
    std::erase_if(g.nodes, [&](const ObjectNode& n) { return n.id == a.id; });
    std::erase_if(g.edges, [&](const RelationEdge& e) { return e.subject == a.id || e.object == a.id; });
}

void apply_one(SceneGraph& g, const ReplaceNode& a) {
    auto* node = g.find(a.id);
    if (node == nullptr) throw Error(ErrorCode::UnknownId, "delta references a missing node", a.id);
    if (a.label.empty()) throw Error(ErrorCode::InvalidDelta, "replacement needs a label", a.id);
    node->label = a.label;
    node->caption.clear();
    node->token.reset();
}

void apply_one(SceneGraph& g, const ModifyEdge& a) {
    auto it = std::find(g.edges.begin(), g.edges.end(), a.edge);
    if (it == g.edges.end()) throw Error(ErrorCode::UnknownId, "delta references a missing edge", edge_key(a.edge));
    if (a.predicate.empty()) throw Error(ErrorCode::InvalidDelta, "new predicate is empty", edge_key(a.edge));
    RelationEdge changed{a.edge.subject, a.predicate, a.edge.object};
    if (changed != a.edge && g.has_edge(changed)) {
        throw Error(ErrorCode::InvalidDelta, "modified edge duplicates an existing edge", edge_key(changed));
    }
    it->predicate = a.predicate;
}

}  // namespace

const ObjectNode* SceneGraph::find(std::string_view id) const noexcept {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const ObjectNode& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

ObjectNode* SceneGraph::find(std::string_view id) noexcept {
    auto it = std::find_if(nodes.begin(), nodes.end(), [&](const ObjectNode& n) { return n.id == id; });
    return it == nodes.end() ? nullptr : &*it;
}

bool SceneGraph::has_edge(const RelationEdge& e) const noexcept {
    return std::find(edges.begin(), edges.end(), e) != edges.end();
}

std::vector<RelationEdge> SceneGraph::incident(std::string_view id) const {
    std::vector<RelationEdge> out;
    for (const auto& e : edges) {
        if (e.subject == id || e.object == id) out.push_back(e);
    }
    return out;
}

std::string slugify(std::string_view label) {
    std::string out;
    bool pending_dash = false;
    for (unsigned char c : label) {
        if (std::isalnum(c)) {
            if (pending_dash && !out.empty()) out.push_back('-');
            pending_dash = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_dash = true;
        }
    }
    return out.empty() ? std::string("node") : out;
}

std::string unique_node_id(const SceneGraph& graph, std::string_view base) {
    std::string id(base);
    for (int k = 2; graph.find(id) != nullptr; ++k) id = std::string(base) + "-" + std::to_string(k);
    return id;
}

SceneGraph apply_delta(const SceneGraph& graph, const GraphDelta& delta) {
    SceneGraph out = graph;
    for (const auto& action : delta.actions) {
        std::visit([&](const auto& a) { apply_one(out, a); }, action);
    }
    return out;
}

GraphDelta diff_graphs(const SceneGraph& src, const SceneGraph& dst) {
    GraphDelta delta;
    for (const auto& n : src.nodes) {
        if (dst.find(n.id) == nullptr) delta.actions.emplace_back(RemoveNode{n.id});
    }
    for (const auto& n : src.nodes) {
        const auto* d = dst.find(n.id);
        if (d != nullptr && d->label != n.label) delta.actions.emplace_back(ReplaceNode{n.id, d->label});
    }

    // Predicate changes between surviving nodes, paired by (subject, object).
    std::vector<RelationEdge> lost, gained;
    for (const auto& e : src.edges) {
        if (dst.find(e.subject) && dst.find(e.object) && !dst.has_edge(e)) lost.push_back(e);
    }
    for (const auto& e : dst.edges) {
        if (src.find(e.subject) && src.find(e.object) && !src.has_edge(e)) gained.push_back(e);
    }
    std::vector<bool> used(gained.size(), false);
    for (const auto& e : lost) {
        for (std::size_t k = 0; k < gained.size(); ++k) {
            if (!used[k] && gained[k].subject == e.subject && gained[k].object == e.object) {
                used[k] = true;
                delta.actions.emplace_back(ModifyEdge{e, gained[k].predicate});
                break;
            }
        }
    }

    std::set<std::string> present;
    for (const auto& n : src.nodes) {
        if (dst.find(n.id)) present.insert(n.id);
    }
    for (const auto& n : dst.nodes) {
        if (src.find(n.id) != nullptr) continue;
        present.insert(n.id);
        AddNode add{n.id, n.label, {}};
        for (const auto& e : dst.edges) {
            const bool touches = e.subject == n.id || e.object == n.id;
            if (touches && present.contains(e.subject) && present.contains(e.object)) add.relations.push_back(e);
        }
        delta.actions.emplace_back(std::move(add));
    }
    return delta;
}

std::string_view to_string(ViolationRule rule) noexcept {
    switch (rule) {
        case ViolationRule::DuplicateNodeId: return "DuplicateNodeId";
        case ViolationRule::EmptyNodeId: return "EmptyNodeId";
        case ViolationRule::DuplicateEdge: return "DuplicateEdge";
        case ViolationRule::DanglingEdge: return "DanglingEdge";
        case ViolationRule::EmptyPredicate: return "EmptyPredicate";
        case ViolationRule::MaskSizeMismatch: return "MaskSizeMismatch";
        case ViolationRule::MaskBoxMismatch: return "MaskBoxMismatch";
        case ViolationRule::InvalidBox: return "InvalidBox";
        case ViolationRule::InvalidImageSize: return "InvalidImageSize";
    }
    return "Unknown";
}

std::vector<Violation> validate_graph(const SceneGraph& graph) {
    std::vector<Violation> out;
    const bool size_ok = graph.image_size.width > 0 && graph.image_size.height > 0;
    if (!size_ok) out.push_back({ViolationRule::InvalidImageSize, ""});

    std::set<std::string> ids;
    for (const auto& n : graph.nodes) {
        if (n.id.empty()) out.push_back({ViolationRule::EmptyNodeId, n.label});
        if (!ids.insert(n.id).second) out.push_back({ViolationRule::DuplicateNodeId, n.id});
        if (n.bbox && !n.bbox->valid()) out.push_back({ViolationRule::InvalidBox, n.id});
        if (n.mask && n.mask->size() != graph.image_size) out.push_back({ViolationRule::MaskSizeMismatch, n.id});
        if (size_ok && n.mask && n.bbox && n.bbox->valid() && n.mask->size() == graph.image_size) {
            auto tight = n.mask->tight_bounds();
            if (tight && !n.bbox->rasterize(graph.image_size).contains(*tight)) {
                out.push_back({ViolationRule::MaskBoxMismatch, n.id});
            }
        }
    }

    std::set<RelationEdge> triples;
    for (const auto& e : graph.edges) {
        const auto key = edge_key(e);
        if (e.predicate.empty()) out.push_back({ViolationRule::EmptyPredicate, key});
        if (!ids.contains(e.subject) || !ids.contains(e.object)) out.push_back({ViolationRule::DanglingEdge, key});
        if (!triples.insert(e).second) out.push_back({ViolationRule::DuplicateEdge, key});
    }
    return out;
}

}  // namespace sgedit
