// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/scene_parser.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>

#include "sgedit/error.hpp"
#include "sgedit/prompt_library.hpp"

namespace sgedit {

namespace {

std::string normalize(std::string_view s) {
    std::string out;
    bool space = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

llm::Attachment attach(const Image& image) { return llm::Attachment{"image/png", encode_png(image)}; }

std::string format_box(const std::optional<BoundingBox>& box) {
    if (!box) return "[0.00, 0.00, 1.00, 1.00]";
    char buf[96];
    std::snprintf(buf, sizeof buf, "[%.2f, %.2f, %.2f, %.2f]", box->x0, box->y0, box->x1, box->y1);
    return buf;
}

}  // namespace

ParseResult build_scene_graph(const Image& image, llm::ChatProvider& provider) {
    ParseResult result;
    result.graph.image_size = image.size();

    auto describe = llm::render_template(prompts::describe_scene(), {}, {attach(image)});
    result.description = llm::complete_chat(describe, provider);
    if (result.description.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw Error(ErrorCode::MalformedReply, "scene description is empty");
    }

    auto instances_req = llm::render_template(prompts::list_instances(), {{"description", result.description}},
                                              {attach(image)});
    auto instances = llm::parse_reply_as<llm::ObjectListReply>(llm::complete_chat(instances_req, provider),
                                                               llm::ReplySchema::ObjectList);

    std::map<std::string, std::string> id_by_label;
    nlohmann::json labels = nlohmann::json::array();
    auto add_node = [&](const std::string& label, bool background) {
        const auto key = normalize(label);
        if (key.empty() || id_by_label.contains(key)) return;
        ObjectNode node;
        node.id = unique_node_id(result.graph, slugify(label));
        node.label = label;
        node.background = background;
        id_by_label[key] = node.id;
        labels.push_back(label);
        result.graph.nodes.push_back(std::move(node));
    };
    for (const auto& l : instances.objects) add_node(l, false);
    for (const auto& l : instances.background) add_node(l, true);

    auto relations_req = llm::render_template(
        prompts::list_relations(), {{"description", result.description}, {"instances", labels.dump()}}, {attach(image)});
    auto relations = llm::parse_reply_as<llm::RelationListReply>(llm::complete_chat(relations_req, provider),
                                                                 llm::ReplySchema::RelationList);
    for (const auto& t : relations.relations) {
        auto s = id_by_label.find(normalize(t.subject));
        auto o = id_by_label.find(normalize(t.object));
        const auto text = t.subject + " | " + t.predicate + " | " + t.object;
        if (s == id_by_label.end() || o == id_by_label.end()) {
            result.notes.push_back({ParseNote::Kind::UnresolvedRelation, text});
            continue;
        }
        RelationEdge edge{s->second, t.predicate, o->second};
        if (edge.predicate.empty() || result.graph.has_edge(edge)) {
            result.notes.push_back({ParseNote::Kind::DroppedRelation, text});
            continue;
        }
        result.graph.edges.push_back(std::move(edge));
    }
    return result;
}

std::string caption_node(const ObjectNode& node, const Image& image, llm::ChatProvider& provider) {
    auto req = llm::render_template(prompts::caption_object(), {{"label", node.label}, {"bbox", format_box(node.bbox)}},
                                    {attach(image)});
    return llm::parse_reply_as<llm::TextReply>(llm::complete_chat(req, provider), llm::ReplySchema::Caption).text;
}

SceneGraph annotate_nodes(const SceneGraph& graph, const Image& image, Segmenter& segmenter,
                          llm::ChatProvider& provider, std::vector<ParseNote>* notes) {
    SceneGraph out = graph;
    const auto id = image_id(image);
    for (auto& node : out.nodes) {
        auto candidates = segmenter.segment(image, {id, node.label, std::nullopt});
        std::erase_if(candidates, [&](const SegmentCandidate& c) { return c.mask.size() != image.size() || c.mask.empty(); });
        if (const auto* best = select_best(candidates)) {
            const auto tight = *best->mask.tight_bounds();
            node.mask = best->mask;
            const bool box_ok = best->bbox.valid() && best->bbox.rasterize(image.size()).contains(tight);
            node.bbox = box_ok ? best->bbox : BoundingBox::from_pixels(tight, image.size());
            node.ungrounded = false;
        } else {
            node.ungrounded = true;
            if (notes) notes->push_back({ParseNote::Kind::Ungrounded, node.id});
        }
        node.caption = caption_node(node, image, provider);
    }
    return out;
}

ParseResult parse_scene(const Image& image, llm::ChatProvider& provider, Segmenter& segmenter) {
    auto result = build_scene_graph(image, provider);
    result.graph = annotate_nodes(result.graph, image, segmenter, provider, &result.notes);
    return result;
}

}  // namespace sgedit
