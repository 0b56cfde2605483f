// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sgedit/concept_planner.hpp"
#include "sgedit/error.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/prompt_library.hpp"
#include "sgedit/scene_parser.hpp"

namespace sgedit {
namespace {

MockSegmenter two_cats_segmenter() { return MockSegmenter::from_json(testing::two_cats_segmenter_seed()); }

bool has_note(const ParseResult& r, ParseNote::Kind k, const std::string& detail) {
    for (const auto& n : r.notes) {
        if (n.kind == k && n.detail.find(detail) != std::string::npos) return true;
    }
    return false;
}

TEST(SceneParser, TwoCatsMatchesGolden) {
    testing::OracleLlm oracle(testing::two_cats_script());
    auto provider = oracle.provider();
    auto seg = two_cats_segmenter();
    const auto r = parse_scene(testing::two_cats_image(), *provider, seg);
    EXPECT_TRUE(r.notes.empty());
    EXPECT_TRUE(validate_graph(r.graph).empty());
    ASSERT_EQ(r.graph.nodes.size(), 4u);
    EXPECT_EQ(r.graph.edges.size(), 3u);
    const auto& cat = r.graph.nodes[0];
    EXPECT_EQ(cat.id, "ginger-cat");
    EXPECT_EQ(cat.mask->count(), 16u * 24u);
    EXPECT_EQ(*cat.bbox, (BoundingBox{0.125, 0.375, 0.375, 0.75}));
    EXPECT_FALSE(cat.background);
    EXPECT_TRUE(r.graph.find("wall")->background);
    EXPECT_EQ(r.graph.find("floor")->mask->count(), 64u * 32u - 2u * 16u * 16u);

    const auto tuned = apply_receipt(r.graph, complete_instantly(emit_finetune_job(r.graph)));
    EXPECT_EQ(dump_graph(tuned), read_text_file((testing::fixture_dir() / "golden_graph.json").string()));
    EXPECT_EQ(oracle.calls(prompts::caption_object().name), 4);
    EXPECT_EQ(oracle.calls(prompts::describe_scene().name), 1);
}

TEST(SceneParser, NotesForUnresolvedDuplicateAndUngrounded) {
    auto script = testing::two_cats_script();
    script.objects.push_back("lamp");
    script.relations.push_back({"unicorn", "near", "wall"});
    script.relations.push_back({"ginger cat", "sitting on", "floor"});
    testing::OracleLlm oracle(script);
    auto provider = oracle.provider();
    auto seg = two_cats_segmenter();
    const auto r = parse_scene(testing::two_cats_image(), *provider, seg);
    EXPECT_TRUE(has_note(r, ParseNote::Kind::UnresolvedRelation, "unicorn"));
    EXPECT_TRUE(has_note(r, ParseNote::Kind::DroppedRelation, "ginger cat"));
    EXPECT_TRUE(has_note(r, ParseNote::Kind::Ungrounded, "lamp"));
    const auto* lamp = r.graph.find("lamp");
    ASSERT_NE(lamp, nullptr);
    EXPECT_TRUE(lamp->ungrounded);
    EXPECT_FALSE(lamp->mask.has_value());
    EXPECT_FALSE(lamp->caption.empty());
}

TEST(SceneParser, DuplicateLabelsCollapse) {
    auto script = testing::two_cats_script();
    script.objects.push_back("Ginger  Cat");
    testing::OracleLlm oracle(script);
    auto provider = oracle.provider();
    const auto r = build_scene_graph(testing::two_cats_image(), *provider);
    EXPECT_EQ(r.graph.nodes.size(), 4u);
}

TEST(SceneParser, Failures) {
    auto script = testing::two_cats_script();
    script.description = "  ";
    testing::OracleLlm empty(script);
    auto p1 = empty.provider();
    auto seg = two_cats_segmenter();
    try {
        parse_scene(testing::two_cats_image(), *p1, seg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedReply);
    }
    testing::OracleLlm oracle(testing::two_cats_script());
    auto p2 = oracle.provider();
    UnavailableSegmenter down;
    try {
        parse_scene(testing::two_cats_image(), *p2, down);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::SegmenterUnavailable);
    }
}

TEST(Segmenter, SelectBestOrdering) {
    const ImageSize s{8, 8};
    std::vector<SegmentCandidate> c = {
        {RegionMask::from_rect(s, {0, 0, 2, 2}), BoundingBox{0, 0, 0.25, 0.25}, 0.5},
        {RegionMask::from_rect(s, {4, 4, 8, 8}), BoundingBox{0.5, 0.5, 1, 1}, 0.9},
        {RegionMask::from_rect(s, {0, 0, 4, 4}), BoundingBox{0, 0, 0.5, 0.5}, 0.9},
    };
    EXPECT_EQ(select_best(c), &c[2]);
    EXPECT_EQ(select_best({}), nullptr);
}

TEST(Segmenter, MockFiltersByBoxAndFallsBack) {
    auto seg = two_cats_segmenter();
    const auto img = testing::two_cats_image();
    const auto all = seg.segment(img, {image_id(img), "ginger cat", std::nullopt});
    ASSERT_EQ(all.size(), 1u);
    const auto missed = seg.segment(img, {image_id(img), "ginger cat", BoundingBox{0.75, 0, 1, 0.25}});
    ASSERT_EQ(missed.size(), 1u);
    EXPECT_EQ(missed[0].mask, RegionMask::from_box(img.size(), {0.75, 0, 1, 0.25}));
    EXPECT_TRUE(seg.segment(img, {image_id(img), "unicorn", std::nullopt}).empty());
    EXPECT_EQ(MockSegmenter::from_json(seg.to_json()).to_json(), seg.to_json());
}

TEST(Segmenter, WireRoundTrip) {
    const SegmentRequest req{"abc", "cat", BoundingBox{0, 0.25, 0.5, 1}};
    const auto back = segment_request_from_json(segment_request_to_json(req));
    EXPECT_EQ(back.image_id, "abc");
    EXPECT_EQ(back.box, req.box);
    const std::vector<SegmentCandidate> c = {{RegionMask::from_rect({4, 4}, {1, 1, 3, 3}), BoundingBox{0.25, 0.25, 0.75, 0.75}, 0.7}};
    const auto parsed = candidates_from_json(candidates_to_json(c), {4, 4});
    ASSERT_EQ(parsed.size(), 1u);
    EXPECT_EQ(parsed[0].mask, c[0].mask);
    EXPECT_EQ(parsed[0].score, 0.7);
}

}  // namespace
}  // namespace sgedit
