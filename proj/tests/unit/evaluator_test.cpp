// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sgedit/error.hpp"
#include "sgedit/evaluator.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/prompt_library.hpp"

namespace sgedit {
namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::PreconditionViolation;
}

SceneGraph golden() { return parse_graph(read_text_file((testing::fixture_dir() / "golden_graph.json").string())); }

std::vector<std::string> descriptions(const Checklist& c) {
    std::vector<std::string> out;
    for (const auto& i : c.items) out.push_back(i.description);
    return out;
}

TEST(Checklist, NormalizationEdgeCases) {
    EXPECT_EQ(Checklist{}.normalized(), 1.0);
    Checklist c{Metric::ElementComposition, {{"a", 3, std::nullopt}}};
    EXPECT_EQ(code_of([&] { (void)c.normalized(); }), ErrorCode::PreconditionViolation);
}

TEST(Checklist, BuiltFromReplaceDelta) {
    const auto g = golden();
    const GraphDelta d{{ReplaceNode{"gray-and-white-cat", "white dog"}}};
    const auto set = build_checklists(g, d, apply_delta(g, d));
    EXPECT_EQ(descriptions(set.ec), (std::vector<std::string>{"remove: gray and white cat", "add: white dog", "preserve: ginger cat",
                                                              "preserve: floor", "preserve: wall"}));
    ASSERT_EQ(set.ra.items.size(), 3u);
    EXPECT_EQ(set.ra.items[1].description, "(white dog, sitting on, floor)");
    EXPECT_EQ(set.iq.items.size(), 4u);
    for (const auto& i : set.iq.items) EXPECT_EQ(i.scale, kQualityScale);
}

TEST(Checklist, RemovalPreservesOthers) {
    const auto g = golden();
    const GraphDelta d{{RemoveNode{"ginger-cat"}}};
    const auto set = build_checklists(g, d, apply_delta(g, d));
    EXPECT_EQ(set.ec.items.front().description, "remove: ginger cat");
    EXPECT_EQ(set.ra.items.size(), 1u);
}

TEST(ScoreWithLlm, ClampsSnapsAndAverages) {
    const auto g = golden();
    const GraphDelta d{{RemoveNode{"ginger-cat"}}};
    const auto set = build_checklists(g, d, apply_delta(g, d));
    testing::OracleLlm oracle;
    oracle.scores["score_element_composition"] = {3, 5, 0, -1};
    oracle.scores["score_relation_alignment"] = {2};
    oracle.scores["score_image_quality"] = {2, 1, 1, 0};
    auto provider = oracle.provider();
    const auto img = testing::two_cats_image();
    const auto r = score_with_llm(set, img, img, *provider, "e1");
    EXPECT_DOUBLE_EQ(r.ec, 0.5);
    EXPECT_DOUBLE_EQ(r.ra, 1.0);
    EXPECT_DOUBLE_EQ(r.iq, 0.5);
    EXPECT_EQ(r.warnings.size(), 3u);
    EXPECT_EQ(r.edit_id, "e1");
}

TEST(ScoreWithLlm, CountMismatchIsMalformed) {
    const auto g = golden();
    const GraphDelta d{{RemoveNode{"ginger-cat"}}};
    testing::OracleLlm oracle;
    oracle.scores["score_element_composition"] = {3};
    auto provider = oracle.provider();
    const auto img = testing::two_cats_image();
    EXPECT_EQ(code_of([&] { score_with_llm(build_checklists(g, d, apply_delta(g, d)), img, img, *provider, "e"); }),
              ErrorCode::MalformedReply);
}

TEST(ScoreWithLlm, AttachesBothImages) {
    std::size_t attachments = 0;
    llm::FunctionProvider count([&](const std::vector<llm::ChatTurn>& t) {
        attachments = t.back().attachments.size();
        return "scores: [2, 2, 2, 2]";
    });
    ChecklistSet set;
    set.iq.items = {{"a", 2, {}}, {"b", 2, {}}, {"c", 2, {}}, {"d", 2, {}}};
    const auto img = testing::two_cats_image();
    EXPECT_DOUBLE_EQ(score_with_llm(set, img, img, count, "e").iq, 1.0);
    EXPECT_EQ(attachments, 2u);
}

TEST(Pearson, Errors) {
    const double a[] = {1, 2}, b[] = {1, 2, 3}, c[] = {4, 4};
    EXPECT_EQ(code_of([&] { pearson(a, b); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([&] { pearson(std::span<const double>(a, 1), std::span<const double>(c, 1)); }), ErrorCode::PreconditionViolation);
    EXPECT_EQ(code_of([&] { pearson(a, c); }), ErrorCode::DegenerateInput);
}

TEST(BackgroundMetrics, IdenticalAndExcluded) {
    const auto img = testing::two_cats_image();
    const auto m = background_metrics(img, img, RegionMask(64, 64));
    EXPECT_EQ(m.mse, 0.0);
    EXPECT_EQ(m.psnr, kPsnrCap);
    EXPECT_NEAR(m.ssim, 1.0, 1e-12);

    auto edited = img;
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) edited.at(x, y, 0) = 0.0;
    }
    const auto ex = RegionMask::from_rect({64, 64}, {0, 0, 16, 16});
    EXPECT_EQ(background_metrics(img, edited, ex).mse, 0.0);
    EXPECT_GT(background_metrics(img, edited, RegionMask(64, 64)).mse, 0.0);
}

TEST(BackgroundMetrics, Errors) {
    const Image a(4, 4), b(4, 5);
    EXPECT_EQ(code_of([&] { background_metrics(a, b, RegionMask(4, 4)); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([&] { background_metrics(a, a, RegionMask(3, 4)); }), ErrorCode::DimensionMismatch);
    EXPECT_EQ(code_of([&] { background_metrics(a, a, RegionMask::from_rect({4, 4}, {0, 0, 4, 4})); }), ErrorCode::EmptyRegion);
}

TEST(BackgroundMetrics, SsimDropsWithNoise) {
    Image a(16, 16), b(16, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            for (int c = 0; c < 3; ++c) {
                a.at(x, y, c) = (x + y) / 30.0;
                b.at(x, y, c) = a.at(x, y, c) + (((x * 7 + y * 3) % 5) - 2) * 0.05;
            }
        }
    }
    const auto m = background_metrics(a, b, RegionMask(16, 16));
    EXPECT_LT(m.ssim, 0.99);
    EXPECT_GT(m.ssim, 0.0);
}

TEST(Report, JsonAndCsv) {
    EvaluationReport r;
    r.edit_id = "edit-1";
    r.ec = 0.75;
    r.ra = 1.0;
    r.iq = 0.5;
    r.checklists.ec.items = {{"add: x", 3, 3.0}};
    r.warnings = {"w"};
    const auto back = report_from_json(report_to_json(r));
    EXPECT_EQ(back.edit_id, "edit-1");
    EXPECT_EQ(back.ec, 0.75);
    ASSERT_EQ(back.checklists.ec.items.size(), 1u);
    EXPECT_EQ(back.checklists.ec.items[0].score, 3.0);
    EXPECT_EQ(back.warnings, r.warnings);
    const std::vector<EvaluationReport> rs = {r};
    const auto csv = reports_to_csv(rs);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "edit_id,ec,ra,iq");
    EXPECT_NE(csv.find("edit-1,0.750000,1.000000,0.500000"), std::string::npos);
}

}  // namespace
}  // namespace sgedit
