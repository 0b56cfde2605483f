// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "sgedit/concept_planner.hpp"
#include "sgedit/error.hpp"
#include "sgedit/graph_json.hpp"

namespace sgedit {
namespace {

SceneGraph parsed_two_cats() {
    auto g = parse_graph(read_text_file((testing::fixture_dir() / "golden_graph.json").string()));
    for (auto& n : g.nodes) n.token.reset();
    return g;
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::PreconditionViolation;
}

TEST(TrainingSchedule, StepsClampAtBothEnds) {
    EXPECT_EQ(training_schedule(6).steps, 1200);
    EXPECT_EQ(training_schedule(40).steps, 1200);
    EXPECT_EQ(code_of([] { training_schedule(0); }), ErrorCode::PreconditionViolation);
}

TEST(FinetuneJob, ForegroundObjectsOnly) {
    const auto job = emit_finetune_job(parsed_two_cats());
    ASSERT_EQ(job.entries.size(), 2u);
    EXPECT_EQ(job.entries[0].node_id, "ginger-cat");
    EXPECT_EQ(job.entries[0].token, "<opt_0>");
    EXPECT_EQ(job.entries[1].token, "<opt_1>");
    EXPECT_EQ(job.entries[0].training_prompt,
              "a photo of <opt_0>. A fluffy ginger cat with amber eyes, sitting upright with its tail curled.");
    EXPECT_EQ(job.schedule.steps, 800);
    EXPECT_EQ(job.phase1_fraction, 0.5);
    EXPECT_EQ(job.base_model, kBaseModel);
    EXPECT_EQ(job.job_id.rfind("ft-", 0), 0u);
    EXPECT_EQ(emit_finetune_job(parsed_two_cats()).job_id, job.job_id);
}

TEST(FinetuneJob, JsonRoundTrip) {
    const auto job = emit_finetune_job(parsed_two_cats());
    const auto back = job_from_json(job_to_json(job), {64, 64});
    EXPECT_EQ(back.job_id, job.job_id);
    ASSERT_EQ(back.entries.size(), 2u);
    EXPECT_EQ(back.entries[1].mask, job.entries[1].mask);
    EXPECT_EQ(back.entries[1].training_prompt, job.entries[1].training_prompt);
    EXPECT_EQ(back.schedule.lr_token, 5e-4);
    const auto receipt = complete_instantly(job);
    const auto rb = receipt_from_json(receipt_to_json(receipt));
    EXPECT_EQ(rb.token_handles, receipt.token_handles);
    EXPECT_EQ(rb.model_handle, receipt.model_handle);
}

TEST(FinetuneJob, Preconditions) {
    auto g = parsed_two_cats();
    g.nodes[0].caption.clear();
    EXPECT_EQ(code_of([&] { emit_finetune_job(g); }), ErrorCode::UnannotatedNode);
    g = parsed_two_cats();
    g.nodes[1].mask.reset();
    EXPECT_EQ(code_of([&] { emit_finetune_job(g); }), ErrorCode::UnannotatedNode);
    g = parsed_two_cats();
    std::erase_if(g.nodes, [](const ObjectNode& n) { return !n.background; });
    g.edges.clear();
    EXPECT_EQ(code_of([&] { emit_finetune_job(g); }), ErrorCode::EmptyJob);
    ObjectNode n;
    n.label = "cat";
    EXPECT_EQ(code_of([&] { compose_training_prompt(n, 0); }), ErrorCode::MissingCaption);
}

TEST(FinetuneReceipt, ValidateAndApply) {
    const auto g = parsed_two_cats();
    const auto job = emit_finetune_job(g);
    auto receipt = complete_instantly(job);
    EXPECT_NO_THROW(validate_receipt(job, receipt));
    const auto tuned = apply_receipt(g, receipt);
    EXPECT_EQ(tuned.find("ginger-cat")->token, "<opt_0>");
    EXPECT_FALSE(tuned.find("floor")->token.has_value());

    auto other = receipt;
    other.job_id = "ft-other";
    EXPECT_EQ(code_of([&] { validate_receipt(job, other); }), ErrorCode::InvalidReceipt);
    auto missing = receipt;
    missing.token_handles.erase("ginger-cat");
    EXPECT_EQ(code_of([&] { validate_receipt(job, missing); }), ErrorCode::InvalidReceipt);
    auto ghost = receipt;
    ghost.token_handles["ghost"] = "<opt_9>";
    EXPECT_EQ(code_of([&] { apply_receipt(g, ghost); }), ErrorCode::UnknownId);
}

}  // namespace
}  // namespace sgedit
