// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/concept_planner.hpp"

#include <algorithm>

#include "sgedit/error.hpp"
#include "sgedit/graph_json.hpp"
#include "sgedit/hash.hpp"

namespace sgedit {

TrainingSchedule training_schedule(int n_objects) {
    if (n_objects < 1) throw Error(ErrorCode::PreconditionViolation, "training needs at least one object");
    const int steps = std::clamp(800 + 200 * std::max(0, n_objects - 2), 800, 1200);
    return {steps, kTokenEmbeddingLearningRate, kJointLearningRate};
}

std::string token_placeholder(int index) { return "<opt_" + std::to_string(index) + ">"; }

std::string compose_training_prompt(const ObjectNode& node, int index) {
    if (node.caption.empty()) throw Error(ErrorCode::MissingCaption, "node has no detailed caption", node.id);
    return "a photo of " + token_placeholder(index) + ". " + node.caption;
}

FinetuneJobSpec emit_finetune_job(const SceneGraph& graph) {
    FinetuneJobSpec job;
    for (const auto& node : graph.nodes) {
        if (node.background) continue;
        if (node.ungrounded || !node.mask || node.caption.empty()) {
            throw Error(ErrorCode::UnannotatedNode, "foreground node is not fully annotated", node.id);
        }
        const int index = static_cast<int>(job.entries.size());
        job.entries.push_back({node.id, token_placeholder(index), compose_training_prompt(node, index), *node.mask});
    }
    if (job.entries.empty()) throw Error(ErrorCode::EmptyJob, "graph has no foreground objects to learn");
    job.schedule = training_schedule(static_cast<int>(job.entries.size()));
    job.job_id = "ft-" + sha256_hex(job_to_json(job).dump()).substr(0, 12);
    return job;
}

void validate_receipt(const FinetuneJobSpec& job, const FinetuneReceipt& receipt) {
    if (receipt.job_id != job.job_id) throw Error(ErrorCode::InvalidReceipt, "receipt is for another job", receipt.job_id);
    if (receipt.token_handles.size() != job.entries.size()) {
        throw Error(ErrorCode::InvalidReceipt, "receipt must carry one token handle per object");
    }
    for (const auto& e : job.entries) {
        auto it = receipt.token_handles.find(e.node_id);
        if (it == receipt.token_handles.end() || it->second.empty()) {
            throw Error(ErrorCode::InvalidReceipt, "receipt lacks a token handle", e.node_id);
        }
    }
}

SceneGraph apply_receipt(const SceneGraph& graph, const FinetuneReceipt& receipt) {
    SceneGraph out = graph;
    for (const auto& [id, handle] : receipt.token_handles) {
        auto* node = out.find(id);
        if (node == nullptr) throw Error(ErrorCode::UnknownId, "receipt names a missing node", id);
        node->token = handle;
    }
    return out;
}

FinetuneReceipt complete_instantly(const FinetuneJobSpec& job) {
    FinetuneReceipt r;
    r.job_id = job.job_id;
    r.model_handle = "toy:" + job.job_id;
    for (const auto& e : job.entries) r.token_handles[e.node_id] = e.token;
    return r;
}

nlohmann::json job_to_json(const FinetuneJobSpec& job) {
    Json entries = Json::array();
    for (const auto& e : job.entries) {
        entries.push_back({{"node_id", e.node_id}, {"token", e.token}, {"prompt", e.training_prompt}, {"mask", e.mask.to_rle()}});
    }
    const int phase1 = static_cast<int>(job.schedule.steps * job.phase1_fraction + 0.5);
    return {
        {"op", "finetune"},
        {"job_id", job.job_id},
        {"base_model", job.base_model},
        {"entries", entries},
        {"total_steps", job.schedule.steps},
        {"phase1", {{"trains", "token_embedding"}, {"lr", job.schedule.lr_token}, {"steps", phase1}}},
        {"phase2", {{"trains", "token_embedding+model"}, {"lr", job.schedule.lr_joint}, {"steps", job.schedule.steps - phase1}}},
        {"phase_split", job.phase1_fraction},
    };
}

FinetuneJobSpec job_from_json(const nlohmann::json& j, ImageSize size) {
    FinetuneJobSpec job;
    job.job_id = j.at("job_id").get<std::string>();
    job.base_model = j.at("base_model").get<std::string>();
    for (const auto& e : j.at("entries")) {
        job.entries.push_back({e.at("node_id").get<std::string>(), e.at("token").get<std::string>(),
                               e.at("prompt").get<std::string>(),
                               RegionMask::from_rle(e.at("mask").get<std::string>(), size)});
    }
    job.schedule = {j.at("total_steps").get<int>(), j.at("phase1").at("lr").get<double>(),
                    j.at("phase2").at("lr").get<double>()};
    job.phase1_fraction = j.value("phase_split", 0.5);
    return job;
}

nlohmann::json receipt_to_json(const FinetuneReceipt& receipt) {
    return {{"job_id", receipt.job_id}, {"token_handles", receipt.token_handles}, {"model_handle", receipt.model_handle}};
}

FinetuneReceipt receipt_from_json(const nlohmann::json& j) {
    FinetuneReceipt r;
    r.job_id = j.at("job_id").get<std::string>();
    r.token_handles = j.at("token_handles").get<std::map<std::string, std::string>>();
    r.model_handle = j.value("model_handle", "");
    return r;
}

}  // namespace sgedit
