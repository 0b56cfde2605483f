// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sgedit/scene_graph.hpp"

namespace sgedit {

inline constexpr double kTokenEmbeddingLearningRate = 5e-4;
inline constexpr double kJointLearningRate = 2e-6;
inline constexpr const char* kBaseModel = "stabilityai/stable-diffusion-2-1-base";

struct TrainingSchedule {
    int steps = 0;
    double lr_token = 0.0;  // phase 1: frozen model, token embedding only
    double lr_joint = 0.0;  // phase 2: token embedding and model together
};

/// 800 steps for up to two objects, +200 per extra object, capped at 1200.
TrainingSchedule training_schedule(int n_objects);

/// Placeholder for the k-th learned concept: "<opt_k>".
std::string token_placeholder(int index);

/// "a photo of <opt_k>. " followed by the node caption. Throws MissingCaption.
std::string compose_training_prompt(const ObjectNode& node, int index);

struct FinetuneEntry {
    std::string node_id;
    std::string token;
    std::string training_prompt;
    RegionMask mask;
};

struct FinetuneJobSpec {
    std::string job_id;
    std::string base_model = kBaseModel;
    std::vector<FinetuneEntry> entries;
    TrainingSchedule schedule;
    double phase1_fraction = 0.5;  // share of total steps spent in phase 1
};

/// One entry per foreground node. Throws UnannotatedNode (naming the node) when
/// a foreground node lacks a caption or mask, EmptyJob when there is none.
FinetuneJobSpec emit_finetune_job(const SceneGraph& graph);

struct FinetuneReceipt {
    std::string job_id;
    std::map<std::string, std::string> token_handles;  // node id -> handle
    std::string model_handle;
};

/// Checks one handle per job entry; throws InvalidReceipt otherwise.
void validate_receipt(const FinetuneJobSpec& job, const FinetuneReceipt& receipt);

/// Writes the learned token handles into the matching nodes.
SceneGraph apply_receipt(const SceneGraph& graph, const FinetuneReceipt& receipt);

/// Receipt the in-process toy backend issues immediately: every entry's
/// placeholder becomes its handle.
FinetuneReceipt complete_instantly(const FinetuneJobSpec& job);

nlohmann::json job_to_json(const FinetuneJobSpec& job);
FinetuneJobSpec job_from_json(const nlohmann::json& j, ImageSize size);
nlohmann::json receipt_to_json(const FinetuneReceipt& receipt);
FinetuneReceipt receipt_from_json(const nlohmann::json& j);

}  // namespace sgedit
