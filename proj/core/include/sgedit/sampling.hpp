// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "sgedit/backend.hpp"
#include "sgedit/concept_planner.hpp"
#include "sgedit/edit_controller.hpp"
#include "sgedit/segmenter.hpp"

namespace sgedit {

inline constexpr double kDefaultObjectPhaseEnd = 0.8;    // T_m
inline constexpr double kDefaultGenerationEnd = 0.6;     // T_n

enum class Phase { PerObject, Combined, Blend };

/// Normalized switch times over N steps. Step k runs at time k/N.
struct PhaseSchedule {
    double t_m = kDefaultObjectPhaseEnd;
    double t_n = kDefaultGenerationEnd;
    int steps = 20;

    /// Throws ConfigError unless 1 > t_m > t_n > 0 and the rounded phase
    /// lengths partition the N steps.
    void validate() const;
    [[nodiscard]] int object_steps() const;    // round((1 - t_m) N)
    [[nodiscard]] int combined_steps() const;  // round((t_m - t_n) N)
    [[nodiscard]] int blend_steps() const;     // round(t_n N)
    [[nodiscard]] Phase phase_of(int k) const;
};

/// latents[k] = z_k for k = 0..N; caches[k-1] holds the self-attention
/// features of z_k.
struct SamplingTrajectory {
    std::vector<Latent> latents;
    std::vector<KvCache> caches;

    [[nodiscard]] int steps() const noexcept { return static_cast<int>(latents.size()) - 1; }
    [[nodiscard]] const Latent& noise() const { return latents.back(); }
    [[nodiscard]] const Latent& clean() const { return latents.front(); }
};

SamplingTrajectory ddim_invert(const Image& image, std::string_view prompt, DenoisingBackend& backend);
SamplingTrajectory ddim_invert(const Latent& z0, std::string_view prompt, DenoisingBackend& backend);

/// Plain forward sampling from z_T.
Latent sample(const Latent& z_T, std::string_view prompt, DenoisingBackend& backend);

/// Fresh noise inside M_rm (any resolution, resampled to the latent grid),
/// then sampling under `y_non` with the cached source K/V substituted at every
/// step and masked keys excluded. Throws AllMasked.
Latent run_removal(const SamplingTrajectory& source, const RegionMask& m_rm, std::string_view y_non,
                   DenoisingBackend& backend, std::uint64_t seed);

struct InsertionOptions {
    PhaseSchedule schedule;
    double lambda_max = 1.0;
    std::uint64_t seed = 0;
    ImageSize image_size;
    bool require_segmenter = false;  // otherwise a failed segmenter falls back to the box
};

struct InsertionResult {
    Latent latent;
    std::map<std::string, RegionMask> masks;  // M_seg per inserted node, image resolution
    std::vector<std::string> notes;
};

/// Two-phase multi-instance insertion over the background trajectory.
/// Throws EmptyInsertion, ConfigError, SegmenterUnavailable.
InsertionResult run_insertion(const SamplingTrajectory& background, const EditPlan& plan, const InsertionOptions& options,
                              DenoisingBackend& backend, Segmenter* segmenter);

/// Maps each prompt token to the segment of the insertion whose name it
/// belongs to, 0 elsewhere.
std::vector<int> map_prompt_tokens(const std::vector<std::string>& prompt_tokens,
                                   const std::vector<std::pair<int, std::vector<std::string>>>& names);

struct ExecutionOptions {
    PhaseSchedule schedule;
    double lambda_max = 1.0;
    std::uint64_t seed = 0;
    const FinetuneReceipt* receipt = nullptr;
    bool require_segmenter = false;
};

struct ExecutionResult {
    Image image;
    SceneGraph graph;
    bool ran_removal = false;
    bool ran_insertion = false;
    std::vector<std::string> notes;
};

/// Throws MissingReceipt when a prompt uses a learned token without a
/// receipt, InvalidReceipt when the receipt lacks that token.
void check_plan_receipt(const EditPlan& plan, const FinetuneReceipt* receipt);

/// Stores M_seg and its tight box on each inserted node.
void refresh_inserted_nodes(SceneGraph& graph, const std::map<std::string, RegionMask>& masks);

/// Removals first with one unioned mask, then insertions on the result.
ExecutionResult execute_plan(const EditPlan& plan, const Image& image, const ExecutionOptions& options,
                             DenoisingBackend& backend, Segmenter* segmenter);

}  // namespace sgedit
