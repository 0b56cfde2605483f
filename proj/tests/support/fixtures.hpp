// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oracle_llm.hpp"
#include "sgedit/image.hpp"
#include "sgedit/scene_graph.hpp"
#include "sgedit/segmenter.hpp"

namespace sgedit::testing {

inline constexpr std::uint64_t kTwoCatsSeed = 20240611;

/// 64x64 block-constant scene: wall over floor, two cats standing on the
/// floor line. Every region is aligned to the 8-pixel latent grid.
Image two_cats_image();
SceneScript two_cats_script();
nlohmann::json two_cats_segmenter_seed();

/// The scripted session as delta JSON documents, one of each kind.
std::vector<nlohmann::json> two_cats_session();

/// Oracle configured for the two-cats scene and the session's insertion boxes.
OracleLlm two_cats_oracle();

/// Writes image.png, segmenter_seed.json, session.json, transcript.jsonl and
/// golden_graph.json into `dir`, recording the whole session against the
/// oracle on the toy backend.
void write_two_cats_fixtures(const std::filesystem::path& dir);

/// Replays the shipped session in `dir` from its transcript and seeds.
struct ReplayOutcome {
    std::string parsed_graph;  // canonical text form
    std::string archive;       // serialized project archive
};
ReplayOutcome replay_two_cats(const std::filesystem::path& dir);

std::filesystem::path fixture_dir();

/// Random valid graph with up to `max_nodes` nodes, grid-aligned boxes and
/// masks on a 64x64 canvas.
SceneGraph random_graph(std::mt19937_64& rng, int max_nodes);

}  // namespace sgedit::testing
