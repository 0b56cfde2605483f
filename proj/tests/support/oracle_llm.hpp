// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sgedit/llm/chat.hpp"

namespace sgedit::testing {

/// Ground truth the scripted model answers from.
struct SceneScript {
    std::string description;
    std::vector<std::string> objects;
    std::vector<std::string> background;
    std::vector<std::array<std::string, 3>> relations;
    std::map<std::string, std::string> captions;  // label -> caption
};

/// Scripted stand-in for every prompt template. Planning follows the
/// brute-force rule: remove x -> remove {x}; add x -> insert {x}; replace x
/// -> remove {x}, insert {x}; modify edge (s, p, o) -> remove {s}, insert {s}.
/// Insert boxes come from `box_for` when set, else the node's current box, else
/// a fixed grid-aligned box.
class OracleLlm {
  public:
    explicit OracleLlm(SceneScript scene = {});

    std::string reply(const std::vector<llm::ChatTurn>& turns);
    std::shared_ptr<llm::ChatProvider> provider();

    /// Scores returned per metric template; default is every item at full scale.
    std::map<std::string, std::vector<double>> scores;
    /// Per-node insertion boxes handed back by the planner.
    std::map<std::string, std::array<double, 4>> box_for;
    /// When set, planner replies carry no boxes.
    bool omit_boxes = false;

    [[nodiscard]] int calls(const std::string& template_name) const;

  private:
    std::string plan(const std::string& user) const;
    static std::string score_reply(const std::string& user, int scale, const std::vector<double>* fixed);

    SceneScript scene_;
    std::map<std::string, int> calls_;
};

}  // namespace sgedit::testing
