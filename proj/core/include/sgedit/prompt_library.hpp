// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "sgedit/llm/prompt_template.hpp"
#include "sgedit/llm/reply_parser.hpp"

namespace sgedit::prompts {

// Scene parsing conversation.
const llm::PromptTemplate& describe_scene();    // free text reply
const llm::PromptTemplate& list_instances();    // {{description}} -> ObjectList
const llm::PromptTemplate& list_relations();    // {{description}} {{instances}} -> RelationList
const llm::PromptTemplate& caption_object();    // {{label}} {{bbox}} -> Caption

// Editing controller.
const llm::PromptTemplate& plan_operations();   // {{graph}} {{modifications}} -> EditPlanReply
const llm::PromptTemplate& combine_prompt();    // {{objects}} {{relations}} -> TextPrompt

// Checklist scoring, one per metric. {{items}} -> ChecklistReply
const llm::PromptTemplate& score_element_composition();
const llm::PromptTemplate& score_relation_alignment();
const llm::PromptTemplate& score_image_quality();

struct ShippedTemplate {
    const llm::PromptTemplate* tpl;
    std::optional<llm::ReplySchema> schema;  // absent for free-text replies
};

std::vector<ShippedTemplate> shipped_templates();

}  // namespace sgedit::prompts
