// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "sgedit/llm/chat.hpp"

namespace sgedit::llm {

struct InContextExample {
    std::string input;
    std::string reply;
};

/// System text plus a user body with `{{name}}` placeholders.
struct PromptTemplate {
    std::string name;
    std::string system;
    std::string body;
    std::vector<InContextExample> examples;
};

using Bindings = std::map<std::string, std::string>;

/// Placeholder names in order of first appearance.
std::vector<std::string> placeholders(std::string_view body);

/// Substitutes every placeholder; throws UnboundPlaceholder naming the first
/// missing binding.
std::string render_text(std::string_view body, const Bindings& bindings);

/// system, (example user, example assistant)*, user. Attachments go on the
/// final user turn.
std::vector<ChatTurn> render_template(const PromptTemplate& tpl, const Bindings& bindings,
                                      std::vector<Attachment> attachments = {});

}  // namespace sgedit::llm
