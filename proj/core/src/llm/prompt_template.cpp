// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/llm/prompt_template.hpp"

#include <algorithm>

#include "sgedit/error.hpp"

namespace sgedit::llm {

namespace {

template <typename Fn>
void scan_placeholders(std::string_view body, Fn&& on_literal_and_name) {
    std::size_t pos = 0;
    while (pos < body.size()) {
        auto open = body.find("{{", pos);
        auto close = open == std::string_view::npos ? open : body.find("}}", open + 2);
        if (open == std::string_view::npos || close == std::string_view::npos) {
            on_literal_and_name(body.substr(pos), std::string_view{});
            return;
        }
        on_literal_and_name(body.substr(pos, open - pos), body.substr(open + 2, close - open - 2));
        pos = close + 2;
    }
}

}  // namespace

std::vector<std::string> placeholders(std::string_view body) {
    std::vector<std::string> out;
    scan_placeholders(body, [&](std::string_view, std::string_view name) {
        if (!name.empty() && std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
    });
    return out;
}

std::string render_text(std::string_view body, const Bindings& bindings) {
    std::string out;
    scan_placeholders(body, [&](std::string_view literal, std::string_view name) {
        out += literal;
        if (name.empty()) return;
        auto it = bindings.find(std::string(name));
        if (it == bindings.end()) {
            throw Error(ErrorCode::UnboundPlaceholder, "template placeholder has no binding", std::string(name));
        }
        out += it->second;
    });
    return out;
}

std::vector<ChatTurn> render_template(const PromptTemplate& tpl, const Bindings& bindings,
                                      std::vector<Attachment> attachments) {
    std::vector<ChatTurn> turns;
    turns.push_back({Role::System, tpl.system, {}});
    for (const auto& ex : tpl.examples) {
        turns.push_back({Role::User, ex.input, {}});
        turns.push_back({Role::Assistant, ex.reply, {}});
    }
    turns.push_back({Role::User, render_text(tpl.body, bindings), std::move(attachments)});
    return turns;
}

}  // namespace sgedit::llm
