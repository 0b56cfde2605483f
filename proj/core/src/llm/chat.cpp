// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/llm/chat.hpp"

#include <algorithm>

#include "sgedit/error.hpp"
#include "sgedit/hash.hpp"
#include "sgedit/image.hpp"

namespace sgedit::llm {

std::string_view to_string(Role role) noexcept {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view text) {
    if (text == "system") return Role::System;
    if (text == "user") return Role::User;
    if (text == "assistant") return Role::Assistant;
    throw Error(ErrorCode::InvalidFormat, "unknown chat role", std::string(text));
}

std::string Attachment::content_hash() const { return "sha256:" + sha256_hex(bytes); }

Json canonical_request(const std::vector<ChatTurn>& turns) {
    Json out = Json::array();
    for (const auto& t : turns) {
        Json atts = Json::array();
        for (const auto& a : t.attachments) atts.push_back(a.content_hash());
        out.push_back({{"role", to_string(t.role)}, {"content", t.content}, {"attachments", atts}});
    }
    return out;
}

std::string fingerprint(const std::vector<ChatTurn>& turns) { return sha256_hex(canonical_request(turns).dump()); }

std::string complete_chat(const std::vector<ChatTurn>& turns, ChatProvider& provider) {
    if (turns.empty()) throw Error(ErrorCode::PreconditionViolation, "chat request has no turns");
    for (const auto& t : turns) {
        if (t.content.empty() && t.attachments.empty()) {
            throw Error(ErrorCode::PreconditionViolation, "chat turn has neither content nor attachments");
        }
    }
    return provider.complete(turns);
}

// Transcript ---------------------------------------------------------------

Transcript::Transcript(const Transcript& other) : entries_(other.entries()) {}

Transcript& Transcript::operator=(const Transcript& other) {
    if (this != &other) {
        auto copy = other.entries();
        std::lock_guard lock(mutex_);
        entries_ = std::move(copy);
    }
    return *this;
}

Transcript Transcript::parse_jsonl(std::string_view text) {
    Transcript t;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(start, nl - start);
        start = nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw Error(ErrorCode::InvalidFormat, std::string("bad transcript line: ") + e.what());
        }
        if (!j.contains("fingerprint") || !j.contains("reply")) {
            throw Error(ErrorCode::InvalidFormat, "transcript line needs fingerprint and reply");
        }
        t.entries_.push_back({j["fingerprint"].get<std::string>(), j.value("request", Json::array()),
                              j["reply"].get<std::string>()});
    }
    return t;
}

Transcript Transcript::load(const std::string& path) { return parse_jsonl(read_text_file(path)); }

void Transcript::append(TranscriptEntry entry) {
    std::lock_guard lock(mutex_);
    entries_.push_back(std::move(entry));
}

std::optional<std::string> Transcript::lookup(std::string_view fp) const {
    std::lock_guard lock(mutex_);
    for (const auto& e : entries_) {
        if (e.fingerprint == fp) return e.reply;
    }
    return std::nullopt;
}

std::vector<TranscriptEntry> Transcript::entries() const {
    std::lock_guard lock(mutex_);
    return entries_;
}

std::size_t Transcript::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::string Transcript::to_jsonl() const {
    std::lock_guard lock(mutex_);
    std::string out;
    for (const auto& e : entries_) {
        out += Json{{"fingerprint", e.fingerprint}, {"request", e.request}, {"reply", e.reply}}.dump();
        out.push_back('\n');
    }
    return out;
}

void Transcript::save(const std::string& path) const { write_text_file(path, to_jsonl()); }

// Providers ----------------------------------------------------------------

std::string ReplayProvider::complete(const std::vector<ChatTurn>& turns) {
    const auto fp = fingerprint(turns);
    if (auto reply = transcript_->lookup(fp)) return *reply;
    throw Error(ErrorCode::ReplayMiss, "no recorded reply for request", fp);
}

std::string RecordingProvider::complete(const std::vector<ChatTurn>& turns) {
    auto reply = inner_.complete(turns);
    transcript_->append({fingerprint(turns), canonical_request(turns), reply});
    return reply;
}

std::string UnavailableProvider::complete(const std::vector<ChatTurn>&) {
    throw Error(ErrorCode::ProviderUnavailable, "no language model provider configured");
}

}  // namespace sgedit::llm
