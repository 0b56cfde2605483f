// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sgedit::llm {

using Json = nlohmann::json;

enum class Role { System, User, Assistant };

std::string_view to_string(Role role) noexcept;
Role role_from_string(std::string_view text);

/// Image sent alongside a turn. Only the content hash takes part in request
/// fingerprints.
struct Attachment {
    std::string media_type = "image/png";
    std::vector<std::uint8_t> bytes;

    [[nodiscard]] std::string content_hash() const;
    friend bool operator==(const Attachment&, const Attachment&) = default;
};

struct ChatTurn {
    Role role = Role::User;
    std::string content;
    std::vector<Attachment> attachments;

    friend bool operator==(const ChatTurn&, const ChatTurn&) = default;
};

/// Canonical JSON of a request with attachments replaced by their hashes.
Json canonical_request(const std::vector<ChatTurn>& turns);

/// SHA-256 over the canonical request.
std::string fingerprint(const std::vector<ChatTurn>& turns);

class ChatProvider {
  public:
    virtual ~ChatProvider() = default;
    /// Returns the assistant reply. Throws ProviderUnavailable or ReplayMiss.
    virtual std::string complete(const std::vector<ChatTurn>& turns) = 0;
};

/// Validates the turns and forwards them to `provider`.
std::string complete_chat(const std::vector<ChatTurn>& turns, ChatProvider& provider);

// Transcript ---------------------------------------------------------------

struct TranscriptEntry {
    std::string fingerprint;
    Json request;  // canonical request
    std::string reply;
};

/// Append-only list of request/reply pairs; one JSON object per line on disk.
class Transcript {
  public:
    Transcript() = default;
    Transcript(const Transcript& other);
    Transcript& operator=(const Transcript& other);

    static Transcript parse_jsonl(std::string_view text);
    static Transcript load(const std::string& path);

    void append(TranscriptEntry entry);
    [[nodiscard]] std::optional<std::string> lookup(std::string_view fingerprint) const;
    [[nodiscard]] std::vector<TranscriptEntry> entries() const;
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] std::string to_jsonl() const;
    void save(const std::string& path) const;

  private:
    mutable std::mutex mutex_;
    std::vector<TranscriptEntry> entries_;
};

// Providers ----------------------------------------------------------------

/// Serves stored replies keyed by request fingerprint; read-only.
class ReplayProvider : public ChatProvider {
  public:
    explicit ReplayProvider(std::shared_ptr<const Transcript> transcript) : transcript_(std::move(transcript)) {}
    std::string complete(const std::vector<ChatTurn>& turns) override;

  private:
    std::shared_ptr<const Transcript> transcript_;
};

/// Forwards to an inner provider and appends each exchange to a transcript.
class RecordingProvider : public ChatProvider {
  public:
    RecordingProvider(ChatProvider& inner, std::shared_ptr<Transcript> transcript)
        : inner_(inner), transcript_(std::move(transcript)) {}
    std::string complete(const std::vector<ChatTurn>& turns) override;
    [[nodiscard]] const std::shared_ptr<Transcript>& transcript() const noexcept { return transcript_; }

  private:
    ChatProvider& inner_;
    std::shared_ptr<Transcript> transcript_;
};

/// Adapts a callable; used for scripted conversations and oracle fixtures.
class FunctionProvider : public ChatProvider {
  public:
    using Fn = std::function<std::string(const std::vector<ChatTurn>&)>;
    explicit FunctionProvider(Fn fn) : fn_(std::move(fn)) {}
    std::string complete(const std::vector<ChatTurn>& turns) override { return fn_(turns); }

  private:
    Fn fn_;
};

/// Always fails with ProviderUnavailable.
class UnavailableProvider : public ChatProvider {
  public:
    std::string complete(const std::vector<ChatTurn>& turns) override;
};

struct ProviderConfig {
    std::string base_url;  // e.g. http://localhost:8080 (an OpenAI-compatible chat API)
    std::string model;
    std::string api_key;
    int retries = 2;
    int timeout_seconds = 120;

    /// SGEDIT_LLM_BASE_URL, SGEDIT_LLM_MODEL, SGEDIT_LLM_API_KEY.
    static std::optional<ProviderConfig> from_env();
    /// `{"base_url", "model", "api_key", "retries"}`.
    static ProviderConfig from_file(const std::string& path);
};

/// POSTs `{model, messages}` to `<base_url>/v1/chat/completions` and returns
/// `choices[0].message.content`.
class HttpChatProvider : public ChatProvider {
  public:
    explicit HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {}
    std::string complete(const std::vector<ChatTurn>& turns) override;

    /// Request body in the OpenAI chat format; images become data URLs.
    [[nodiscard]] Json request_body(const std::vector<ChatTurn>& turns) const;

  private:
    ProviderConfig config_;
};

}  // namespace sgedit::llm
