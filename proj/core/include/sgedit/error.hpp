// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sgedit {

enum class ErrorCode {
    // graph-core
    UnknownId,
    InvalidDelta,
    DimensionMismatch,
    EmptyBox,
    InvalidBox,
    InvalidFormat,
    // llm-gateway
    ProviderUnavailable,
    ReplayMiss,
    MalformedReply,
    UnboundPlaceholder,
    // scene-parser
    SegmenterUnavailable,
    // concept-planner
    MissingCaption,
    UnannotatedNode,
    EmptyJob,
    InvalidReceipt,
    // edit-controller
    MissingMask,
    // attention-mod
    ShapeMismatch,
    DegenerateRow,
    AllMasked,
    UnmappedToken,
    NegativeLambda,
    OutOfRange,
    // sampling-orchestrator
    BackendFailure,
    EmptyInsertion,
    ConfigError,
    MissingReceipt,
    // evaluator
    DegenerateInput,
    EmptyRegion,
    // service
    NotFound,
    Conflict,
    BadRequest,
    PreconditionViolation,
};

std::string_view to_string(ErrorCode code) noexcept;
std::optional<ErrorCode> error_code_from_string(std::string_view name) noexcept;

/// Every failure raised by the engine carries one of the codes above. `detail`
/// names the offending input when there is one.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& message, std::string detail = {})
        : std::runtime_error(std::string(to_string(code)) + ": " + message),
          code_(code),
          detail_(std::move(detail)) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] const std::string& detail() const noexcept { return detail_; }

  private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace sgedit
