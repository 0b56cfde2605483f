// Copyright 2026 The sgedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgedit/error.hpp"

namespace sgedit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownId: return "UnknownId";
        case ErrorCode::InvalidDelta: return "InvalidDelta";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyBox: return "EmptyBox";
        case ErrorCode::InvalidBox: return "InvalidBox";
        case ErrorCode::InvalidFormat: return "InvalidFormat";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::ReplayMiss: return "ReplayMiss";
        case ErrorCode::MalformedReply: return "MalformedReply";
        case ErrorCode::UnboundPlaceholder: return "UnboundPlaceholder";
        case ErrorCode::SegmenterUnavailable: return "SegmenterUnavailable";
        case ErrorCode::MissingCaption: return "MissingCaption";
        case ErrorCode::UnannotatedNode: return "UnannotatedNode";
        case ErrorCode::EmptyJob: return "EmptyJob";
        case ErrorCode::InvalidReceipt: return "InvalidReceipt";
        case ErrorCode::MissingMask: return "MissingMask";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::DegenerateRow: return "DegenerateRow";
        case ErrorCode::AllMasked: return "AllMasked";
        case ErrorCode::UnmappedToken: return "UnmappedToken";
        case ErrorCode::NegativeLambda: return "NegativeLambda";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::BackendFailure: return "BackendFailure";
        case ErrorCode::EmptyInsertion: return "EmptyInsertion";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::MissingReceipt: return "MissingReceipt";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::EmptyRegion: return "EmptyRegion";
        case ErrorCode::NotFound: return "NotFound";
        case ErrorCode::Conflict: return "Conflict";
        case ErrorCode::BadRequest: return "BadRequest";
        case ErrorCode::PreconditionViolation: return "PreconditionViolation";
    }
    return "Unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view name) noexcept {
    for (int i = 0; i <= static_cast<int>(ErrorCode::PreconditionViolation); ++i) {
        const auto code = static_cast<ErrorCode>(i);
        if (to_string(code) == name) return code;
    }
    return std::nullopt;
}

}  // namespace sgedit
