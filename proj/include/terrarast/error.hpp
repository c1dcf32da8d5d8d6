#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace terrarast {

enum class ErrorCode {
    UnsupportedFormat,
    CorruptHeader,
    TruncatedPayload,
    ParseError,
    SpecMismatch,
    EmptyCloud,
    TooFewPoints,
    LengthMismatch,
    DegenerateInput,
    EmptyOverlap,
    InvalidSpec,
    FormatVersionMismatch,
    ChecksumFailure,
    DuplicateTile,
    InvalidArgument,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
        case ErrorCode::CorruptHeader: return "CorruptHeader";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::SpecMismatch: return "SpecMismatch";
        case ErrorCode::EmptyCloud: return "EmptyCloud";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::EmptyOverlap: return "EmptyOverlap";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::FormatVersionMismatch: return "FormatVersionMismatch";
        case ErrorCode::ChecksumFailure: return "ChecksumFailure";
        case ErrorCode::DuplicateTile: return "DuplicateTile";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace terrarast
