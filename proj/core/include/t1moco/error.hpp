#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace t1moco {

enum class ErrorCode {
    TooFewFrames,
    ShapeMismatch,
    NonIncreasingTimestamps,
    NonFiniteValue,
    InvalidMask,
    ConstantSeries,
    NonPositiveT1,
    ConstantObserved,
    EmptyMask,
    NotNormalized,
    InvalidConfig,
    ParseError,
    MissingFrame,
    SizeMismatch,
    ChecksumMismatch,
    IoError,
};

/// Coarse grouping used for process exit codes.
enum class ErrorCategory {
    Validation = 3,
    Io = 4,
    Config = 5,
    Numerical = 6,
};

std::string_view to_string(ErrorCode code) noexcept;
ErrorCategory category_of(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    ErrorCategory category() const noexcept { return category_of(code_); }

private:
    ErrorCode code_;
};

}  // namespace t1moco
