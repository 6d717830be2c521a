#include "t1moco/error.hpp"

namespace t1moco {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::TooFewFrames: return "TooFewFrames";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonIncreasingTimestamps: return "NonIncreasingTimestamps";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidMask: return "InvalidMask";
    case ErrorCode::ConstantSeries: return "ConstantSeries";
    case ErrorCode::NonPositiveT1: return "NonPositiveT1";
    case ErrorCode::ConstantObserved: return "ConstantObserved";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::MissingFrame: return "MissingFrame";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::TooFewFrames:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::NonIncreasingTimestamps:
    case ErrorCode::NonFiniteValue:
    case ErrorCode::InvalidMask:
    case ErrorCode::NotNormalized:
        return ErrorCategory::Validation;
    case ErrorCode::ParseError:
    case ErrorCode::MissingFrame:
    case ErrorCode::SizeMismatch:
    case ErrorCode::ChecksumMismatch:
    case ErrorCode::IoError:
        return ErrorCategory::Io;
    case ErrorCode::InvalidConfig:
        return ErrorCategory::Config;
    case ErrorCode::ConstantSeries:
    case ErrorCode::NonPositiveT1:
    case ErrorCode::ConstantObserved:
    case ErrorCode::EmptyMask:
        return ErrorCategory::Numerical;
    }
    return ErrorCategory::Numerical;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
{
}

}  // namespace t1moco
