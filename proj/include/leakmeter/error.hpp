#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace leakmeter {

enum class ErrorCode {
    AllZero,
    NegativeMass,
    SupportMismatch,
    EmptyGrid,
    InvalidArgument,
    NonPositiveRate,
    TailMassTooLarge,
    ZeroPredictive,
    IndexOutOfRange,
    LengthMismatch,
    Undefined,
    EmptyInput,
    InvalidConfig,
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::NegativeMass: return "NegativeMass";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveRate: return "NonPositiveRate";
    case ErrorCode::TailMassTooLarge: return "TailMassTooLarge";
    case ErrorCode::ZeroPredictive: return "ZeroPredictive";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::Undefined: return "Undefined";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised by sequential updating; carries the zero-based index of the failing observation.
class ZeroPredictiveError : public Error {
public:
    ZeroPredictiveError(std::size_t step, const std::string& what)
        : Error(ErrorCode::ZeroPredictive, what + " (step " + std::to_string(step) + ")"),
          step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace leakmeter
