#ifndef SPECDIST_ERROR_HPP
#define SPECDIST_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace specdist {

/// Failure categories. Each maps to a distinct CLI exit status.
enum class ErrorCode : int {
    invalid_window = 10,
    out_of_range = 11,
    degenerate_spectrum = 12,
    dimension_mismatch = 13,
    undefined_correlation = 14,
    degenerate_fit = 15,
    format = 20,
    io = 21,
    config = 22,
    transform = 23,
    analysis = 30,
    alignment = 31,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::invalid_window: return "invalid_window";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::degenerate_spectrum: return "degenerate_spectrum";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::undefined_correlation: return "undefined_correlation";
    case ErrorCode::degenerate_fit: return "degenerate_fit";
    case ErrorCode::format: return "format";
    case ErrorCode::io: return "io";
    case ErrorCode::config: return "config";
    case ErrorCode::transform: return "transform";
    case ErrorCode::analysis: return "analysis";
    case ErrorCode::alignment: return "alignment";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {
template <ErrorCode Code>
class TypedError : public Error {
public:
    explicit TypedError(const std::string& what) : Error(Code, what) {}
};
} // namespace detail

using InvalidWindowError = detail::TypedError<ErrorCode::invalid_window>;
using OutOfRangeError = detail::TypedError<ErrorCode::out_of_range>;
using DegenerateSpectrumError = detail::TypedError<ErrorCode::degenerate_spectrum>;
using DimensionError = detail::TypedError<ErrorCode::dimension_mismatch>;
using UndefinedCorrelationError = detail::TypedError<ErrorCode::undefined_correlation>;
using DegenerateFitError = detail::TypedError<ErrorCode::degenerate_fit>;
using FormatError = detail::TypedError<ErrorCode::format>;
using IoError = detail::TypedError<ErrorCode::io>;
using ConfigError = detail::TypedError<ErrorCode::config>;
using TransformError = detail::TypedError<ErrorCode::transform>;
using AnalysisError = detail::TypedError<ErrorCode::analysis>;
using AlignmentError = detail::TypedError<ErrorCode::alignment>;

} // namespace specdist

#endif // SPECDIST_ERROR_HPP
