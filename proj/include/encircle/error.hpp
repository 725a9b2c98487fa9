#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace encircle {

enum class ErrorCode {
    ZeroRadius,
    NotStarShaped,
    TooFewPoints,
    RankDeficient,
    OutOfDomain,
    NoSegment,
    CriticalPoint,
    Infeasible,
    DegenerateGeometry,
    ParseError,
    ValidationError,
    IoError,
};

/// Stable machine-readable name, e.g. "TooFewPoints".
std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    /// `cause` names the violated precondition, e.g. ValidationError caused by TooFewPoints.
    Error(ErrorCode code, ErrorCode cause, const std::string& what)
        : std::runtime_error(what), code_(code), cause_(cause) {}

    ErrorCode code() const noexcept { return code_; }
    std::optional<ErrorCode> cause() const noexcept { return cause_; }

private:
    ErrorCode code_;
    std::optional<ErrorCode> cause_;
};

}  // namespace encircle
