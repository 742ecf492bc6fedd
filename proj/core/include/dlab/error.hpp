#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dlab {

enum class ErrorCode {
    InvalidArgument,
    SingularPoint,
    DimensionMismatch,
    DimensionUnsupported,
    EmptyShell,
    InvalidSignature,
    GridTooCoarse,
    QuadratureStalled,
    DegeneratePoints,
    NoAscent,
    PhaseMismatch,
    Overflow,
    ConfigInvalid,
    IoFailure,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) fail(code, message);
}

}  // namespace dlab
