#include "dlab/error.hpp"

namespace dlab {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::SingularPoint: return "SingularPoint";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::DimensionUnsupported: return "DimensionUnsupported";
        case ErrorCode::EmptyShell: return "EmptyShell";
        case ErrorCode::InvalidSignature: return "InvalidSignature";
        case ErrorCode::GridTooCoarse: return "GridTooCoarse";
        case ErrorCode::QuadratureStalled: return "QuadratureStalled";
        case ErrorCode::DegeneratePoints: return "DegeneratePoints";
        case ErrorCode::NoAscent: return "NoAscent";
        case ErrorCode::PhaseMismatch: return "PhaseMismatch";
        case ErrorCode::Overflow: return "Overflow";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace dlab
