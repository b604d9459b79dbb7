#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace soma {

enum class ErrorCode {
    UnknownId,
    CycleError,
    KindMismatch,
    DuplicateId,
    BranchViolation,
    UnsupportedAspect,
    FrozenStore,
    InvalidArgument,
    DegenerateInterval,
    UnknownVariable,
    StaleNetwork,
    TemporallyInconsistent,
    MissingSlot,
    NegativeDuration,
    DanglingReference,
    UnknownRole,
    UnitMismatch,
    ParseError,
    ValidationFailed,
    VersionMismatch,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Base of every error thrown by the toolkit. The code identifies the error
/// class; the message carries context for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace soma
