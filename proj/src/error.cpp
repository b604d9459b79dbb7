#include "soma/error.hpp"

namespace soma {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::UnknownId: return "UnknownId";
        case ErrorCode::CycleError: return "CycleError";
        case ErrorCode::KindMismatch: return "KindMismatch";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::BranchViolation: return "BranchViolation";
        case ErrorCode::UnsupportedAspect: return "UnsupportedAspect";
        case ErrorCode::FrozenStore: return "FrozenStore";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DegenerateInterval: return "DegenerateInterval";
        case ErrorCode::UnknownVariable: return "UnknownVariable";
        case ErrorCode::StaleNetwork: return "StaleNetwork";
        case ErrorCode::TemporallyInconsistent: return "TemporallyInconsistent";
        case ErrorCode::MissingSlot: return "MissingSlot";
        case ErrorCode::NegativeDuration: return "NegativeDuration";
        case ErrorCode::DanglingReference: return "DanglingReference";
        case ErrorCode::UnknownRole: return "UnknownRole";
        case ErrorCode::UnitMismatch: return "UnitMismatch";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::ValidationFailed: return "ValidationFailed";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace soma
