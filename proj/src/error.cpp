#include "dil/error.hpp"

namespace dil {

const char* to_string(ErrorKind k) {
    switch (k) {
        case ErrorKind::NotHermitian: return "NotHermitian";
        case ErrorKind::NoConvergence: return "NoConvergence";
        case ErrorKind::NotPSD: return "NotPSD";
        case ErrorKind::NotIsometric: return "NotIsometric";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::PreconditionViolated: return "PreconditionViolated";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::DefectIdentityViolated: return "DefectIdentityViolated";
        case ErrorKind::IllConditioned: return "IllConditioned";
        case ErrorKind::LiftFailed: return "LiftFailed";
        case ErrorKind::NotProjection: return "NotProjection";
        case ErrorKind::NotUnitary: return "NotUnitary";
        case ErrorKind::SlowConvergence: return "SlowConvergence";
        case ErrorKind::ClassViolation: return "ClassViolation";
        case ErrorKind::IsometryDefect: return "IsometryDefect";
        case ErrorKind::HypothesisViolated: return "HypothesisViolated";
        case ErrorKind::VerificationFailed: return "VerificationFailed";
        case ErrorKind::RejectionBudgetExceeded: return "RejectionBudgetExceeded";
        case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace dil
