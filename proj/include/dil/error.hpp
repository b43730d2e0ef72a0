#pragma once

#include <stdexcept>
#include <string>

namespace dil {

enum class ErrorKind {
    NotHermitian,
    NoConvergence,
    NotPSD,
    NotIsometric,
    IndexOutOfRange,
    PreconditionViolated,
    DimensionMismatch,
    DefectIdentityViolated,
    IllConditioned,
    LiftFailed,
    NotProjection,
    NotUnitary,
    SlowConvergence,
    ClassViolation,
    IsometryDefect,
    HypothesisViolated,
    VerificationFailed,
    RejectionBudgetExceeded,
    ParseError,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace dil
