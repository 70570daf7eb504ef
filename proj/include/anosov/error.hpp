#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anosov {

enum class ErrorCode {
    NotSL2Z,
    NotHyperbolic,
    NotADiffeo,
    NewtonFailed,
    Inconclusive,
    SolverDiverged,
    DegenerateSecant,
    NotConverged,
    SignAmbiguity,
    LeafEscaped,
    TangencySuspected,
    NotMonotone,
    ChartOverflow,
    RefinementFailed,
    DomainMismatch,
    RootBracketFailed,
    NonMonotoneG,
    SingularSystem,
    InvalidArgument,
    ConfigError,
    IoError,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotSL2Z: return "NotSL2Z";
        case ErrorCode::NotHyperbolic: return "NotHyperbolic";
        case ErrorCode::NotADiffeo: return "NotADiffeo";
        case ErrorCode::NewtonFailed: return "NewtonFailed";
        case ErrorCode::Inconclusive: return "Inconclusive";
        case ErrorCode::SolverDiverged: return "SolverDiverged";
        case ErrorCode::DegenerateSecant: return "DegenerateSecant";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::SignAmbiguity: return "SignAmbiguity";
        case ErrorCode::LeafEscaped: return "LeafEscaped";
        case ErrorCode::TangencySuspected: return "TangencySuspected";
        case ErrorCode::NotMonotone: return "NotMonotone";
        case ErrorCode::ChartOverflow: return "ChartOverflow";
        case ErrorCode::RefinementFailed: return "RefinementFailed";
        case ErrorCode::DomainMismatch: return "DomainMismatch";
        case ErrorCode::RootBracketFailed: return "RootBracketFailed";
        case ErrorCode::NonMonotoneG: return "NonMonotoneG";
        case ErrorCode::SingularSystem: return "SingularSystem";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace anosov
