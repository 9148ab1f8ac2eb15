#pragma once

#include <stdexcept>
#include <string>

namespace hs {

enum class ErrorCode {
    DegreeTooLow,
    VanishingDerivative,
    ProjectionNotInvertible,
    DeltaDegenerate,
    EmptyIntersection,
    InvalidGeometry,
    PC1Violated,
    PC2Violated,
    NoIntersection,
    FamilyNotMonotone,
    NotATransition,
    NotUnfolded,
    BudgetExhausted,
    NotAForest,
    TooFewCandidates,
    ConventionViolated,
    TruncationTooCoarse,
    BracketFailure,
    ConfigError,
    NewtonFailure,
};

inline const char* to_string(ErrorCode c) {
    switch (c) {
    case ErrorCode::DegreeTooLow: return "DegreeTooLow";
    case ErrorCode::VanishingDerivative: return "VanishingDerivative";
    case ErrorCode::ProjectionNotInvertible: return "ProjectionNotInvertible";
    case ErrorCode::DeltaDegenerate: return "DeltaDegenerate";
    case ErrorCode::EmptyIntersection: return "EmptyIntersection";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::PC1Violated: return "PC1Violated";
    case ErrorCode::PC2Violated: return "PC2Violated";
    case ErrorCode::NoIntersection: return "NoIntersection";
    case ErrorCode::FamilyNotMonotone: return "FamilyNotMonotone";
    case ErrorCode::NotATransition: return "NotATransition";
    case ErrorCode::NotUnfolded: return "NotUnfolded";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::NotAForest: return "NotAForest";
    case ErrorCode::TooFewCandidates: return "TooFewCandidates";
    case ErrorCode::ConventionViolated: return "ConventionViolated";
    case ErrorCode::TruncationTooCoarse: return "TruncationTooCoarse";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::NewtonFailure: return "NewtonFailure";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace hs
