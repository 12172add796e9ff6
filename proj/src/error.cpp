#include "bdssd/error.hpp"

namespace bdssd {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::RowSumExceeded: return "RowSumExceeded";
    case ErrorCode::RowSumMismatch: return "RowSumMismatch";
    case ErrorCode::NotErgodic: return "NotErgodic";
    case ErrorCode::NotMonotone: return "NotMonotone";
    case ErrorCode::NotAbsorbing: return "NotAbsorbing";
    case ErrorCode::EpsOutOfRange: return "EpsOutOfRange";
    case ErrorCode::EpsTooLarge: return "EpsTooLarge";
    case ErrorCode::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::StochasticityViolation: return "StochasticityViolation";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::NoFeasibleEta: return "NoFeasibleEta";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NoAbsorption: return "NoAbsorption";
    case ErrorCode::CapExceeded: return "CapExceeded";
    case ErrorCode::ThetaOutOfRange: return "ThetaOutOfRange";
    case ErrorCode::PoleProximity: return "PoleProximity";
    case ErrorCode::NonpositiveRate: return "NonpositiveRate";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::CouplingInvariant: return "CouplingInvariant";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
  }
  return "Unknown";
}

}  // namespace bdssd
