#include "brlab/errors.hpp"

namespace brlab {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::HyperbolicityCheckFailed: return "HyperbolicityCheckFailed";
    case ErrorKind::NonUniformSignature: return "NonUniformSignature";
    case ErrorKind::NonCharacteristicViolation: return "NonCharacteristicViolation";
    case ErrorKind::StrictHyperbolicityViolation: return "StrictHyperbolicityViolation";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::IntegrationEscape: return "IntegrationEscape";
    case ErrorKind::ToleranceFailure: return "ToleranceFailure";
    case ErrorKind::NewtonDivergence: return "NewtonDivergence";
    case ErrorKind::InsufficientTail: return "InsufficientTail";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::RootFindFailure: return "RootFindFailure";
    case ErrorKind::GNLViolation: return "GNLViolation";
    case ErrorKind::MeshExhausted: return "MeshExhausted";
    case ErrorKind::ContinuationFailure: return "ContinuationFailure";
    case ErrorKind::RangeExceeded: return "RangeExceeded";
    case ErrorKind::NoLocalSolution: return "NoLocalSolution";
    case ErrorKind::ComparisonInconclusive: return "ComparisonInconclusive";
    case ErrorKind::UnresolvedSpeed: return "UnresolvedSpeed";
    case ErrorKind::IOError: return "IOError";
  }
  return "UnknownError";
}

}  // namespace brlab
