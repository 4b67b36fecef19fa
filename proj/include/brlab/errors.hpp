// Error taxonomy shared by all solver modules.
#pragma once

#include <stdexcept>
#include <string>

namespace brlab {

enum class ErrorKind {
  OutOfDomain,
  InvalidParams,
  HyperbolicityCheckFailed,
  NonUniformSignature,
  NonCharacteristicViolation,
  StrictHyperbolicityViolation,
  IllConditioned,
  IntegrationEscape,
  ToleranceFailure,
  NewtonDivergence,
  InsufficientTail,
  NoConvergence,
  RootFindFailure,
  GNLViolation,
  MeshExhausted,
  ContinuationFailure,
  RangeExceeded,
  NoLocalSolution,
  ComparisonInconclusive,
  UnresolvedSpeed,
  IOError,
};

const char* to_string(ErrorKind k);

// Single exception type carrying a kind tag; callers dispatch on kind()
// rather than on a deep class hierarchy.
class LabError : public std::runtime_error {
 public:
  LabError(ErrorKind kind, const std::string& msg)
      : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw LabError(kind, msg);
}

}  // namespace brlab
