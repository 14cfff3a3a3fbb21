#pragma once
#include <stdexcept>
#include <string>

namespace rungekit {

// Every failure the library can certify is tagged with one of these codes so
// that callers (and the C wrapper) can map outcomes without string matching.
enum class ErrorCode {
  None = 0,
  // parsing / input
  SyntaxError,
  UnknownIdentifier,
  DimensionMismatch,
  BadScene,
  // geometry
  DilationOverflow,
  WindingCheckFailed,
  PointOnCycle,
  MissingPoleInComponent,
  PoleInsideSet,
  PathNotFound,
  CycleTooCloseToSet,
  PointNotInBoundedComponent,
  // analysis
  EvalSingularity,
  PoleHit,
  VariableCollisionInProduct,
  RefinementLimitExceeded,
  BudgetOverflow,
  TermBlowup,
  MarginTooSmall,
  PatchTooSmall,
  PullbackNotHolomorphic,
  NonHolomorphicOracle,
  // unions
  NotDisjoint,
  TransitivityViolated,
  SeparationTooTight,
  PreconditionViolated,
  Internal,
};

const char* error_code_name(ErrorCode c);

class RkError : public std::runtime_error {
public:
  RkError(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw RkError(code, std::string(error_code_name(code)) + ": " + msg);
}

}  // namespace rungekit
