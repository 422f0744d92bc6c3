#pragma once

#include <stdexcept>
#include <string>

namespace hmn {

enum class ErrorCode {
  CyclicGraph,
  ContinuousHasDiscreteChild,
  UnnormalizedCPT,
  EmptyRelation,
  DanglingVariableReference,
  InvalidGaussian,
  IncompleteAssignment,
  SingularBlock,
  NoStrongRoot,
  InvalidIBound,
  InconsistentEvidence,
  VariableNotCovered,
  AllSamplesRejected,
  InfeasibleParams,
  EvidenceGenerationFailed,
  ExactIntractable,
  UndefinedMetric,
  InvalidArgument,
};

// All library failures are reported through this type; the code tells
// callers which contract was violated without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, msg);
}

const char* error_code_name(ErrorCode code);

}  // namespace hmn
