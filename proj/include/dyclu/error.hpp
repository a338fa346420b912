#pragma once

#include <stdexcept>
#include <string>

namespace dyclu {

enum class ErrorCode {
  InvalidMatrix,
  InvalidTolerance,
  InvalidDegreesOfFreedom,
  InvalidNoncentrality,
  InvalidProbability,
  InvalidWindow,
  InvalidGap,
  InvalidNoise,
  DimensionMismatch,
  EmptyDataset,
  DegenerateObservation,
  NoCandidates,
  UnknownUser,
  UnknownParameter,
  EmptyNeighborhood,
  InfeasibleSeparation,
  OutOfHorizon,
  ConfigError,
  Unsupported,
  ParseError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Library exception. Every failure raised by dyclu carries one of the codes
/// above; the CLI maps ConfigError/ParseError/IoError to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dyclu
