#include "dyclu/error.hpp"

namespace dyclu {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::InvalidTolerance: return "InvalidTolerance";
    case ErrorCode::InvalidDegreesOfFreedom: return "InvalidDegreesOfFreedom";
    case ErrorCode::InvalidNoncentrality: return "InvalidNoncentrality";
    case ErrorCode::InvalidProbability: return "InvalidProbability";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::InvalidGap: return "InvalidGap";
    case ErrorCode::InvalidNoise: return "InvalidNoise";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DegenerateObservation: return "DegenerateObservation";
    case ErrorCode::NoCandidates: return "NoCandidates";
    case ErrorCode::UnknownUser: return "UnknownUser";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::InfeasibleSeparation: return "InfeasibleSeparation";
    case ErrorCode::OutOfHorizon: return "OutOfHorizon";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::Unsupported: return "Unsupported";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace dyclu
