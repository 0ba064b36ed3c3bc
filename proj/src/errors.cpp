#include "rfcpca/errors.hpp"

namespace rfcpca {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LagTooLarge: return "LagTooLarge";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::EigFailure: return "EigFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::EmptyClusterError: return "EmptyClusterError";
    case ErrorCode::DegenerateScale: return "DegenerateScale";
    case ErrorCode::NoElbow: return "NoElbow";
    case ErrorCode::TooFewRetained: return "TooFewRetained";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::DegenerateSeparation: return "DegenerateSeparation";
    case ErrorCode::AllCandidatesFailed: return "AllCandidatesFailed";
    case ErrorCode::InvalidBand: return "InvalidBand";
    case ErrorCode::BurstTooLong: return "BurstTooLong";
    case ErrorCode::BlinkTooLong: return "BlinkTooLong";
    case ErrorCode::NotOrthonormal: return "NotOrthonormal";
    case ErrorCode::EmptyIndexSet: return "EmptyIndexSet";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace rfcpca
