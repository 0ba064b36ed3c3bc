#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rfcpca {

enum class ErrorCode {
  InvalidArgument,
  LagTooLarge,
  NonFiniteInput,
  DegenerateWeights,
  EigFailure,
  DimensionMismatch,
  InvalidShape,
  EmptyClusterError,
  DegenerateScale,
  NoElbow,
  TooFewRetained,
  SingleCluster,
  DegenerateSeparation,
  AllCandidatesFailed,
  InvalidBand,
  BurstTooLong,
  BlinkTooLong,
  NotOrthonormal,
  EmptyIndexSet,
  ConfigError,
  IoError,
};

/// Machine-readable name, e.g. "EmptyClusterError".
std::string_view error_name(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// CLI can surface it verbatim in its JSON output.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view name() const noexcept { return error_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(error_name(code)) + ": " + what);
}

}  // namespace rfcpca
