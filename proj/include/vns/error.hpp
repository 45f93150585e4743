#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vns {

enum class ErrorCode {
  kZeroRow,
  kNotNormalized,
  kConvergenceFailure,
  kUnnormalizedSpectrum,
  kDomainError,
  kIncompleteSpectrum,
  kEmptyClass,
  kMissingLabels,
  kMissingLogits,
  kNonFiniteLogit,
  kDegenerateModel,
  kDegenerateMean,
  kSingularCovariance,
  kConfigError,
  kDimensionMismatch,
  kEmptyInput,
  kBadMagic,
  kBadVersion,
  kTruncatedFile,
  kSizeMismatch,
  kNonFinitePayload,
  kParseError,
  kLabelOutOfRange,
  kIoError,
};

std::string_view ErrorCodeName(ErrorCode code);

// Every failure surfaced by the library carries the module that raised it so
// front ends can report "module: code: detail" without extra bookkeeping.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string module, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCode code_;
  std::string module_;
};

}  // namespace vns
