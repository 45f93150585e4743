#include "vns/error.hpp"

namespace vns {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kZeroRow: return "ZeroRow";
    case ErrorCode::kNotNormalized: return "NotNormalized";
    case ErrorCode::kConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::kUnnormalizedSpectrum: return "UnnormalizedSpectrum";
    case ErrorCode::kDomainError: return "DomainError";
    case ErrorCode::kIncompleteSpectrum: return "IncompleteSpectrum";
    case ErrorCode::kEmptyClass: return "EmptyClass";
    case ErrorCode::kMissingLabels: return "MissingLabels";
    case ErrorCode::kMissingLogits: return "MissingLogits";
    case ErrorCode::kNonFiniteLogit: return "NonFiniteLogit";
    case ErrorCode::kDegenerateModel: return "DegenerateModel";
    case ErrorCode::kDegenerateMean: return "DegenerateMean";
    case ErrorCode::kSingularCovariance: return "SingularCovariance";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kBadVersion: return "BadVersion";
    case ErrorCode::kTruncatedFile: return "TruncatedFile";
    case ErrorCode::kSizeMismatch: return "SizeMismatch";
    case ErrorCode::kNonFinitePayload: return "NonFinitePayload";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kLabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string module, const std::string& detail)
    : std::runtime_error(module + ": " + std::string(ErrorCodeName(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code),
      module_(std::move(module)) {}

}  // namespace vns
