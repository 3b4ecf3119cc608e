#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pathex {

enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  kMalformedRecord,
  kMalformedBox,
  kOrphanSubtype,
  kDuplicateName,
  kMissingGold,
  kEmptyContext,
  kContextTooLong,
  kBackendFailure,
  kNoValidSpan,
  kDimensionMismatch,
  kEmptySequence,
  kEmptyInput,
  kServiceUnreachable,
  kServiceError,
  kTimeout,
  kBundleInvalid,
  kUnknownSplit,
  kDanglingPrediction,
  kConfigInvalid,
};

// Stable upper-case identifier, e.g. "MALFORMED_BOX".
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code),
        detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

  // Same code, message prefixed with `context` (e.g. a record id).
  Error with_context(const std::string& context) const {
    return Error(code_, context + ": " + detail_);
  }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace pathex
