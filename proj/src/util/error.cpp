#include "pathex/util/error.hpp"

namespace pathex {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::kIoError: return "IO_ERROR";
    case ErrorCode::kMalformedRecord: return "MALFORMED_RECORD";
    case ErrorCode::kMalformedBox: return "MALFORMED_BOX";
    case ErrorCode::kOrphanSubtype: return "ORPHAN_SUBTYPE";
    case ErrorCode::kDuplicateName: return "DUPLICATE_NAME";
    case ErrorCode::kMissingGold: return "MISSING_GOLD";
    case ErrorCode::kEmptyContext: return "EMPTY_CONTEXT";
    case ErrorCode::kContextTooLong: return "CONTEXT_TOO_LONG";
    case ErrorCode::kBackendFailure: return "BACKEND_FAILURE";
    case ErrorCode::kNoValidSpan: return "NO_VALID_SPAN";
    case ErrorCode::kDimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::kEmptySequence: return "EMPTY_SEQUENCE";
    case ErrorCode::kEmptyInput: return "EMPTY_INPUT";
    case ErrorCode::kServiceUnreachable: return "SERVICE_UNREACHABLE";
    case ErrorCode::kServiceError: return "SERVICE_ERROR";
    case ErrorCode::kTimeout: return "TIMEOUT";
    case ErrorCode::kBundleInvalid: return "BUNDLE_INVALID";
    case ErrorCode::kUnknownSplit: return "UNKNOWN_SPLIT";
    case ErrorCode::kDanglingPrediction: return "DANGLING_PREDICTION";
    case ErrorCode::kConfigInvalid: return "CONFIG_INVALID";
  }
  return "UNKNOWN";
}

}  // namespace pathex
