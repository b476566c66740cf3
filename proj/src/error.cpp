// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/error.hpp"

namespace taonet {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kFileNotFound: return "FileNotFound";
    case ErrorCode::kMalformedCapture: return "MalformedCapture";
    case ErrorCode::kSchemaViolation: return "SchemaViolation";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kInsufficientSamples: return "InsufficientSamples";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kEmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptPayload: return "CorruptPayload";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kDecompositionFailure: return "DecompositionFailure";
    case ErrorCode::kNotFitted: return "NotFitted";
    case ErrorCode::kMissingLabels: return "MissingLabels";
    case ErrorCode::kAuthMissing: return "AuthMissing";
    case ErrorCode::kRateLimited: return "RateLimited";
    case ErrorCode::kBackendUnreachable: return "BackendUnreachable";
    case ErrorCode::kMalformedResponse: return "MalformedResponse";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kSingleClassInput: return "SingleClassInput";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace taonet
