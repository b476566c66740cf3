// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taonet {

/// Failure categories surfaced by every module. Callers branch on the code;
/// the message carries the human-readable detail (file, line, stage).
enum class ErrorCode {
  kFileNotFound,
  kMalformedCapture,
  kSchemaViolation,
  kInvalidSpec,
  kInsufficientSamples,
  kDimensionMismatch,
  kEmptyTrainingSet,
  kVersionMismatch,
  kCorruptPayload,
  kTooFewSamples,
  kDecompositionFailure,
  kNotFitted,
  kMissingLabels,
  kAuthMissing,
  kRateLimited,
  kBackendUnreachable,
  kMalformedResponse,
  kLengthMismatch,
  kEmptyMatrix,
  kIoFailure,
  kSingleClassInput,
  kInvalidConfig,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace taonet
