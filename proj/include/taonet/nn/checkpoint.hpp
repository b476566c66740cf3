// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "taonet/nn/params.hpp"

namespace taonet::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class Component { kDetector, kClassifier };
std::string component_name(Component component);

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::size_t epochs = 0;
  std::vector<double> loss_curve;
};

/// In-memory form of a checkpoint file.
///
/// Layout on disk (integers little-endian):
///   "TAONET" | u32 version | u32 tag length | tag |
///   u32 header length | JSON header {manifest, metadata, extras} |
///   u64 value count | float32 values
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  Component component = Component::kDetector;
  std::vector<TensorSpec> manifest;
  std::vector<float> payload;
  TrainingMetadata metadata;
  nlohmann::json extras = nlohmann::json::object();

  /// Appends every tensor of `params` to the manifest and payload.
  void append(const ParameterSet& params);
  /// Copies the named tensors of `params` from the payload. Throws
  /// Error{kCorruptPayload} if a tensor is missing or has another shape.
  void restore(ParameterSet& params) const;
};

/// Throws Error{kIoFailure} if the file cannot be written.
void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);

/// Throws Error{kFileNotFound}, Error{kVersionMismatch} for an unknown
/// version, and Error{kCorruptPayload} for a bad magic, a truncated file or
/// a payload whose length disagrees with the manifest.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace taonet::nn
