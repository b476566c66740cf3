// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace taonet::ingest {

inline constexpr std::uint16_t kPadToken = 256;
inline constexpr std::size_t kVocabSize = 257;
inline constexpr std::size_t kDefaultSequenceLength = 128;

enum class Origin { kPcap, kJsonl, kSynthetic };
enum class Split { kTrain, kValid, kTest };

std::string origin_name(Origin origin);
std::string split_name(Split split);
std::optional<Split> parse_split(const std::string& name);

/// One packet as a fixed-length byte-token sequence. Tokens are byte values
/// 0..255 with 256 as right padding.
struct TrafficSample {
  std::string id;
  std::vector<std::uint16_t> tokens;
  std::optional<std::string> label;
  Origin origin = Origin::kJsonl;

  /// Number of tokens before the first pad (the whole length if unpadded).
  std::size_t unpadded_length() const;

  friend bool operator==(const TrafficSample&, const TrafficSample&) = default;
};

struct LabelSpace {
  std::vector<std::string> id_labels;
  std::vector<std::string> ood_labels;
  std::vector<std::string> extended_labels;

  bool is_id(const std::string& label) const;
  bool is_ood(const std::string& label) const;
  /// Index into id_labels, or nullopt.
  std::optional<std::size_t> id_index(const std::string& label) const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;
};

struct Dataset {
  std::vector<TrafficSample> samples;
  LabelSpace label_space;
  std::map<std::string, Split> splits;

  Split split_of(const TrafficSample& sample) const;
  std::vector<const TrafficSample*> in_split(Split split) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Reads the canonical JSONL dataset. The label space is inferred: labels
/// seen in the train split are ID (first-appearance order), every other
/// label is OOD. Throws Error{kSchemaViolation} listing offending line numbers.
Dataset load_dataset(const std::filesystem::path& path);

/// Writes one JSON object per sample in dataset order.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

struct SplitRatios {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
};

/// Stratified re-split. ID classes are divided by `ratios` per label; OOD
/// samples go only to valid/test in proportion valid:test. Unlabeled
/// samples are treated like OOD (never trained on).
/// Throws Error{kInvalidConfig} for ratios that do not sum to 1 and
/// Error{kInsufficientSamples} when a class has fewer samples than the
/// non-empty splits it must populate.
Dataset split_dataset(Dataset dataset, const SplitRatios& ratios, std::uint64_t seed);

/// Checks the train-split safety rule and token ranges; returns violations.
std::vector<std::string> validate_dataset(const Dataset& dataset, std::size_t expected_length);

}  // namespace taonet::ingest
