// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "taonet/ingest/dataset.hpp"

namespace taonet::ingest {

/// Byte-value distribution for generated payloads.
struct PayloadDistribution {
  enum class Kind { kUniform, kCategorical };
  Kind kind = Kind::kUniform;
  int low = 0;     // uniform, inclusive
  int high = 255;  // uniform, inclusive
  std::vector<int> values;       // categorical
  std::vector<double> weights;   // categorical, same length as values
};

/// Total IP length in bytes: round(normal(mean, stddev)) clamped to [min, max].
struct LengthDistribution {
  double mean = 200.0;
  double stddev = 0.0;
  std::size_t min = 40;
  std::size_t max = 1500;
};

struct SyntheticClass {
  std::string label;
  bool is_ood = false;
  /// IP header plus transport header. Length and address fields are
  /// rewritten per sample.
  std::vector<std::uint8_t> header_template;
  PayloadDistribution payload;
  LengthDistribution length;
  /// Inclusive source-port range drawn per sample (TCP/UDP only).
  std::optional<std::pair<std::uint16_t, std::uint16_t>> src_port_range;
};

struct SyntheticSpec {
  std::string name = "synthetic";
  std::size_t sequence_length = kDefaultSequenceLength;
  SplitRatios id_split{0.6, 0.2, 0.2};
  std::vector<std::string> extended_labels;
  std::vector<SyntheticClass> classes;
};

/// JSON document -> spec. See resources/synthetic/README.md for the schema.
/// Throws Error{kInvalidSpec} on structural problems.
SyntheticSpec parse_synthetic_spec(const nlohmann::json& doc);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

/// Generates a split dataset: ID classes fill train/valid/test by
/// `spec.id_split`; OOD samples are drawn into valid and test so that each
/// holds floor(0.3 * size) OOD samples (7:3 ID:OOD). Pure in (spec, n, seed).
Dataset generate_synthetic(const SyntheticSpec& spec, std::size_t n_per_class,
                           std::uint64_t seed);

/// OOD share of a held-out split holding `id_count` ID samples: the largest
/// o with floor(0.3 * (id_count + o)) == o.
std::size_t ood_count_for(std::size_t id_count);

}  // namespace taonet::ingest
