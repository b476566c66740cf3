// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "taonet/llm/backend.hpp"
#include "taonet/sps/prompt.hpp"

namespace taonet::pipeline {

/// Which stage-two branch labels each sample. The detector always runs and
/// its decision is recorded either way.
enum class RoutingMode { kAdaptive, kAllId, kAllLlm };

std::string routing_mode_name(RoutingMode mode);  // adaptive | all-id | all-llm
std::optional<RoutingMode> parse_routing_mode(std::string_view name);

struct DataConfig {
  /// Either a JSONL dataset (".jsonl") or a synthetic spec (".json").
  std::string path;
  std::size_t samples_per_class = 500;  // synthetic only
  std::uint64_t seed = 42;              // synthetic only
};

struct DetectorSettings {
  std::size_t hidden = 64;  // d
  std::size_t input = 64;
  double gamma = 0.95;
  std::size_t epochs = 20;
  double learning_rate = 2e-5;
  std::size_t batch_size = 32;
};

struct ClassifierSettings {
  std::size_t dim = 64;
  std::size_t layers = 4;  // L
  std::size_t heads = 4;
  std::size_t ffn_dim = 128;
  std::size_t epochs = 30;
  double learning_rate = 2e-5;
  double weight_decay = 0.01;
  std::size_t batch_size = 32;
};

struct HybridSettings {
  double alpha = 0.6;
  double delta = 0.75;
  double low_percentile = 1.0;
  double high_percentile = 99.0;
};

struct SpsSettings {
  sps::SpsMode mode = sps::SpsMode::kStrict;
  sps::StrictSource strict_source = sps::StrictSource::kOod;
  /// Directory holding strict.txt / complete.txt / extended.txt overrides;
  /// empty selects the compiled-in templates.
  std::string template_dir;
};

struct LlmSettings {
  llm::BackendKind backend = llm::BackendKind::kRemote;
  std::string keyword_rules;  // mock-keyword rules file
  std::string base_url;       // remote; TAONET_LLM_BASE_URL when empty
  std::string model;          // remote; TAONET_LLM_MODEL when empty
  std::size_t max_in_flight = 4;
  double temperature = 0.7;
  double top_p = 0.95;
  int max_tokens = 32;
};

struct RunConfig {
  DataConfig data;
  std::uint64_t seed = 42;
  /// Token sequence length j; 0 keeps the dataset's own length.
  std::size_t sequence_length = 0;
  DetectorSettings detector;
  ClassifierSettings classifier;
  HybridSettings hybrid;
  SpsSettings sps;
  RoutingMode routing = RoutingMode::kAdaptive;
  LlmSettings llm;
  std::string out_dir = "runs";
};

/// Every problem found, one message each; empty when the config is usable.
std::vector<std::string> validation_errors(const RunConfig& config);

/// Throws Error{kInvalidConfig} listing all problems.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

/// Missing keys keep their defaults. Unknown keys and wrongly typed values
/// throw Error{kInvalidConfig}. Does not validate ranges.
RunConfig config_from_json(const nlohmann::json& doc);

/// Throws Error{kFileNotFound} or Error{kInvalidConfig}.
RunConfig load_config(const std::filesystem::path& path);

/// Where a default comes from: "published" values restate the method's
/// reported settings, "artifact" values are this implementation's choice.
/// Values that differ from the default are tagged "override".
struct ConfigEntry {
  std::string key;  // dotted path
  nlohmann::json value;
  std::string provenance;
};
std::vector<ConfigEntry> config_provenance(const RunConfig& config);

/// One "key = value  [tag]" line per entry.
std::string render_config(const RunConfig& config);

/// First 12 hex digits of the SHA-256 of the canonical JSON with `seed`
/// and `out_dir` removed.
std::string config_hash(const RunConfig& config);

/// `<out_dir>/<kind>-<hash>-seed<seed>`.
std::filesystem::path run_directory(const RunConfig& config, const std::string& kind = "run");

}  // namespace taonet::pipeline
