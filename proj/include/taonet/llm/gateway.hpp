// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "taonet/ingest/dataset.hpp"
#include "taonet/ingest/packet.hpp"
#include "taonet/llm/backend.hpp"
#include "taonet/pipeline/prediction.hpp"
#include "taonet/sps/prompt.hpp"

namespace taonet::llm {

/// Append-only JSONL log of generation requests and outcomes.
class AuditLog {
 public:
  /// Truncates `path`. Throws Error{kIoFailure}.
  explicit AuditLog(const std::filesystem::path& path);

  /// Writes one line; every secret occurring in the record is replaced by
  /// "[REDACTED]" first.
  void write(const nlohmann::json& record, const std::vector<std::string>& secrets);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

/// Replaces each non-empty secret in `text` with "[REDACTED]".
std::string redact(std::string text, const std::vector<std::string>& secrets);

struct GatewayOptions {
  std::size_t max_in_flight = 4;
  double temperature = 0.7;
  double top_p = 0.95;
  int max_tokens = 32;
};

/// Front door to a backend: caps concurrent requests with first-come
/// first-served admission and writes the optional audit log.
class Gateway {
 public:
  /// Throws Error{kInvalidConfig} for a zero in-flight cap.
  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {},
          std::shared_ptr<AuditLog> audit = nullptr);

  const Backend& backend() const { return *backend_; }
  const GatewayOptions& options() const { return options_; }

  /// Request with the gateway's sampling settings.
  GenerationRequest make_request(std::string request_id, std::string prompt) const;

  /// Blocks until admitted, then forwards to the backend. Backend errors
  /// are logged and rethrown.
  std::string complete(const GenerationRequest& request);

  /// Highest number of requests seen in flight at once.
  std::size_t peak_in_flight() const;
  /// Callers waiting for admission.
  std::size_t queued() const;

 private:
  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  std::shared_ptr<AuditLog> audit_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t next_admit_ = 0;
  std::size_t in_flight_ = 0;
  std::size_t peak_ = 0;
};

struct OodLabelingOptions {
  sps::SpsMode mode = sps::SpsMode::kStrict;
  sps::StrictSource strict_source = sps::StrictSource::kOod;
  const sps::TemplateSet* templates = nullptr;  // built-ins when null
  /// Extra digest lines, e.g. the detector route in the all-LLM ablation.
  std::vector<std::pair<std::string, std::string>> digest_extra;
};

/// Digest, prompt, generation, canonicalization. The record has route OOD
/// and labeler LLM; text that maps to no candidate yields label
/// "UNMAPPED" with the raw text kept. `record` may be null, in which case
/// the header summary is rebuilt from the tokens.
pipeline::PredictionRecord classify_ood(Gateway& gateway, const ingest::TrafficSample& sample,
                                        const ingest::PacketRecord* record,
                                        const ingest::LabelSpace& space,
                                        const OodLabelingOptions& options = {},
                                        sps::PromptBundle* prompt_out = nullptr);

}  // namespace taonet::llm
