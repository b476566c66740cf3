// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "taonet/llm/transport.hpp"

namespace taonet::llm {

struct GenerationRequest {
  std::string request_id;
  std::string prompt;
  double temperature = 0.7;
  double top_p = 0.95;
  int max_tokens = 32;

  /// Throws Error{kInvalidConfig} unless temperature >= 0,
  /// 0 < top_p <= 1 and max_tokens >= 1.
  void validate() const;
};

enum class BackendKind { kRemote, kMockKeyword, kMockOracle };

std::string backend_kind_name(BackendKind kind);
/// Accepts "remote", "mock-keyword", "mock-oracle".
std::optional<BackendKind> parse_backend_kind(std::string_view name);

/// A text generator. complete() returns the first completion's text and
/// must be safe to call from several threads.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendKind kind() const = 0;
  virtual std::string complete(const GenerationRequest& request) = 0;
  /// Strings that must never appear in logs (API keys).
  virtual std::vector<std::string> secrets() const { return {}; }
};

/// Exponential backoff: delay before attempt n+1 is base * factor^(n-1).
struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;

  std::chrono::milliseconds delay_after(int attempt) const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

/// Statuses worth retrying: no response, 408, 429 and 5xx.
bool is_transient(int status);

using CredentialSource = std::function<std::optional<std::string>()>;

/// Reads the named environment variable; empty values count as absent.
CredentialSource env_credential(std::string variable = "TAONET_LLM_API_KEY");

struct RemoteConfig {
  std::string base_url;
  std::string model;
  CredentialSource credential = env_credential();
  RetryPolicy retry;

  /// TAONET_LLM_BASE_URL and TAONET_LLM_MODEL; the key is read per call.
  static RemoteConfig from_env();
};

/// Chat-completions client:
///   POST {base_url}/chat/completions
///   {model, messages: [{role: "user", content}], temperature, top_p, max_tokens}
/// and reads choices[0].message.content.
class RemoteBackend : public Backend {
 public:
  RemoteBackend(RemoteConfig config, std::shared_ptr<Transport> transport,
                Sleeper sleeper = real_sleeper());

  BackendKind kind() const override { return BackendKind::kRemote; }

  /// Throws Error{kAuthMissing} before any network use when no credential
  /// is available, Error{kInvalidConfig} without base URL or model,
  /// Error{kRateLimited} or Error{kBackendUnreachable} once retries are
  /// spent, and Error{kMalformedResponse} for an unreadable body.
  std::string complete(const GenerationRequest& request) override;
  std::vector<std::string> secrets() const override;

  static nlohmann::json request_body(const std::string& model, const GenerationRequest& request);
  /// Throws Error{kMalformedResponse}.
  static std::string parse_response(const std::string& body);

 private:
  RemoteConfig config_;
  std::shared_ptr<Transport> transport_;
  Sleeper sleeper_;
};

/// Returns the label of the first rule whose keywords all occur in the
/// prompt, or the fallback text.
class MockKeywordBackend : public Backend {
 public:
  struct Rule {
    std::string label;
    std::vector<std::string> keywords;
  };

  explicit MockKeywordBackend(std::vector<Rule> rules, std::string fallback = "unknown");

  /// {"rules": [{"label": ..., "keywords": [...]}], "fallback": ...}.
  /// Throws Error{kFileNotFound} or Error{kInvalidConfig}.
  static MockKeywordBackend from_file(const std::filesystem::path& path);

  BackendKind kind() const override { return BackendKind::kMockKeyword; }
  std::string complete(const GenerationRequest& request) override;

 private:
  std::vector<Rule> rules_;
  std::string fallback_;
};

/// Test backend answering with the gold label registered for the request
/// id (the fallback text when none is).
class MockOracleBackend : public Backend {
 public:
  explicit MockOracleBackend(std::map<std::string, std::string> gold,
                             std::string fallback = "unknown")
      : gold_(std::move(gold)), fallback_(std::move(fallback)) {}

  BackendKind kind() const override { return BackendKind::kMockOracle; }
  std::string complete(const GenerationRequest& request) override;

 private:
  std::map<std::string, std::string> gold_;
  std::string fallback_;
};

}  // namespace taonet::llm
