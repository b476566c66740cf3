// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/llm/backend.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "taonet/error.hpp"

namespace taonet::llm {

void GenerationRequest::validate() const {
  if (!(temperature >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(ErrorCode::kInvalidConfig, "top_p must lie in (0, 1]");
  if (max_tokens < 1) throw Error(ErrorCode::kInvalidConfig, "max_tokens must be >= 1");
}

std::string backend_kind_name(BackendKind kind) {
  switch (kind) {
    case BackendKind::kRemote: return "remote";
    case BackendKind::kMockKeyword: return "mock-keyword";
    case BackendKind::kMockOracle: return "mock-oracle";
  }
  return "remote";
}

std::optional<BackendKind> parse_backend_kind(std::string_view name) {
  for (auto k : {BackendKind::kRemote, BackendKind::kMockKeyword, BackendKind::kMockOracle}) {
    if (backend_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::chrono::milliseconds RetryPolicy::delay_after(int attempt) const {
  const double ms = static_cast<double>(base_delay.count()) * std::pow(factor, attempt - 1);
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(ms)));
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

bool is_transient(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

CredentialSource env_credential(std::string variable) {
  return [variable = std::move(variable)]() -> std::optional<std::string> {
    const char* v = std::getenv(variable.c_str());
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
  };
}

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  if (const char* v = std::getenv("TAONET_LLM_BASE_URL")) c.base_url = v;
  if (const char* v = std::getenv("TAONET_LLM_MODEL")) c.model = v;
  return c;
}

RemoteBackend::RemoteBackend(RemoteConfig config, std::shared_ptr<Transport> transport,
                             Sleeper sleeper)
    : config_(std::move(config)), transport_(std::move(transport)), sleeper_(std::move(sleeper)) {
  if (config_.retry.max_attempts < 1) {
    throw Error(ErrorCode::kInvalidConfig, "retry policy needs at least one attempt");
  }
}

nlohmann::json RemoteBackend::request_body(const std::string& model,
                                           const GenerationRequest& request) {
  return {{"model", model},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
          {"temperature", request.temperature},
          {"top_p", request.top_p},
          {"max_tokens", request.max_tokens}};
}

std::string RemoteBackend::parse_response(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorCode::kMalformedResponse, "content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("unreadable completion: ") + e.what());
  }
}

std::string RemoteBackend::complete(const GenerationRequest& request) {
  request.validate();
  const auto key = config_.credential ? config_.credential() : std::nullopt;
  if (!key) throw Error(ErrorCode::kAuthMissing, "no API key (set TAONET_LLM_API_KEY)");
  if (config_.base_url.empty() || config_.model.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "remote backend needs TAONET_LLM_BASE_URL and TAONET_LLM_MODEL");
  }
  const Headers headers = {{"Authorization", "Bearer " + *key}};
  const std::string body = request_body(config_.model, request).dump();

  HttpResponse last;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (attempt > 1) sleeper_(config_.retry.delay_after(attempt - 1));
    last = transport_->post(config_.base_url, "/chat/completions", headers, body);
    if (last.status >= 200 && last.status < 300) return parse_response(last.body);
    if (last.status == 401 || last.status == 403) {
      throw Error(ErrorCode::kAuthMissing, "credential rejected with HTTP " + std::to_string(last.status));
    }
    if (!is_transient(last.status)) {
      throw Error(ErrorCode::kBackendUnreachable, "HTTP " + std::to_string(last.status));
    }
  }
  const auto tries = std::to_string(config_.retry.max_attempts);
  if (last.status == 429) throw Error(ErrorCode::kRateLimited, "still rate limited after " + tries + " attempts");
  throw Error(ErrorCode::kBackendUnreachable,
              "gave up after " + tries + " attempts: " +
                  (last.status == 0 ? last.error : "HTTP " + std::to_string(last.status)));
}

std::vector<std::string> RemoteBackend::secrets() const {
  if (!config_.credential) return {};
  if (auto key = config_.credential()) return {*key};
  return {};
}

MockKeywordBackend::MockKeywordBackend(std::vector<Rule> rules, std::string fallback)
    : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

MockKeywordBackend MockKeywordBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open keyword table " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    std::vector<Rule> rules;
    for (const auto& r : j.at("rules")) {
      rules.push_back({r.at("label").get<std::string>(), r.at("keywords").get<std::vector<std::string>>()});
    }
    return MockKeywordBackend(std::move(rules), j.value("fallback", std::string("unknown")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
}

std::string MockKeywordBackend::complete(const GenerationRequest& request) {
  request.validate();
  for (const auto& rule : rules_) {
    bool all = true;
    for (const auto& k : rule.keywords) all = all && request.prompt.find(k) != std::string::npos;
    if (all) return rule.label;
  }
  return fallback_;
}

std::string MockOracleBackend::complete(const GenerationRequest& request) {
  request.validate();
  const auto it = gold_.find(request.request_id);
  return it == gold_.end() ? fallback_ : it->second;
}

}  // namespace taonet::llm
