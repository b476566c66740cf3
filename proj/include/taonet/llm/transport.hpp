// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace taonet::llm {

using Headers = std::vector<std::pair<std::string, std::string>>;

/// Result of one HTTP exchange. `status` 0 means no response arrived
/// (connection refused, DNS failure, timeout); `error` then says why.
struct HttpResponse {
  int status = 0;
  std::string body;
  std::string error;
};

/// Issues one POST. Implementations must be safe to call concurrently.
class Transport {
 public:
  virtual ~Transport() = default;
  /// `base_url` is scheme://host[:port][/prefix]; `path` is appended.
  virtual HttpResponse post(const std::string& base_url, const std::string& path,
                            const Headers& headers, const std::string& body) = 0;
};

/// HTTPS/HTTP client. Every instance bumps a process-wide counter before
/// touching the network so tests can prove no request was made.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(std::chrono::seconds timeout = std::chrono::seconds(60))
      : timeout_(timeout) {}

  HttpResponse post(const std::string& base_url, const std::string& path, const Headers& headers,
                    const std::string& body) override;

  /// Requests attempted by any HttpTransport in this process.
  static std::size_t requests_attempted();

 private:
  std::chrono::seconds timeout_;
};

/// Test double replaying canned responses in order and recording calls.
/// When the script runs out the last response repeats.
class ScriptedTransport : public Transport {
 public:
  struct Call {
    std::string base_url;
    std::string path;
    Headers headers;
    std::string body;
  };

  explicit ScriptedTransport(std::vector<HttpResponse> script) : script_(std::move(script)) {}

  HttpResponse post(const std::string& base_url, const std::string& path, const Headers& headers,
                    const std::string& body) override;

  std::size_t calls() const;
  std::vector<Call> history() const;

 private:
  mutable std::mutex mu_;
  std::vector<HttpResponse> script_;
  std::vector<Call> history_;
};

}  // namespace taonet::llm
