// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <atomic>

#include "taonet/error.hpp"
#include "taonet/llm/transport.hpp"

namespace taonet::llm {
namespace {

std::atomic<std::size_t> g_requests{0};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path part, no trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig, "base URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out{url.substr(0, path_start), path_start == std::string::npos ? "" : url.substr(path_start)};
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  return out;
}

}  // namespace

HttpResponse HttpTransport::post(const std::string& base_url, const std::string& path,
                                 const Headers& headers, const std::string& body) {
  const auto url = split_url(base_url);
  ++g_requests;
  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  httplib::Headers h;
  for (const auto& [k, v] : headers) h.emplace(k, v);
  auto res = client.Post(url.prefix + path, h, body, "application/json");
  if (!res) return {0, {}, httplib::to_string(res.error())};
  return {res->status, res->body, {}};
}

std::size_t HttpTransport::requests_attempted() { return g_requests.load(); }

HttpResponse ScriptedTransport::post(const std::string& base_url, const std::string& path,
                                     const Headers& headers, const std::string& body) {
  std::lock_guard lock(mu_);
  history_.push_back({base_url, path, headers, body});
  if (script_.empty()) return {0, {}, "empty script"};
  const std::size_t i = std::min(history_.size(), script_.size()) - 1;
  return script_[i];
}

std::size_t ScriptedTransport::calls() const {
  std::lock_guard lock(mu_);
  return history_.size();
}

std::vector<ScriptedTransport::Call> ScriptedTransport::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

}  // namespace taonet::llm
