// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/llm/gateway.hpp"

#include "taonet/error.hpp"
#include "taonet/sps/canonicalize.hpp"
#include "taonet/sps/digest.hpp"

namespace taonet::llm {

std::string redact(std::string text, const std::vector<std::string>& secrets) {
  static const std::string kMask = "[REDACTED]";
  for (const auto& s : secrets) {
    if (s.empty()) continue;
    for (auto pos = text.find(s); pos != std::string::npos; pos = text.find(s, pos + kMask.size())) {
      text.replace(pos, s.size(), kMask);
    }
  }
  return text;
}

AuditLog::AuditLog(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw Error(ErrorCode::kIoFailure, "cannot open audit log " + path.string());
}

void AuditLog::write(const nlohmann::json& record, const std::vector<std::string>& secrets) {
  const auto line = redact(record.dump(), secrets);
  std::lock_guard lock(mu_);
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kIoFailure, "audit log write failed");
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options,
                 std::shared_ptr<AuditLog> audit)
    : backend_(std::move(backend)), options_(options), audit_(std::move(audit)) {
  if (!backend_) throw Error(ErrorCode::kInvalidConfig, "gateway needs a backend");
  if (options_.max_in_flight == 0) throw Error(ErrorCode::kInvalidConfig, "in-flight cap must be >= 1");
  make_request("", "").validate();
}

GenerationRequest Gateway::make_request(std::string request_id, std::string prompt) const {
  return {std::move(request_id), std::move(prompt), options_.temperature, options_.top_p,
          options_.max_tokens};
}

std::string Gateway::complete(const GenerationRequest& request) {
  {
    std::unique_lock lock(mu_);
    const std::uint64_t ticket = next_ticket_++;
    cv_.wait(lock, [&] { return ticket == next_admit_ && in_flight_ < options_.max_in_flight; });
    ++next_admit_;
    ++in_flight_;
    peak_ = std::max(peak_, in_flight_);
  }
  cv_.notify_all();
  struct Release {
    Gateway& g;
    ~Release() {
      {
        std::lock_guard lock(g.mu_);
        --g.in_flight_;
      }
      g.cv_.notify_all();
    }
  } release{*this};

  nlohmann::json entry = {{"request_id", request.request_id},
                          {"backend", backend_kind_name(backend_->kind())},
                          {"temperature", request.temperature},
                          {"top_p", request.top_p},
                          {"max_tokens", request.max_tokens},
                          {"prompt", request.prompt}};
  try {
    auto text = backend_->complete(request);
    if (audit_) {
      entry["response"] = text;
      audit_->write(entry, backend_->secrets());
    }
    return text;
  } catch (const Error& e) {
    if (audit_) {
      entry["error"] = e.what();
      audit_->write(entry, backend_->secrets());
    }
    throw;
  }
}

std::size_t Gateway::peak_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_;
}

std::size_t Gateway::queued() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(next_ticket_ - next_admit_);
}

pipeline::PredictionRecord classify_ood(Gateway& gateway, const ingest::TrafficSample& sample,
                                        const ingest::PacketRecord* record,
                                        const ingest::LabelSpace& space,
                                        const OodLabelingOptions& options,
                                        sps::PromptBundle* prompt_out) {
  auto digest = record ? sps::build_digest(*record, sample) : sps::build_digest(sample);
  digest.extra.insert(digest.extra.end(), options.digest_extra.begin(), options.digest_extra.end());
  const auto& tmpl = options.templates ? options.templates->get(options.mode)
                                       : sps::builtin_template(options.mode);
  auto prompt = sps::render_prompt(tmpl, space, digest, options.strict_source);

  const auto text = gateway.complete(gateway.make_request(sample.id, prompt.rendered_text));

  pipeline::PredictionRecord out;
  out.sample_id = sample.id;
  out.route = pipeline::Route::kOod;
  out.labeler = pipeline::Labeler::kLlm;
  out.label = sps::canonicalize_label(text, prompt.candidates);
  out.gold = sample.label;
  out.raw_text = text;
  out.prompt_sha256 = sps::sha256_hex(prompt.rendered_text);
  if (prompt_out) *prompt_out = std::move(prompt);
  return out;
}

}  // namespace taonet::llm
