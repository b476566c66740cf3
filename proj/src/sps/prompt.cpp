// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/sps/prompt.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>

#include "taonet/error.hpp"

namespace taonet::sps {
namespace detail {
extern const std::string_view kBuiltinStrict;
extern const std::string_view kBuiltinComplete;
extern const std::string_view kBuiltinExtended;
}  // namespace detail

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::size_t count_of(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

PromptTemplate make_template(SpsMode mode, std::string version, std::string_view raw,
                             const std::string& origin) {
  std::string text(raw);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  for (auto slot : {kCandidatesSlot, kDigestSlot}) {
    if (count_of(text, slot) != 1) {
      throw Error(ErrorCode::kInvalidConfig,
                  origin + ": template must contain " + std::string(slot) + " exactly once");
    }
  }
  PromptTemplate t{mode, std::move(version), std::move(text), {}};
  t.sha256 = sha256_hex(t.text);
  return t;
}

void append_unique(std::vector<std::string>& out, const std::vector<std::string>& labels) {
  for (const auto& l : labels) {
    if (std::find(out.begin(), out.end(), l) == out.end()) out.push_back(l);
  }
}

void replace_once(std::string& text, std::string_view slot, const std::string& value) {
  text.replace(text.find(slot), slot.size(), value);
}

}  // namespace

std::string mode_name(SpsMode mode) {
  switch (mode) {
    case SpsMode::kStrict: return "strict";
    case SpsMode::kComplete: return "complete";
    case SpsMode::kExtended: return "extended";
  }
  return "strict";
}

std::optional<SpsMode> parse_mode(std::string_view name) {
  const auto n = lower(name);
  for (auto m : kAllModes) {
    if (mode_name(m) == n) return m;
  }
  return std::nullopt;
}

std::string strict_source_name(StrictSource source) {
  return source == StrictSource::kOod ? "ood" : "id";
}

std::optional<StrictSource> parse_strict_source(std::string_view name) {
  const auto n = lower(name);
  if (n == "ood") return StrictSource::kOod;
  if (n == "id") return StrictSource::kId;
  return std::nullopt;
}

std::vector<std::string> candidate_labels(SpsMode mode, const ingest::LabelSpace& space,
                                          StrictSource strict_source) {
  std::vector<std::string> out;
  switch (mode) {
    case SpsMode::kStrict: {
      const auto& source = strict_source == StrictSource::kOod ? space.ood_labels : space.id_labels;
      if (source.empty()) {
        throw Error(ErrorCode::kMissingLabels, "strict mode needs " +
                                                   strict_source_name(strict_source) +
                                                   " labels and the label space has none");
      }
      append_unique(out, source);
      break;
    }
    case SpsMode::kExtended:
      if (space.extended_labels.empty()) {
        throw Error(ErrorCode::kMissingLabels, "extended mode needs extended labels");
      }
      [[fallthrough]];
    case SpsMode::kComplete:
      append_unique(out, space.id_labels);
      append_unique(out, space.ood_labels);
      if (mode == SpsMode::kExtended) append_unique(out, space.extended_labels);
      if (out.empty()) throw Error(ErrorCode::kMissingLabels, "label space is empty");
      break;
  }
  return out;
}

const PromptTemplate& builtin_template(SpsMode mode) {
  static const std::array<PromptTemplate, 3> kTemplates = {
      make_template(SpsMode::kStrict, std::string(kBuiltinTemplateVersion), detail::kBuiltinStrict,
                    "built-in strict"),
      make_template(SpsMode::kComplete, std::string(kBuiltinTemplateVersion),
                    detail::kBuiltinComplete, "built-in complete"),
      make_template(SpsMode::kExtended, std::string(kBuiltinTemplateVersion),
                    detail::kBuiltinExtended, "built-in extended")};
  return kTemplates[static_cast<std::size_t>(mode)];
}

PromptTemplate load_template(SpsMode mode, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open template " + path.string());
  const std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return make_template(mode, "file", raw, path.string());
}

std::string sha256_hex(std::string_view text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIoFailure, "SHA-256 computation failed");
  }
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kDigits[digest[i] >> 4]);
    out.push_back(kDigits[digest[i] & 0xF]);
  }
  return out;
}

PromptBundle render_prompt(const PromptTemplate& tmpl, const ingest::LabelSpace& space,
                           const FeatureDigest& digest, StrictSource strict_source) {
  PromptBundle b;
  b.mode = tmpl.mode;
  b.candidates = candidate_labels(tmpl.mode, space, strict_source);
  b.digest = digest;
  b.template_version = tmpl.version;
  b.template_sha256 = tmpl.sha256;

  std::string list;
  for (const auto& c : b.candidates) {
    if (!list.empty()) list += ", ";
    list += c;
  }
  // Fill the later slot first; the earlier one is then still the first
  // match even if substituted text happens to contain a slot marker.
  b.rendered_text = tmpl.text;
  const auto candidates_at = b.rendered_text.find(kCandidatesSlot);
  const auto digest_at = b.rendered_text.find(kDigestSlot);
  if (digest_at > candidates_at) {
    replace_once(b.rendered_text, kDigestSlot, serialize_digest(digest));
    replace_once(b.rendered_text, kCandidatesSlot, list);
  } else {
    replace_once(b.rendered_text, kCandidatesSlot, list);
    replace_once(b.rendered_text, kDigestSlot, serialize_digest(digest));
  }
  return b;
}

PromptBundle render_prompt(SpsMode mode, const ingest::LabelSpace& space,
                           const FeatureDigest& digest, StrictSource strict_source) {
  return render_prompt(builtin_template(mode), space, digest, strict_source);
}

}  // namespace taonet::sps
