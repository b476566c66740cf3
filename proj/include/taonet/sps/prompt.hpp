// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taonet/ingest/dataset.hpp"
#include "taonet/sps/digest.hpp"

namespace taonet::sps {

/// Prompt modes with nested candidate sets: Strict within Complete within
/// Extended.
enum class SpsMode { kStrict, kComplete, kExtended };

std::string mode_name(SpsMode mode);
/// Accepts "strict", "complete", "extended" in any case.
std::optional<SpsMode> parse_mode(std::string_view name);
inline constexpr std::array<SpsMode, 3> kAllModes = {SpsMode::kStrict, SpsMode::kComplete,
                                                     SpsMode::kExtended};

/// Where Strict mode draws its candidates from. The formal definition uses
/// the OOD labels; kId reproduces the published example prompt, which
/// lists the ID applications.
enum class StrictSource { kOod, kId };

std::string strict_source_name(StrictSource source);
std::optional<StrictSource> parse_strict_source(std::string_view name);

/// Candidates in stable order with duplicates removed:
///   Strict   -> ood_labels (or id_labels, per `strict_source`)
///   Complete -> id_labels then ood_labels
///   Extended -> Complete then extended_labels
/// Throws Error{kMissingLabels} when the mode's source set is empty.
std::vector<std::string> candidate_labels(SpsMode mode, const ingest::LabelSpace& space,
                                          StrictSource strict_source = StrictSource::kOod);

/// Template text with `{{candidates}}` and `{{digest}}` slots, each
/// appearing exactly once.
struct PromptTemplate {
  SpsMode mode = SpsMode::kStrict;
  std::string version;  // "v1" for the built-ins, "file" for overrides
  std::string text;
  std::string sha256;   // hex digest of `text`
};

inline constexpr std::string_view kCandidatesSlot = "{{candidates}}";
inline constexpr std::string_view kDigestSlot = "{{digest}}";
inline constexpr std::string_view kBuiltinTemplateVersion = "v1";

/// The template compiled into the library for `mode`.
const PromptTemplate& builtin_template(SpsMode mode);

/// Reads a template file. Trailing whitespace is dropped so the rendered
/// prompt ends with the template's last sentence. Throws
/// Error{kFileNotFound} and Error{kInvalidConfig} when a slot is missing
/// or repeated.
PromptTemplate load_template(SpsMode mode, const std::filesystem::path& path);

/// Template per mode; entries start as the built-ins.
struct TemplateSet {
  std::array<PromptTemplate, 3> templates = {builtin_template(SpsMode::kStrict),
                                             builtin_template(SpsMode::kComplete),
                                             builtin_template(SpsMode::kExtended)};

  const PromptTemplate& get(SpsMode mode) const { return templates[static_cast<std::size_t>(mode)]; }
  void set(PromptTemplate t) { templates[static_cast<std::size_t>(t.mode)] = std::move(t); }
};

struct PromptBundle {
  SpsMode mode = SpsMode::kStrict;
  std::vector<std::string> candidates;
  FeatureDigest digest;
  std::string rendered_text;
  std::string template_version;
  std::string template_sha256;
};

/// Hex SHA-256 of `text`.
std::string sha256_hex(std::string_view text);

/// Fills the template's slots: candidates joined by ", ", the serialized
/// digest in the digest slot. Errors from candidate_labels propagate.
PromptBundle render_prompt(const PromptTemplate& tmpl, const ingest::LabelSpace& space,
                           const FeatureDigest& digest,
                           StrictSource strict_source = StrictSource::kOod);

/// Same with the built-in template for `mode`.
PromptBundle render_prompt(SpsMode mode, const ingest::LabelSpace& space,
                           const FeatureDigest& digest,
                           StrictSource strict_source = StrictSource::kOod);

}  // namespace taonet::sps
