// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace taonet::sps {

inline constexpr std::string_view kUnmapped = "UNMAPPED";

/// Largest edit distance, relative to the longer normalized string, that
/// still maps to a candidate.
inline constexpr double kMaxEditRatio = 0.2;

/// ASCII case-fold and drop everything that is not a letter or digit.
std::string normalize_label(std::string_view text);

/// Levenshtein distance with unit costs.
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Maps generated text to a candidate. An exact match after normalization
/// wins; otherwise the candidate with the smallest ratio
/// distance / max(length) is taken if that ratio is at most kMaxEditRatio,
/// earlier candidates winning ties. Returns "UNMAPPED" otherwise, and for
/// text that normalizes to "".
std::string canonicalize_label(std::string_view generated, std::span<const std::string> candidates);

}  // namespace taonet::sps
