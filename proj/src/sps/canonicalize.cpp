// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/sps/canonicalize.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace taonet::sps {

std::string normalize_label(std::string_view text) {
  std::string out;
  for (char c : text) {
    if (c >= 'A' && c <= 'Z') {
      out.push_back(static_cast<char>(c - 'A' + 'a'));
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      out.push_back(c);
    }
  }
  return out;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::string canonicalize_label(std::string_view generated, std::span<const std::string> candidates) {
  const auto text = normalize_label(generated);
  if (text.empty()) return std::string(kUnmapped);
  for (const auto& c : candidates) {
    if (normalize_label(c) == text) return c;
  }
  const std::string* best = nullptr;
  double best_ratio = 0.0;
  for (const auto& c : candidates) {
    const auto norm = normalize_label(c);
    const double ratio = static_cast<double>(edit_distance(text, norm)) /
                         static_cast<double>(std::max(text.size(), norm.size()));
    if (!best || ratio < best_ratio) {
      best = &c;
      best_ratio = ratio;
    }
  }
  return best && best_ratio <= kMaxEditRatio ? *best : std::string(kUnmapped);
}

}  // namespace taonet::sps
