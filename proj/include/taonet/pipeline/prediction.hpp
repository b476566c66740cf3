// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taonet/ood/hybrid.hpp"

namespace taonet::pipeline {

/// Stage-one decision for a sample.
enum class Route { kId, kOod };

inline std::string route_name(Route route) { return route == Route::kId ? "ID" : "OOD"; }

/// Which stage-two component produced the label.
enum class Labeler { kIdClassifier, kLlm };

inline std::string labeler_name(Labeler labeler) {
  return labeler == Labeler::kIdClassifier ? "id-classifier" : "llm";
}

/// Outcome for one sample. `route` is always the detector's decision; the
/// routing mode decides which labeler ran.
struct PredictionRecord {
  std::string sample_id;
  Route route = Route::kId;
  Labeler labeler = Labeler::kIdClassifier;
  std::string label;
  double confidence = 0.0;
  std::optional<std::string> gold;
  std::optional<ood::ScoreBreakdown> score;
  /// Class probabilities in ID label order when the ID classifier ran.
  std::vector<double> distribution;
  /// Generated text before canonicalization when the LLM ran.
  std::optional<std::string> raw_text;
  std::optional<std::string> prompt_sha256;
};

}  // namespace taonet::pipeline
