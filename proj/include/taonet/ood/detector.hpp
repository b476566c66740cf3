// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "taonet/ingest/dataset.hpp"
#include "taonet/nn/checkpoint.hpp"
#include "taonet/nn/encoder.hpp"
#include "taonet/nn/lstm.hpp"
#include "taonet/nn/train.hpp"
#include "taonet/ood/hybrid.hpp"
#include "taonet/ood/subspace.hpp"

namespace taonet::ood {

/// Sum over layers of || F_l - F_{l-1} || for pooled states F_0 .. F_L.
double smoothness_from_pooled(const std::vector<std::vector<double>>& pooled);

/// Smoothness of one sample under the given encoder.
double smoothness_score(const nn::EncoderParams& encoder, const ingest::TrafficSample& sample);

/// LSTM features of many samples, run in batches.
std::vector<std::vector<double>> extract_features(const nn::LstmParams& lstm,
                                                  std::span<const ingest::TrafficSample* const> samples);

struct RawScores {
  double residual = 0.0;
  double smoothness = 0.0;
};

/// Everything stage one needs. The encoder is the ID classifier's and is
/// shared with it; the rest belongs to the detector checkpoint.
struct DetectorBundle {
  std::optional<nn::LstmParams> lstm;
  std::optional<SubspaceModel> subspace;
  std::shared_ptr<const nn::EncoderParams> encoder;
  std::optional<HybridScoreConfig> hybrid;
  nn::TrainingMetadata metadata;
};

/// Throws Error{kNotFitted} if the LSTM, subspace or encoder is missing.
RawScores raw_scores(const DetectorBundle& bundle, const ingest::TrafficSample& sample);

/// Normalizes raw scores with the calibrated bounds and mixes them.
ScoreBreakdown score_from_raw(const HybridScoreConfig& config, const RawScores& raw);

/// Full stage-one decision. Throws Error{kNotFitted} if any part,
/// calibration included, is missing.
ScoreBreakdown detect(const DetectorBundle& bundle, const ingest::TrafficSample& sample);

struct CalibrationOptions {
  double alpha = 0.6;
  double delta = 0.75;
  double low_percentile = 1.0;
  double high_percentile = 99.0;
};

inline constexpr std::size_t kMinCalibrationSamples = 20;

/// Per-component bounds from raw scores of ID validation samples. Throws
/// Error{kTooFewSamples} below 20 samples and Error{kInvalidConfig} for
/// alpha outside [0, 1].
HybridScoreConfig calibrate_from_raw(std::span<const RawScores> id_validation,
                                     const CalibrationOptions& options = {});

HybridScoreConfig calibrate(const DetectorBundle& bundle,
                            std::span<const ingest::TrafficSample* const> id_validation,
                            const CalibrationOptions& options = {});

struct DetectorFitOptions {
  nn::LstmConfig lstm;
  nn::TrainConfig train = nn::detector_train_defaults();
  double gamma = 0.95;
};

/// Trains the feature extractor on the ID train split, then fits the
/// statistics and residual subspace on its training features.
DetectorBundle fit_detector(const ingest::Dataset& dataset, const DetectorFitOptions& options);

/// Writes LSTM weights plus subspace and calibration into a detector
/// checkpoint. Throws Error{kNotFitted} without an LSTM and subspace.
void save_detector(const DetectorBundle& bundle, const std::filesystem::path& path);

/// Reads a detector checkpoint; the encoder must be attached separately.
DetectorBundle load_detector(const std::filesystem::path& path);

}  // namespace taonet::ood
