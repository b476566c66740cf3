// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taonet/ingest/dataset.hpp"
#include "taonet/nn/checkpoint.hpp"
#include "taonet/nn/encoder.hpp"
#include "taonet/nn/head.hpp"
#include "taonet/nn/train.hpp"

namespace taonet::classifier {

/// Softmax head over the ordered ID labels. Row i of the weight matrix
/// scores labels[i].
struct ClassifierHead {
  nn::LinearHead linear;
  std::vector<std::string> labels;

  /// Throws Error{kDimensionMismatch} unless the head has one row per
  /// label and at least one label.
  void validate() const;

  friend bool operator==(const ClassifierHead&, const ClassifierHead&) = default;
};

/// Encoder plus head. The encoder is shared with the detector's
/// smoothness path, hence the shared pointer.
struct IdClassifier {
  std::shared_ptr<const nn::EncoderParams> encoder;
  std::optional<ClassifierHead> head;
  nn::TrainingMetadata metadata;
};

struct LabelPrediction {
  std::string label;
  double confidence = 0.0;
  std::size_t index = 0;
};

/// softmax(W F_L + b) over the head's labels. Throws Error{kNotFitted}
/// when the encoder or head is missing and Error{kDimensionMismatch} when
/// the head width differs from the encoder width.
std::vector<double> predict_distribution(const IdClassifier& model,
                                         const ingest::TrafficSample& sample);

/// Argmax of a distribution; an exact tie goes to the earlier label.
LabelPrediction argmax_label(std::span<const double> distribution,
                             std::span<const std::string> labels);

LabelPrediction predict_label(const IdClassifier& model, const ingest::TrafficSample& sample);

struct ClassifierFitOptions {
  nn::EncoderConfig encoder;
  nn::TrainConfig train = nn::classifier_train_defaults();
};

/// Trains encoder and head on the ID train split.
IdClassifier fit_classifier(const ingest::Dataset& dataset, const ClassifierFitOptions& options);

/// Throws Error{kNotFitted} for a model without encoder or head.
void save_classifier(const IdClassifier& model, const std::filesystem::path& path);

/// Throws Error{kCorruptPayload} for a checkpoint of the wrong component
/// or with unreadable extras, plus the read_checkpoint errors.
IdClassifier load_classifier(const std::filesystem::path& path);

}  // namespace taonet::classifier
