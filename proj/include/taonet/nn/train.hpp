// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "taonet/ingest/dataset.hpp"
#include "taonet/nn/encoder.hpp"
#include "taonet/nn/head.hpp"
#include "taonet/nn/lstm.hpp"

namespace taonet::nn {

struct TrainConfig {
  std::size_t epochs = 20;
  double learning_rate = 2e-5;
  std::size_t batch_size = 32;
  std::uint64_t seed = 42;
  double weight_decay = 0.0;  // > 0 selects AdamW
  /// Called after each epoch with (epoch index, mean training loss).
  std::function<void(std::size_t, double)> on_epoch;
};

/// Stage-one defaults: Adam, lr 2e-5, 20 epochs.
TrainConfig detector_train_defaults();
/// ID-branch defaults: AdamW (decay 0.01), lr 2e-5, 30 epochs.
TrainConfig classifier_train_defaults();

struct FeatureExtractorTraining {
  LstmParams lstm;
  LinearHead head;  // one-vs-rest sigmoid head; not used after training
  std::vector<double> loss_curve;
};

struct ClassifierTraining {
  EncoderParams encoder;
  LinearHead head;
  std::vector<std::string> labels;
  std::vector<double> loss_curve;
};

/// Labeled ID training samples and their class indices. Throws
/// Error{kEmptyTrainingSet} if there are none and Error{kSchemaViolation}
/// if the train split holds a non-ID label.
struct TrainingSet {
  std::vector<const ingest::TrafficSample*> samples;
  std::vector<std::size_t> targets;
};
TrainingSet collect_training_set(const ingest::Dataset& dataset);

/// Mean one-vs-rest BCE-with-logits loss of a batch through LSTM + head.
/// Gradients (batch means) are added to the non-empty grad spans.
double feature_extractor_loss(const LstmParams& lstm, const LinearHead& head,
                              std::span<const std::vector<std::uint16_t>* const> batch,
                              std::span<const std::size_t> targets, std::span<double> lstm_grad,
                              std::span<double> head_grad);

/// Mean softmax cross-entropy of a batch through encoder + head.
double classifier_loss(const EncoderParams& encoder, const LinearHead& head,
                       std::span<const ingest::TrafficSample* const> batch,
                       std::span<const std::size_t> targets, std::span<double> encoder_grad,
                       std::span<double> head_grad);

FeatureExtractorTraining train_feature_extractor(const ingest::Dataset& dataset,
                                                 const LstmConfig& model,
                                                 const TrainConfig& config);

ClassifierTraining train_classifier(const ingest::Dataset& dataset, const EncoderConfig& model,
                                    const TrainConfig& config);

}  // namespace taonet::nn
