// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/nn/train.hpp"

#include <algorithm>
#include <numeric>

#include "taonet/error.hpp"
#include "taonet/nn/optim.hpp"

namespace taonet::nn {
namespace {

// Shuffling draws from its own stream so that initialization is a pure
// function of the seed.
constexpr std::uint64_t kShuffleStream = 0x9E3779B97F4A7C15ULL;

std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size,
                                                    Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

void check_config(const TrainConfig& config) {
  if (config.batch_size == 0) throw Error(ErrorCode::kInvalidConfig, "batch_size must be positive");
  if (!(config.learning_rate > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "learning_rate must be positive");
  }
  if (config.weight_decay < 0.0) {
    throw Error(ErrorCode::kInvalidConfig, "weight_decay must be non-negative");
  }
}

AdamConfig adam_config(const TrainConfig& config) {
  AdamConfig a;
  a.learning_rate = config.learning_rate;
  a.weight_decay = config.weight_decay;
  return a;
}

}  // namespace

TrainConfig detector_train_defaults() {
  TrainConfig c;
  c.epochs = 20;
  c.learning_rate = 2e-5;
  return c;
}

TrainConfig classifier_train_defaults() {
  TrainConfig c;
  c.epochs = 30;
  c.learning_rate = 2e-5;
  c.weight_decay = 0.01;
  return c;
}

TrainingSet collect_training_set(const ingest::Dataset& dataset) {
  TrainingSet set;
  for (const auto* s : dataset.in_split(ingest::Split::kTrain)) {
    if (!s->label) continue;
    const auto idx = dataset.label_space.id_index(*s->label);
    if (!idx) {
      throw Error(ErrorCode::kSchemaViolation,
                  "train split holds non-ID sample '" + s->id + "' (" + *s->label + ")");
    }
    set.samples.push_back(s);
    set.targets.push_back(*idx);
  }
  if (set.samples.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "no labeled ID training samples");
  return set;
}

double feature_extractor_loss(const LstmParams& lstm, const LinearHead& head,
                              std::span<const std::vector<std::uint16_t>* const> batch,
                              std::span<const std::size_t> targets, std::span<double> lstm_grad,
                              std::span<double> head_grad) {
  const bool want_grad = !lstm_grad.empty() || !head_grad.empty();
  LstmTape tape;
  const Matrix h = lstm_forward(lstm, batch, want_grad ? &tape : nullptr);
  const std::size_t b = batch.size();
  const std::size_t k = head.outputs();
  const double inv_b = 1.0 / static_cast<double>(b);

  std::vector<double> scratch_head;
  if (want_grad && head_grad.empty()) {
    scratch_head.assign(head.parameters().size(), 0.0);
    head_grad = scratch_head;
  }
  Matrix d_h(b, lstm.hidden());
  std::vector<double> y(k), d_logits(k);
  double loss = 0.0;
  for (std::size_t s = 0; s < b; ++s) {
    const auto logits = head.forward(h.row(s));
    std::fill(y.begin(), y.end(), 0.0);
    y[targets[s]] = 1.0;
    loss += bce_with_logits(logits, y, want_grad ? std::span<double>(d_logits) : std::span<double>());
    if (!want_grad) continue;
    for (double& g : d_logits) g *= inv_b;
    const auto dx = head.backward(h.row(s), d_logits, head_grad);
    std::copy(dx.begin(), dx.end(), d_h.row(s).begin());
  }
  if (want_grad && !lstm_grad.empty()) lstm_backward(lstm, tape, d_h, lstm_grad);
  return loss * inv_b;
}

double classifier_loss(const EncoderParams& encoder, const LinearHead& head,
                       std::span<const ingest::TrafficSample* const> batch,
                       std::span<const std::size_t> targets, std::span<double> encoder_grad,
                       std::span<double> head_grad) {
  const bool want_grad = !encoder_grad.empty() || !head_grad.empty();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  std::vector<double> scratch_head;
  if (want_grad && head_grad.empty()) {
    scratch_head.assign(head.parameters().size(), 0.0);
    head_grad = scratch_head;
  }
  std::vector<double> d_logits(head.outputs());
  double loss = 0.0;
  for (std::size_t s = 0; s < batch.size(); ++s) {
    const auto out = encoder_forward(encoder, *batch[s], want_grad && !encoder_grad.empty());
    const auto logits = head.forward(out.embedding);
    loss += softmax_cross_entropy(logits, targets[s],
                                  want_grad ? std::span<double>(d_logits) : std::span<double>());
    if (!want_grad) continue;
    for (double& g : d_logits) g *= inv_b;
    const auto dx = head.backward(out.embedding, d_logits, head_grad);
    if (!encoder_grad.empty()) encoder_backward(encoder, out, dx, encoder_grad);
  }
  return loss * inv_b;
}

FeatureExtractorTraining train_feature_extractor(const ingest::Dataset& dataset,
                                                 const LstmConfig& model,
                                                 const TrainConfig& config) {
  check_config(config);
  const auto set = collect_training_set(dataset);
  const std::size_t k = dataset.label_space.id_labels.size();

  Rng init(config.seed);
  FeatureExtractorTraining result{LstmParams(model, init), LinearHead(k, model.hidden, init), {}};
  auto& lstm_flat = result.lstm.parameters();
  auto& head_flat = result.head.parameters();
  Adam lstm_opt(lstm_flat.size(), adam_config(config));
  Adam head_opt(head_flat.size(), adam_config(config));
  std::vector<double> lstm_grad(lstm_flat.size()), head_grad(head_flat.size());

  Rng order(config.seed ^ kShuffleStream);
  std::vector<const std::vector<std::uint16_t>*> tokens;
  std::vector<std::size_t> targets;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : epoch_batches(set.samples.size(), config.batch_size, order)) {
      tokens.clear();
      targets.clear();
      for (std::size_t i : batch) {
        tokens.push_back(&set.samples[i]->tokens);
        targets.push_back(set.targets[i]);
      }
      std::fill(lstm_grad.begin(), lstm_grad.end(), 0.0);
      std::fill(head_grad.begin(), head_grad.end(), 0.0);
      const double loss =
          feature_extractor_loss(result.lstm, result.head, tokens, targets, lstm_grad, head_grad);
      total += loss * static_cast<double>(batch.size());
      lstm_opt.step(lstm_flat.flat(), lstm_grad);
      head_opt.step(head_flat.flat(), head_grad);
    }
    const double mean = total / static_cast<double>(set.samples.size());
    result.loss_curve.push_back(mean);
    if (config.on_epoch) config.on_epoch(epoch, mean);
  }
  return result;
}

ClassifierTraining train_classifier(const ingest::Dataset& dataset, const EncoderConfig& model,
                                    const TrainConfig& config) {
  check_config(config);
  const auto set = collect_training_set(dataset);
  const std::size_t k = dataset.label_space.id_labels.size();

  Rng init(config.seed);
  ClassifierTraining result{EncoderParams(model, init), LinearHead(k, model.dim, init),
                            dataset.label_space.id_labels, {}};
  auto& enc_flat = result.encoder.parameters();
  auto& head_flat = result.head.parameters();
  Adam enc_opt(enc_flat.size(), adam_config(config));
  Adam head_opt(head_flat.size(), adam_config(config));
  std::vector<double> enc_grad(enc_flat.size()), head_grad(head_flat.size());

  Rng order(config.seed ^ kShuffleStream);
  std::vector<const ingest::TrafficSample*> samples;
  std::vector<std::size_t> targets;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (const auto& batch : epoch_batches(set.samples.size(), config.batch_size, order)) {
      samples.clear();
      targets.clear();
      for (std::size_t i : batch) {
        samples.push_back(set.samples[i]);
        targets.push_back(set.targets[i]);
      }
      std::fill(enc_grad.begin(), enc_grad.end(), 0.0);
      std::fill(head_grad.begin(), head_grad.end(), 0.0);
      const double loss =
          classifier_loss(result.encoder, result.head, samples, targets, enc_grad, head_grad);
      total += loss * static_cast<double>(batch.size());
      enc_opt.step(enc_flat.flat(), enc_grad);
      head_opt.step(head_flat.flat(), head_grad);
    }
    const double mean = total / static_cast<double>(set.samples.size());
    result.loss_curve.push_back(mean);
    if (config.on_epoch) config.on_epoch(epoch, mean);
  }
  return result;
}

}  // namespace taonet::nn
