// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/classifier/classifier.hpp"

#include "taonet/error.hpp"

namespace taonet::classifier {

void ClassifierHead::validate() const {
  if (labels.empty()) throw Error(ErrorCode::kDimensionMismatch, "classifier head has no labels");
  if (linear.outputs() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "classifier head has " + std::to_string(linear.outputs()) + " rows for " +
                    std::to_string(labels.size()) + " labels");
  }
}

std::vector<double> predict_distribution(const IdClassifier& model,
                                         const ingest::TrafficSample& sample) {
  if (!model.encoder) throw Error(ErrorCode::kNotFitted, "classifier has no encoder");
  if (!model.head) throw Error(ErrorCode::kNotFitted, "classifier has no head");
  model.head->validate();
  if (model.head->linear.inputs() != model.encoder->config().dim) {
    throw Error(ErrorCode::kDimensionMismatch, "classifier head width differs from encoder width");
  }
  const auto out = nn::encoder_forward(*model.encoder, sample);
  return nn::softmax(model.head->linear.forward(out.embedding));
}

LabelPrediction argmax_label(std::span<const double> distribution,
                             std::span<const std::string> labels) {
  if (distribution.empty() || distribution.size() != labels.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "distribution and label list differ in length");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < distribution.size(); ++i) {
    if (distribution[i] > distribution[best]) best = i;
  }
  return {labels[best], distribution[best], best};
}

LabelPrediction predict_label(const IdClassifier& model, const ingest::TrafficSample& sample) {
  const auto p = predict_distribution(model, sample);
  return argmax_label(p, model.head->labels);
}

IdClassifier fit_classifier(const ingest::Dataset& dataset, const ClassifierFitOptions& options) {
  auto trained = nn::train_classifier(dataset, options.encoder, options.train);
  IdClassifier model;
  model.encoder = std::make_shared<const nn::EncoderParams>(std::move(trained.encoder));
  model.head = ClassifierHead{std::move(trained.head), std::move(trained.labels)};
  model.metadata = {options.train.seed, options.train.epochs, std::move(trained.loss_curve)};
  return model;
}

void save_classifier(const IdClassifier& model, const std::filesystem::path& path) {
  if (!model.encoder || !model.head) {
    throw Error(ErrorCode::kNotFitted, "cannot save an unfitted classifier");
  }
  model.head->validate();
  const auto& c = model.encoder->config();
  nn::Checkpoint ck;
  ck.component = nn::Component::kClassifier;
  ck.metadata = model.metadata;
  ck.append(model.encoder->parameters());
  ck.append(model.head->linear.parameters());
  ck.extras["encoder"] = {{"dim", c.dim},
                          {"layers", c.layers},
                          {"heads", c.heads},
                          {"ffn_dim", c.ffn_dim},
                          {"max_length", c.max_length}};
  ck.extras["labels"] = model.head->labels;
  nn::write_checkpoint(ck, path);
}

IdClassifier load_classifier(const std::filesystem::path& path) {
  const auto ck = nn::read_checkpoint(path);
  if (ck.component != nn::Component::kClassifier) {
    throw Error(ErrorCode::kCorruptPayload, path.string() + " is not a classifier checkpoint");
  }
  IdClassifier model;
  model.metadata = ck.metadata;
  try {
    const auto& e = ck.extras.at("encoder");
    nn::EncoderConfig cfg{e.at("dim").get<std::size_t>(), e.at("layers").get<std::size_t>(),
                          e.at("heads").get<std::size_t>(), e.at("ffn_dim").get<std::size_t>(),
                          e.at("max_length").get<std::size_t>()};
    auto encoder = nn::EncoderParams::zeros(cfg);
    ck.restore(encoder.parameters());
    ClassifierHead head{nn::LinearHead(0, 0),
                        ck.extras.at("labels").get<std::vector<std::string>>()};
    head.linear = nn::LinearHead(head.labels.size(), cfg.dim);
    ck.restore(head.linear.parameters());
    head.validate();
    model.encoder = std::make_shared<const nn::EncoderParams>(std::move(encoder));
    model.head = std::move(head);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::kCorruptPayload, std::string("bad classifier checkpoint: ") + ex.what());
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::kDimensionMismatch) throw Error(ErrorCode::kCorruptPayload, ex.what());
    throw;
  }
  return model;
}

}  // namespace taonet::classifier
