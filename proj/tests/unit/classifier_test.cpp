// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <numeric>
#include <vector>

#include "taonet/classifier/classifier.hpp"
#include "taonet/error.hpp"
#include "taonet/ingest/synthetic.hpp"
#include "test_support.hpp"

using namespace taonet;
using namespace taonet::classifier;
using taonet::testing::TempDir;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected taonet::Error");
  return ErrorCode::kIoFailure;
}

const nn::EncoderConfig kSmall{8, 1, 2, 16, 32};

ingest::TrafficSample sample_of(std::uint64_t seed, std::size_t length = 20) {
  Rng rng(seed);
  ingest::TrafficSample s;
  s.id = "s" + std::to_string(seed);
  for (std::size_t i = 0; i < length; ++i) s.tokens.push_back(static_cast<std::uint16_t>(rng.index(256)));
  while (s.tokens.size() < 32) s.tokens.push_back(ingest::kPadToken);
  return s;
}

IdClassifier zero_head_model(std::vector<std::string> labels) {
  IdClassifier m;
  m.encoder = std::make_shared<const nn::EncoderParams>(kSmall, 7);
  m.head = ClassifierHead{nn::LinearHead(labels.size(), kSmall.dim), std::move(labels)};
  return m;
}

}  // namespace

TEST_CASE("zero head gives the uniform distribution") {
  const auto m = zero_head_model({"A", "B", "C", "D"});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto p = predict_distribution(m, sample_of(seed));
    REQUIRE(p.size() == 4);
    for (double v : p) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  }
}

TEST_CASE("a large first bias dominates") {
  auto m = zero_head_model({"A", "B", "C"});
  m.head->linear.bias()[0] = 10.0;
  const auto p = predict_distribution(m, sample_of(3));
  // e^10 / (e^10 + 2) by hand.
  const double expected = std::exp(10.0) / (std::exp(10.0) + 2.0);
  CHECK(p[0] > 0.99);
  CHECK(p[0] == doctest::Approx(expected).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / (std::exp(10.0) + 2.0)).epsilon(1e-12));
  CHECK(predict_label(m, sample_of(3)).label == "A");
}

TEST_CASE("distributions lie on the simplex for random heads") {
  auto m = zero_head_model({"A", "B", "C", "D", "E"});
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    for (double& w : m.head->linear.parameters().flat()) w = rng.uniform(-3.0, 3.0);
    const auto p = predict_distribution(m, sample_of(100 + trial, 5 + trial));
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    CHECK(std::abs(total - 1.0) <= 1e-6);
    for (double v : p) CHECK(v >= 0.0);
  }
}

TEST_CASE("argmax picks the largest and breaks ties by label order") {
  const std::vector<std::string> abc{"A", "B", "C"};
  const std::vector<double> p{0.7, 0.2, 0.1};
  const auto a = argmax_label(p, abc);
  CHECK(a.label == "A");
  CHECK(a.confidence == 0.7);

  const std::vector<std::string> ab{"A", "B"};
  const std::vector<double> tie{0.5, 0.5};
  CHECK(argmax_label(tie, ab).label == "A");
  const std::vector<double> late{0.2, 0.3, 0.5};
  CHECK(argmax_label(late, abc).index == 2);
  CHECK(code_of([&] { argmax_label(tie, abc); }) == ErrorCode::kDimensionMismatch);
}

TEST_CASE("predicted label is invariant under increasing logit transforms") {
  Rng rng(5);
  const std::vector<std::string> labels{"A", "B", "C", "D"};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> logits(4);
    for (double& z : logits) z = rng.uniform(-5.0, 5.0);
    if (trial % 10 == 0) logits[3] = logits[1];  // exercise ties
    const auto base = argmax_label(nn::softmax(logits), labels);
    for (auto f : {+[](double z) { return 3.0 * z + 2.0; }, +[](double z) { return z * z * z; },
                   +[](double z) { return std::atan(z); }}) {
      std::vector<double> moved;
      for (double z : logits) moved.push_back(f(z));
      CHECK(argmax_label(nn::softmax(moved), labels).label == base.label);
    }
  }
}

TEST_CASE("unfitted or mismatched models are rejected") {
  IdClassifier empty;
  CHECK(code_of([&] { predict_distribution(empty, sample_of(1)); }) == ErrorCode::kNotFitted);
  auto no_head = zero_head_model({"A"});
  no_head.head.reset();
  CHECK(code_of([&] { predict_label(no_head, sample_of(1)); }) == ErrorCode::kNotFitted);

  auto bad_rows = zero_head_model({"A", "B"});
  bad_rows.head->labels.push_back("C");
  CHECK(code_of([&] { predict_distribution(bad_rows, sample_of(1)); }) ==
        ErrorCode::kDimensionMismatch);

  auto bad_width = zero_head_model({"A", "B"});
  bad_width.head->linear = nn::LinearHead(2, kSmall.dim + 1);
  CHECK(code_of([&] { predict_distribution(bad_width, sample_of(1)); }) ==
        ErrorCode::kDimensionMismatch);

  TempDir dir("clf");
  CHECK(code_of([&] { save_classifier(empty, dir / "x.ckpt"); }) == ErrorCode::kNotFitted);
}

TEST_CASE("trained classifier beats chance on the separable fixture") {
  const auto ds = ingest::generate_synthetic(
      ingest::parse_synthetic_spec(testing::small_spec_json()), 40, 42);
  ClassifierFitOptions opts;
  opts.encoder = {16, 2, 2, 32, 32};
  // A hundred-odd steps at lr 2e-5 leave a fresh encoder where it started.
  opts.train.learning_rate = 1e-3;
  const auto model = fit_classifier(ds, opts);
  CHECK(model.head->labels == std::vector<std::string>{"A", "B", "C"});
  CHECK(model.metadata.loss_curve.size() == opts.train.epochs);

  std::size_t correct = 0;
  const auto train = ds.in_split(ingest::Split::kTrain);
  for (const auto* s : train) correct += predict_label(model, *s).label == *s->label;
  MESSAGE("train accuracy ", correct, "/", train.size());
  CHECK(static_cast<double>(correct) / static_cast<double>(train.size()) > 1.0 / 3.0);
}

TEST_CASE("classifier checkpoint round trip") {
  TempDir dir("clf");
  auto m = zero_head_model({"QQMail", "QQMusic", "Youku"});
  Rng rng(9);
  for (double& w : m.head->linear.parameters().flat()) w = static_cast<float>(rng.uniform(-1, 1));
  m.metadata = {43, 30, {1.0, 0.5}};
  save_classifier(m, dir / "c.ckpt");

  const auto back = load_classifier(dir / "c.ckpt");
  CHECK(*back.encoder == *m.encoder);
  CHECK(*back.head == *m.head);
  CHECK(back.metadata.seed == 43);
  CHECK(back.metadata.loss_curve == m.metadata.loss_curve);
  const auto s = sample_of(21);
  CHECK(predict_distribution(back, s) == predict_distribution(m, s));

  nn::Checkpoint other;
  other.component = nn::Component::kDetector;
  nn::write_checkpoint(other, dir / "d.ckpt");
  CHECK(code_of([&] { load_classifier(dir / "d.ckpt"); }) == ErrorCode::kCorruptPayload);

  nn::Checkpoint no_extras;
  no_extras.component = nn::Component::kClassifier;
  nn::write_checkpoint(no_extras, dir / "e.ckpt");
  CHECK(code_of([&] { load_classifier(dir / "e.ckpt"); }) == ErrorCode::kCorruptPayload);
  CHECK(code_of([&] { load_classifier(dir / "missing.ckpt"); }) == ErrorCode::kFileNotFound);
}
