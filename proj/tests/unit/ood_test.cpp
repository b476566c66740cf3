// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <doctest.h>
#include <json.hpp>
#include <memory>
#include <vector>

#include "taonet/error.hpp"
#include "taonet/ingest/synthetic.hpp"
#include "taonet/ood/detector.hpp"
#include "taonet/ood/hybrid.hpp"
#include "taonet/ood/subspace.hpp"
#include "test_support.hpp"

using namespace taonet;
using namespace taonet::ood;
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

using Vec = std::vector<double>;

std::vector<Vec> random_features(Rng& rng, std::size_t n, std::size_t d) {
  // Correlated data: random mixing of independent normals plus offsets.
  nn::Matrix mix(d, d);
  for (double& v : mix.flat()) v = rng.normal();
  std::vector<Vec> out(n, Vec(d));
  for (auto& f : out) {
    Vec z(d);
    for (double& v : z) v = rng.normal();
    for (std::size_t i = 0; i < d; ++i) {
      f[i] = 3.0 * static_cast<double>(i);
      for (std::size_t j = 0; j <= i; ++j) f[i] += mix(i, j) * z[j];
    }
  }
  return out;
}

double max_abs_diff(const nn::Matrix& a, const nn::Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

nn::Matrix multiply(const nn::Matrix& a, const nn::Matrix& b) {
  nn::Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      for (std::size_t k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
    }
  }
  return c;
}

ingest::SyntheticSpec detector_spec() {
  return ingest::parse_synthetic_spec(nlohmann::json::parse(R"({
    "name": "ood-unit",
    "sequence_length": 32,
    "classes": [
      {"label": "A", "role": "id",
       "header_template": "4500002800004000400600000000000000000000000001bb00000000000000005018020000000000",
       "payload": {"kind": "categorical", "values": [0, 17], "weights": [1, 1]},
       "length": {"mean": 60, "stddev": 4, "min": 40, "max": 200}},
      {"label": "B", "role": "id",
       "header_template": "4500002800004000800600000000000000000000000000500000000000000000501000ff00000000",
       "payload": {"kind": "uniform", "low": 200, "high": 255},
       "length": {"mean": 60, "stddev": 4, "min": 40, "max": 200}},
      {"label": "Z", "role": "ood",
       "header_template": "4500001c000040004011000000000000000000000035003500080000",
       "payload": {"kind": "uniform", "low": 0, "high": 255},
       "length": {"mean": 40, "stddev": 4, "min": 28, "max": 200}}
    ]})"));
}

}  // namespace

TEST_CASE("fit_statistics uses population deviation with a constant guard") {
  const auto s = fit_statistics({{0.0, 0.0}, {2.0, 2.0}});
  CHECK(s.mu == Vec{1.0, 1.0});
  CHECK(s.sigma == Vec{1.0, 1.0});

  const auto same = fit_statistics({{4.0, -1.0, 2.0}, {4.0, -1.0, 2.0}, {4.0, -1.0, 2.0}});
  CHECK(same.mu == Vec{4.0, -1.0, 2.0});
  CHECK(same.sigma == Vec{1.0, 1.0, 1.0});

  const auto mixed = fit_statistics({{1.0, 5.0}, {3.0, 5.0}, {8.0, 5.0}});
  CHECK(mixed.mu[0] == doctest::Approx(4.0));
  CHECK(mixed.sigma[0] == doctest::Approx(std::sqrt((9.0 + 1.0 + 16.0) / 3.0)));
  CHECK(mixed.sigma[1] == 1.0);

  CHECK(code_of([] { fit_statistics({{1.0, 2.0}}); }) == ErrorCode::kTooFewSamples);
  CHECK(code_of([] { fit_statistics({{1.0, 2.0}, {1.0}}); }) == ErrorCode::kDimensionMismatch);
}

TEST_CASE("jacobi_eigen matches the 2x2 characteristic polynomial") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform(-3, 3), b = rng.uniform(-3, 3), d = rng.uniform(-3, 3);
    nn::Matrix m(2, 2);
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = b;
    m(1, 1) = d;
    // roots of t^2 - (a + d) t + (ad - b^2)
    const double mid = 0.5 * (a + d);
    const double rad = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
    const auto e = jacobi_eigen(m);
    CHECK(e.values[0] == doctest::Approx(mid + rad).epsilon(1e-12));
    CHECK(e.values[1] == doctest::Approx(mid - rad).epsilon(1e-12));
  }
}

TEST_CASE("jacobi_eigen reconstructs random symmetric 4x4 matrices") {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    nn::Matrix a(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = i; j < 4; ++j) a(i, j) = a(j, i) = rng.uniform(-5, 5);
    }
    const auto e = jacobi_eigen(a);
    for (std::size_t i = 0; i + 1 < 4; ++i) CHECK(e.values[i] >= e.values[i + 1]);
    nn::Matrix scaled = e.vectors;
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 4; ++c) scaled(r, c) *= e.values[c];
    }
    nn::Matrix vt(4, 4);
    for (std::size_t r = 0; r < 4; ++r) {
      for (std::size_t c = 0; c < 4; ++c) vt(c, r) = e.vectors(r, c);
    }
    CHECK(max_abs_diff(multiply(scaled, vt), a) < 1e-6);
    nn::Matrix eye(4, 4);
    for (std::size_t i = 0; i < 4; ++i) eye(i, i) = 1.0;
    CHECK(max_abs_diff(multiply(vt, e.vectors), eye) < 1e-6);
  }
  CHECK(code_of([] { jacobi_eigen(nn::Matrix(2, 3)); }) == ErrorCode::kDimensionMismatch);
  nn::Matrix bad(2, 2);
  bad(0, 1) = bad(1, 0) = std::nan("");
  CHECK(code_of([&] { jacobi_eigen(bad); }) == ErrorCode::kDecompositionFailure);
  nn::Matrix slow(3, 3);
  slow(0, 1) = slow(1, 0) = 1.0;
  slow(1, 2) = slow(2, 1) = 1.0;
  CHECK(code_of([&] { jacobi_eigen(slow, 1e-10, 0); }) == ErrorCode::kDecompositionFailure);
}

TEST_CASE("select_components follows the cumulative variance ratio") {
  CHECK(select_components(Vec{3.0, 1.0}, 0.75) == 1);
  CHECK(select_components(Vec{1.0, 1.0, 1.0, 1.0}, 1.0) == 4);
  CHECK(select_components(Vec{5.0, 0.0, 0.0}, 0.9) == 1);
  CHECK(select_components(Vec{0.0, 0.0}, 0.5) == 2);
  CHECK(select_components(Vec{2.0, 1.0, 1.0}, 0.5) == 1);
  CHECK(select_components(Vec{2.0, 1.0, 1.0}, 0.51) == 2);

  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Vec ev(1 + rng.index(10));
    for (double& v : ev) v = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.0, 4.0);
    std::sort(ev.rbegin(), ev.rend());
    std::size_t prev = 0;
    for (double gamma : {0.5, 0.75, 0.9, 0.95, 1.0}) {
      const std::size_t k = select_components(ev, gamma);
      CHECK(k >= prev);
      prev = k;
    }
  }
}

TEST_CASE("fitted subspaces satisfy projector algebra") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 2 + rng.index(15);
    const auto feats = random_features(rng, 40 + rng.index(60), d);
    const auto model = fit_subspace(feats, fit_statistics(feats), 0.9);
    const auto& pr = model.residual_projector;
    CHECK(max_abs_diff(multiply(pr, pr), pr) < 1e-6);
    nn::Matrix prt(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) prt(j, i) = pr(i, j);
    }
    CHECK(max_abs_diff(prt, pr) < 1e-12);
    auto sum = model.principal_projector();
    for (std::size_t i = 0; i < sum.size(); ++i) sum.data()[i] += pr.data()[i];
    nn::Matrix eye(d, d);
    for (std::size_t i = 0; i < d; ++i) eye(i, i) = 1.0;
    CHECK(max_abs_diff(sum, eye) < 1e-6);
    for (std::size_t i = 0; i + 1 < d; ++i) CHECK(model.eigenvalues[i] >= model.eigenvalues[i + 1]);
    CHECK(model.eigenvalues.back() >= -1e-9);
    CHECK(model.k == select_components(model.eigenvalues, 0.9));
  }
  const auto feats = random_features(rng, 10, 3);
  CHECK(code_of([&] { fit_subspace(feats, fit_statistics(feats), 0.0); }) ==
        ErrorCode::kInvalidConfig);
}

TEST_CASE("fit_subspace on two correlated dimensions keeps one component") {
  // Standardized correlation 0.5 gives eigenvalues 1.5 and 0.5.
  std::vector<Vec> feats;
  for (double x : {-1.0, 1.0}) {
    for (double y : {-1.0, 1.0}) {
      const int copies = x == y ? 3 : 1;
      for (int c = 0; c < copies; ++c) feats.push_back({x, y});
    }
  }
  const auto model = fit_subspace(feats, fit_statistics(feats), 0.7);
  CHECK(model.eigenvalues[0] == doctest::Approx(1.5));
  CHECK(model.eigenvalues[1] == doctest::Approx(0.5));
  CHECK(model.k == 1);
}

TEST_CASE("residual_score annihilates principal directions and keeps residual ones") {
  Rng rng(8);
  const auto feats = random_features(rng, 80, 5);
  const auto model = fit_subspace(feats, fit_statistics(feats), 0.8);
  REQUIRE(model.k < 5);

  auto from_standardized = [&](const Vec& z) {
    Vec phi(5);
    for (std::size_t i = 0; i < 5; ++i) phi[i] = z[i] * model.sigma[i] + model.mu[i];
    return phi;
  };
  Vec in_span(5, 0.0);
  for (std::size_t c = 0; c < model.k; ++c) {
    const double w = rng.uniform(-2, 2);
    for (std::size_t i = 0; i < 5; ++i) in_span[i] += w * model.eigenvectors(i, c);
  }
  CHECK(std::abs(residual_score(model, from_standardized(in_span))) < 1e-6);

  Vec last(5);
  for (std::size_t i = 0; i < 5; ++i) last[i] = model.eigenvectors(i, 4);
  CHECK(residual_score(model, from_standardized(last)) == doctest::Approx(1.0).epsilon(1e-6));

  // Dense oracle: P_R = sum over residual columns of v v^T, then multiply.
  Vec phi(5);
  for (double& v : phi) v = rng.uniform(-4, 8);
  Vec z(5), r(5, 0.0);
  for (std::size_t i = 0; i < 5; ++i) z[i] = (phi[i] - model.mu[i]) / model.sigma[i];
  for (std::size_t c = model.k; c < 5; ++c) {
    double proj = 0.0;
    for (std::size_t i = 0; i < 5; ++i) proj += model.eigenvectors(i, c) * z[i];
    for (std::size_t i = 0; i < 5; ++i) r[i] += proj * model.eigenvectors(i, c);
  }
  double norm = 0.0;
  for (double v : r) norm += v * v;
  CHECK(residual_score(model, phi) == doctest::Approx(std::sqrt(norm)).epsilon(1e-10));

  CHECK(code_of([&] { residual_score(model, Vec{1.0, 2.0}); }) == ErrorCode::kDimensionMismatch);
}

TEST_CASE("smoothness sums layer-to-layer distances") {
  CHECK(smoothness_from_pooled({{0.0, 0.0}, {3.0, 4.0}}) == 5.0);
  CHECK(smoothness_from_pooled({{1.0, 2.0}, {1.0, 2.0}, {1.0, 2.0}}) == 0.0);
  CHECK(smoothness_from_pooled({{0.0}, {1.0}, {-1.0}}) == 3.0);

  nn::EncoderParams enc({8, 3, 2, 16, 16}, 4);
  ingest::TrafficSample s;
  s.id = "x";
  s.tokens = {4, 9, 200, 13, 77, 256, 256, 256};
  const auto out = nn::encoder_forward(enc, s, true);
  // Walk the layers again from their recorded inputs and final output.
  std::vector<nn::Matrix> states;
  for (const auto& layer : out.layers) states.push_back(layer.input);
  states.push_back(out.final_hidden);
  double want = 0.0;
  for (std::size_t l = 1; l < states.size(); ++l) {
    double sq = 0.0;
    for (std::size_t c = 0; c < 8; ++c) {
      double a = 0.0, b = 0.0;
      for (std::size_t r = 0; r < states[l].rows(); ++r) {
        a += states[l](r, c);
        b += states[l - 1](r, c);
      }
      const double diff = (a - b) / static_cast<double>(states[l].rows());
      sq += diff * diff;
    }
    want += std::sqrt(sq);
  }
  CHECK(smoothness_score(enc, s) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("hybrid score mixes and thresholds strictly") {
  HybridScoreConfig cfg;
  CHECK(cfg.alpha == 0.6);
  CHECK(cfg.delta == 0.75);
  CHECK(hybrid_score(cfg, 1.0, 0.0).hybrid == doctest::Approx(0.6));
  for (double alpha : {0.0, 0.3, 0.6, 1.0}) {
    cfg.alpha = alpha;
    CHECK(hybrid_score(cfg, 0.42, 0.42).hybrid == doctest::Approx(0.42).epsilon(1e-15));
  }
  cfg.alpha = 1.0;
  CHECK(hybrid_score(cfg, 0.75, 0.9).is_ood == false);
  CHECK(hybrid_score(cfg, 0.7501, 0.0).is_ood == true);
  cfg.alpha = 0.0;
  CHECK(hybrid_score(cfg, 0.1, 0.33).hybrid == 0.33);
}

TEST_CASE("normalization bounds and calibration") {
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 50.0) == 3.0);
  CHECK(percentile({0.0, 10.0}, 25.0) == 2.5);
  CHECK(percentile({7.0}, 99.0) == 7.0);

  const Vec constant(30, 2.5);
  const auto flat = fit_bounds(constant);
  CHECK(flat.low == 2.5);
  CHECK(flat.high == 3.5);
  CHECK(flat.normalize(2.5) == 0.0);

  NormalizationBounds b{1.0, 3.0};
  CHECK(b.normalize(3.0) == 1.0);
  CHECK(b.normalize(0.5) == 0.0);
  CHECK(b.normalize(2.0) == 0.5);
  CHECK(b.normalize(10.0) == 1.0);

  std::vector<RawScores> raw;
  for (int i = 0; i < 101; ++i) raw.push_back({static_cast<double>(i), 2.0 * i});
  const auto cfg = calibrate_from_raw(raw);
  CHECK(cfg.residual.low == doctest::Approx(1.0));
  CHECK(cfg.residual.high == doctest::Approx(99.0));
  CHECK(cfg.smoothness.high == doctest::Approx(198.0));
  CHECK(score_from_raw(cfg, {99.0, 198.0}).hybrid == doctest::Approx(1.0));

  std::vector<RawScores> few(19);
  CHECK(code_of([&] { calibrate_from_raw(few); }) == ErrorCode::kTooFewSamples);
  CalibrationOptions bad;
  bad.alpha = 1.5;
  CHECK(code_of([&] { calibrate_from_raw(raw, bad); }) == ErrorCode::kInvalidConfig);
}

TEST_CASE("detector bundle fits, calibrates, detects and round-trips") {
  const auto ds = ingest::generate_synthetic(detector_spec(), 60, 42);
  DetectorFitOptions opt;
  opt.lstm = {8, 8};
  opt.train.epochs = 2;
  auto bundle = fit_detector(ds, opt);
  REQUIRE(bundle.lstm);
  REQUIRE(bundle.subspace);
  CHECK(bundle.metadata.loss_curve.size() == 2);

  const auto valid = ds.in_split(ingest::Split::kValid);
  std::vector<const ingest::TrafficSample*> id_valid;
  for (const auto* s : valid) {
    if (ds.label_space.is_id(*s->label)) id_valid.push_back(s);
  }
  CHECK(code_of([&] { detect(bundle, *id_valid[0]); }) == ErrorCode::kNotFitted);
  bundle.encoder = std::make_shared<nn::EncoderParams>(nn::EncoderConfig{8, 2, 2, 16, 32}, 42);
  CHECK(code_of([&] { detect(bundle, *id_valid[0]); }) == ErrorCode::kNotFitted);
  CHECK(code_of([&] { calibrate(bundle, std::span(id_valid).first(5)); }) ==
        ErrorCode::kTooFewSamples);

  bundle.hybrid = calibrate(bundle, id_valid);
  // The 99th-percentile bounds leave at most 1% of the calibration samples
  // (rounded up) saturated in each component.
  std::size_t saturated_residual = 0;
  std::size_t saturated_smoothness = 0;
  for (const auto* s : id_valid) {
    const auto q = detect(bundle, *s);
    saturated_residual += q.residual_norm >= 1.0;
    saturated_smoothness += q.smoothness_norm >= 1.0;
  }
  const auto allowed = (id_valid.size() + 99) / 100;
  CHECK(saturated_residual <= allowed);
  CHECK(saturated_smoothness <= allowed);

  std::vector<double> id_scores;
  const auto test = ds.in_split(ingest::Split::kTest);
  for (const auto* s : test) {
    if (ds.label_space.is_id(*s->label)) id_scores.push_back(detect(bundle, *s).hybrid);
  }
  CHECK(percentile(id_scores, 50.0) <= bundle.hybrid->delta);

  auto pure = bundle;
  pure.hybrid->alpha = 1.0;
  for (const auto* s : test) {
    const auto b = detect(pure, *s);
    CHECK(b.hybrid == b.residual_norm);
  }

  TempDir dir("detector");
  save_detector(bundle, dir / "detector.ckpt");
  auto back = load_detector(dir / "detector.ckpt");
  CHECK(*back.lstm == *bundle.lstm);
  CHECK(back.subspace->k == bundle.subspace->k);
  CHECK(back.subspace->mu == bundle.subspace->mu);
  CHECK(back.subspace->eigenvectors == bundle.subspace->eigenvectors);
  CHECK(back.subspace->residual_projector == bundle.subspace->residual_projector);
  CHECK(*back.hybrid == *bundle.hybrid);
  CHECK(back.metadata.loss_curve == bundle.metadata.loss_curve);
  back.encoder = bundle.encoder;
  const auto a = detect(bundle, *test[0]);
  const auto b = detect(back, *test[0]);
  CHECK(a.hybrid == b.hybrid);
}
