// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/ood/detector.hpp"

#include <cmath>
#include <map>

#include "taonet/error.hpp"

namespace taonet::ood {
namespace {

constexpr std::size_t kFeatureBatch = 64;

void require_scoring_parts(const DetectorBundle& b) {
  if (!b.lstm) throw Error(ErrorCode::kNotFitted, "detector has no feature extractor");
  if (!b.subspace) throw Error(ErrorCode::kNotFitted, "detector has no residual subspace");
  if (!b.encoder) throw Error(ErrorCode::kNotFitted, "detector has no encoder attached");
}

nlohmann::json bounds_json(const NormalizationBounds& b) { return {{"low", b.low}, {"high", b.high}}; }

NormalizationBounds bounds_from(const nlohmann::json& j) {
  return {j.at("low").get<double>(), j.at("high").get<double>()};
}

}  // namespace

double smoothness_from_pooled(const std::vector<std::vector<double>>& pooled) {
  double total = 0.0;
  for (std::size_t l = 1; l < pooled.size(); ++l) {
    double sq = 0.0;
    for (std::size_t i = 0; i < pooled[l].size(); ++i) {
      const double diff = pooled[l][i] - pooled[l - 1][i];
      sq += diff * diff;
    }
    total += std::sqrt(sq);
  }
  return total;
}

double smoothness_score(const nn::EncoderParams& encoder, const ingest::TrafficSample& sample) {
  return smoothness_from_pooled(nn::encoder_forward(encoder, sample).pooled);
}

std::vector<std::vector<double>> extract_features(
    const nn::LstmParams& lstm, std::span<const ingest::TrafficSample* const> samples) {
  std::vector<std::vector<double>> out(samples.size());
  // lstm_forward wants equal lengths, so batch within each length.
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i = 0; i < samples.size(); ++i) by_length[samples[i]->tokens.size()].push_back(i);
  std::vector<const std::vector<std::uint16_t>*> batch;
  for (const auto& [length, members] : by_length) {
    for (std::size_t start = 0; start < members.size(); start += kFeatureBatch) {
      const std::size_t end = std::min(members.size(), start + kFeatureBatch);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(&samples[members[i]]->tokens);
      const auto h = nn::lstm_forward(lstm, batch, nullptr);
      for (std::size_t i = start; i < end; ++i) {
        const auto row = h.row(i - start);
        out[members[i]].assign(row.begin(), row.end());
      }
    }
  }
  return out;
}

RawScores raw_scores(const DetectorBundle& bundle, const ingest::TrafficSample& sample) {
  require_scoring_parts(bundle);
  return {residual_score(*bundle.subspace, nn::extract_feature(*bundle.lstm, sample)),
          smoothness_score(*bundle.encoder, sample)};
}

ScoreBreakdown score_from_raw(const HybridScoreConfig& config, const RawScores& raw) {
  auto b = hybrid_score(config, config.residual.normalize(raw.residual),
                        config.smoothness.normalize(raw.smoothness));
  b.residual_raw = raw.residual;
  b.smoothness_raw = raw.smoothness;
  return b;
}

ScoreBreakdown detect(const DetectorBundle& bundle, const ingest::TrafficSample& sample) {
  require_scoring_parts(bundle);
  if (!bundle.hybrid) throw Error(ErrorCode::kNotFitted, "detector is not calibrated");
  return score_from_raw(*bundle.hybrid, raw_scores(bundle, sample));
}

HybridScoreConfig calibrate_from_raw(std::span<const RawScores> id_validation,
                                     const CalibrationOptions& options) {
  if (!(options.alpha >= 0.0 && options.alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "alpha must lie in [0, 1]");
  }
  if (id_validation.size() < kMinCalibrationSamples) {
    throw Error(ErrorCode::kTooFewSamples,
                "calibration needs at least " + std::to_string(kMinCalibrationSamples) +
                    " ID validation samples, got " + std::to_string(id_validation.size()));
  }
  std::vector<double> s1, s2;
  for (const auto& r : id_validation) {
    s1.push_back(r.residual);
    s2.push_back(r.smoothness);
  }
  HybridScoreConfig c;
  c.alpha = options.alpha;
  c.delta = options.delta;
  c.residual = fit_bounds(s1, options.low_percentile, options.high_percentile);
  c.smoothness = fit_bounds(s2, options.low_percentile, options.high_percentile);
  return c;
}

HybridScoreConfig calibrate(const DetectorBundle& bundle,
                            std::span<const ingest::TrafficSample* const> id_validation,
                            const CalibrationOptions& options) {
  require_scoring_parts(bundle);
  if (id_validation.size() < kMinCalibrationSamples) {
    throw Error(ErrorCode::kTooFewSamples,
                "calibration needs at least " + std::to_string(kMinCalibrationSamples) +
                    " ID validation samples, got " + std::to_string(id_validation.size()));
  }
  const auto features = extract_features(*bundle.lstm, id_validation);
  std::vector<RawScores> raw;
  for (std::size_t i = 0; i < id_validation.size(); ++i) {
    raw.push_back({residual_score(*bundle.subspace, features[i]),
                   smoothness_score(*bundle.encoder, *id_validation[i])});
  }
  return calibrate_from_raw(raw, options);
}

DetectorBundle fit_detector(const ingest::Dataset& dataset, const DetectorFitOptions& options) {
  auto trained = nn::train_feature_extractor(dataset, options.lstm, options.train);
  const auto set = nn::collect_training_set(dataset);
  const auto features = extract_features(trained.lstm, set.samples);
  const auto stats = fit_statistics(features);

  DetectorBundle bundle;
  bundle.subspace = fit_subspace(features, stats, options.gamma);
  bundle.lstm = std::move(trained.lstm);
  bundle.metadata = {options.train.seed, options.train.epochs, std::move(trained.loss_curve)};
  return bundle;
}

void save_detector(const DetectorBundle& bundle, const std::filesystem::path& path) {
  if (!bundle.lstm || !bundle.subspace) {
    throw Error(ErrorCode::kNotFitted, "cannot save an unfitted detector");
  }
  const auto& s = *bundle.subspace;
  nn::Checkpoint ck;
  ck.component = nn::Component::kDetector;
  ck.metadata = bundle.metadata;
  ck.append(bundle.lstm->parameters());
  ck.extras["lstm"] = {{"hidden", bundle.lstm->hidden()}, {"input", bundle.lstm->input()}};
  const auto flat = s.eigenvectors.flat();
  ck.extras["subspace"] = {{"mu", s.mu},
                           {"sigma", s.sigma},
                           {"eigenvalues", s.eigenvalues},
                           {"eigenvectors", std::vector<double>(flat.begin(), flat.end())},
                           {"k", s.k},
                           {"gamma", s.gamma}};
  if (bundle.hybrid) {
    ck.extras["hybrid"] = {{"alpha", bundle.hybrid->alpha},
                           {"delta", bundle.hybrid->delta},
                           {"residual", bounds_json(bundle.hybrid->residual)},
                           {"smoothness", bounds_json(bundle.hybrid->smoothness)}};
  }
  nn::write_checkpoint(ck, path);
}

DetectorBundle load_detector(const std::filesystem::path& path) {
  const auto ck = nn::read_checkpoint(path);
  if (ck.component != nn::Component::kDetector) {
    throw Error(ErrorCode::kCorruptPayload, path.string() + " is not a detector checkpoint");
  }
  DetectorBundle bundle;
  bundle.metadata = ck.metadata;
  try {
    const auto& x = ck.extras;
    nn::LstmConfig cfg{x.at("lstm").at("hidden").get<std::size_t>(),
                       x.at("lstm").at("input").get<std::size_t>()};
    auto lstm = nn::LstmParams::zeros(cfg);
    ck.restore(lstm.parameters());
    bundle.lstm = std::move(lstm);

    const auto& s = x.at("subspace");
    FeatureStats stats{s.at("mu").get<std::vector<double>>(), s.at("sigma").get<std::vector<double>>()};
    SymmetricEigen eigen;
    eigen.values = s.at("eigenvalues").get<std::vector<double>>();
    const auto flat = s.at("eigenvectors").get<std::vector<double>>();
    const std::size_t m = eigen.values.size();
    if (flat.size() != m * m) throw Error(ErrorCode::kCorruptPayload, "eigenvector block has wrong size");
    eigen.vectors = Matrix(m, m);
    std::copy(flat.begin(), flat.end(), eigen.vectors.data());
    bundle.subspace = make_subspace(std::move(stats), std::move(eigen), s.at("k").get<std::size_t>(),
                                    s.at("gamma").get<double>());
    if (x.contains("hybrid")) {
      const auto& h = x.at("hybrid");
      HybridScoreConfig c;
      c.alpha = h.at("alpha").get<double>();
      c.delta = h.at("delta").get<double>();
      c.residual = bounds_from(h.at("residual"));
      c.smoothness = bounds_from(h.at("smoothness"));
      bundle.hybrid = c;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptPayload, std::string("bad detector checkpoint: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kDimensionMismatch) throw Error(ErrorCode::kCorruptPayload, e.what());
    throw;
  }
  return bundle;
}

}  // namespace taonet::ood
