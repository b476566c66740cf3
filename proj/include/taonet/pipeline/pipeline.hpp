// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "taonet/classifier/classifier.hpp"
#include "taonet/eval/metrics.hpp"
#include "taonet/ingest/dataset.hpp"
#include "taonet/llm/gateway.hpp"
#include "taonet/ood/detector.hpp"
#include "taonet/pipeline/config.hpp"
#include "taonet/pipeline/prediction.hpp"

namespace taonet::pipeline {

using Logger = std::function<void(const std::string&)>;

/// Optional injection points, mainly for tests.
struct PipelineHooks {
  Logger log;
  /// Used instead of the backend the config names.
  std::shared_ptr<llm::Backend> backend;
};

/// Loads the JSONL dataset or generates one from a synthetic spec, applying
/// the sequence-length override. Throws ingest errors, or
/// Error{kInvalidConfig} when a JSONL dataset's length differs from it.
ingest::Dataset load_run_dataset(const RunConfig& config);

/// Both stages, fitted. The detector's encoder is the classifier's.
struct TrainedComponents {
  ood::DetectorBundle detector;
  classifier::IdClassifier classifier;
};

/// Trains the feature extractor and subspace, then the ID classifier, and
/// attaches the classifier's encoder to the detector. No calibration.
TrainedComponents train_components(const ingest::Dataset& dataset, const RunConfig& config,
                                   const Logger& log = {});

/// Calibrates the hybrid score on the ID samples of the validation split.
void calibrate_components(TrainedComponents& components, const ingest::Dataset& dataset,
                          const RunConfig& config);

/// checkpoints/detector.ckpt and checkpoints/classifier.ckpt under `dir`.
void save_components(const TrainedComponents& components, const std::filesystem::path& dir);
TrainedComponents load_components(const std::filesystem::path& dir);

/// Backend named by the config. The mock oracle answers from every labeled
/// sample of `dataset`.
std::shared_ptr<llm::Backend> make_backend(const RunConfig& config, const ingest::Dataset& dataset);

/// Everything classify_one needs besides the sample.
struct ClassifyContext {
  const TrainedComponents* components = nullptr;
  const ingest::LabelSpace* space = nullptr;
  llm::Gateway* gateway = nullptr;  // may be null in all-id mode
  RoutingMode routing = RoutingMode::kAdaptive;
  sps::SpsMode sps_mode = sps::SpsMode::kStrict;
  sps::StrictSource strict_source = sps::StrictSource::kOod;
  const sps::TemplateSet* templates = nullptr;
};

/// Stage one, then the labeler the routing mode selects. The record's
/// route is always the detector's decision. In all-llm mode the prompt
/// carries a "detector_route" digest line, and Strict prompts list the
/// labels of the routed side. Throws Error{kNotFitted}, or backend errors
/// on the LLM path.
PredictionRecord classify_one(const ClassifyContext& context, const ingest::TrafficSample& sample,
                              const ingest::PacketRecord* record = nullptr);

/// Classifies every sample. Stage one and the ID branch run in order; LLM
/// requests fan out over `workers` threads (the gateway still caps them).
/// The result is sorted by sample id.
std::vector<PredictionRecord> classify_batch(const ClassifyContext& context,
                                             std::span<const ingest::TrafficSample* const> samples,
                                             std::size_t workers = 1);

/// One JSON object per line.
nlohmann::json prediction_to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const nlohmann::json& doc);
void write_predictions(std::span<const PredictionRecord> records, const std::filesystem::path& path);
/// Throws Error{kFileNotFound} or Error{kSchemaViolation}.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);

struct Evaluation {
  eval::MetricReport report;
  eval::ConfusionMatrix matrix;
};

/// Metrics over records that carry a gold label; the axis lists ID labels
/// then OOD labels of `space`.
Evaluation evaluate_predictions(std::span<const PredictionRecord> records,
                                const ingest::LabelSpace& space, std::uint64_t seed);

/// Labeling variant applied to shared trained components.
struct Variant {
  std::string name;
  RoutingMode routing = RoutingMode::kAdaptive;
  sps::SpsMode sps_mode = sps::SpsMode::kStrict;
};

struct VariantResult {
  Variant variant;
  std::filesystem::path dir;
  Evaluation evaluation;
  std::vector<PredictionRecord> predictions;
};

/// Classifies the test split under `variant` and writes prompts.jsonl,
/// predictions.jsonl, metrics.csv, confusion.csv and confusion.txt to `dir`.
VariantResult run_variant(const RunConfig& config, const ingest::Dataset& dataset,
                          const TrainedComponents& components, const Variant& variant,
                          const std::filesystem::path& dir, const PipelineHooks& hooks = {});

struct RunResult {
  std::filesystem::path run_dir;
  TrainedComponents components;
  std::vector<VariantResult> variants;
};

/// Validates, then trains, calibrates, classifies the test split and
/// evaluates under the configured routing and SPS mode. Writes config.json,
/// checkpoints/ and the variant files to run_directory(config). Component
/// errors are rethrown with the failing stage named.
RunResult run_pipeline(const RunConfig& config, const PipelineHooks& hooks = {});

/// Trains once and evaluates adaptive, all-id and all-llm routing, each in
/// its own subdirectory, plus ablation.csv.
RunResult run_ablation(const RunConfig& config, const PipelineHooks& hooks = {});

/// Trains once and evaluates adaptive routing under each SPS mode, plus
/// sps_comparison.csv.
RunResult run_sps_comparison(const RunConfig& config, const PipelineHooks& hooks = {});

/// Classifies and evaluates the given variants with existing components.
/// Writes config.json and `table_name` into `dir`.
std::vector<VariantResult> run_variants(const RunConfig& config, const ingest::Dataset& dataset,
                                        const TrainedComponents& components,
                                        std::span<const Variant> variants,
                                        const std::filesystem::path& dir,
                                        const std::string& table_name,
                                        const PipelineHooks& hooks = {});

/// variant,macro_precision,macro_f1,micro_f1,recall,accuracy
std::string comparison_csv(std::span<const VariantResult> results);

/// Rank-based AUROC of `scores` as a detector of the positive class, with
/// tied scores sharing their mid-rank. Throws Error{kSingleClassInput}
/// unless both classes occur, and Error{kLengthMismatch} on unequal sizes.
double auroc(std::span<const double> scores, const std::vector<bool>& positive);

/// AUROC of the hybrid score with OOD-labeled samples as positives; samples
/// without a label are skipped.
double detector_auroc(const ood::DetectorBundle& bundle,
                      std::span<const ingest::TrafficSample* const> samples,
                      const ingest::LabelSpace& space);

/// Runs the pipeline for seeds seed .. seed + runs - 1 and aggregates the
/// metric reports. Writes summary.csv to `<out_dir>/multi-<hash>-seed<seed>`.
std::vector<eval::MetricSummary> run_repeated(const RunConfig& config, std::size_t runs,
                                              const PipelineHooks& hooks = {});

}  // namespace taonet::pipeline
