// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "taonet/error.hpp"
#include "taonet/ingest/synthetic.hpp"
#include "taonet/llm/transport.hpp"

namespace taonet::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void say(const Logger& log, const std::string& msg) {
  if (log) log(msg);
}

// Re-raises component errors with the stage that failed.
template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(error_code_name(e.code())) + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    throw Error(e.code(), "stage " + stage + ": " + msg);
  }
}

bool needs_llm(RoutingMode routing, const ood::ScoreBreakdown& score) {
  return routing == RoutingMode::kAllLlm || (routing == RoutingMode::kAdaptive && score.is_ood);
}

PredictionRecord label_sample(const ClassifyContext& ctx, const ingest::TrafficSample& sample,
                              const ingest::PacketRecord* record, const ood::ScoreBreakdown& score) {
  const Route route = score.is_ood ? Route::kOod : Route::kId;
  PredictionRecord out;
  if (!needs_llm(ctx.routing, score)) {
    const auto& model = ctx.components->classifier;
    auto dist = classifier::predict_distribution(model, sample);
    const auto pred = classifier::argmax_label(dist, model.head->labels);
    out.sample_id = sample.id;
    out.labeler = Labeler::kIdClassifier;
    out.label = pred.label;
    out.confidence = pred.confidence;
    out.gold = sample.label;
    out.distribution = std::move(dist);
  } else {
    if (!ctx.gateway) throw Error(ErrorCode::kInvalidConfig, "the LLM route needs a gateway");
    llm::OodLabelingOptions opt;
    opt.mode = ctx.sps_mode;
    opt.strict_source = ctx.strict_source;
    opt.templates = ctx.templates;
    if (ctx.routing == RoutingMode::kAllLlm) {
      opt.digest_extra.emplace_back("detector_route", route_name(route));
      opt.strict_source = route == Route::kId ? sps::StrictSource::kId : sps::StrictSource::kOod;
    }
    out = llm::classify_ood(*ctx.gateway, sample, record, *ctx.space, opt);
  }
  out.route = route;
  out.score = score;
  return out;
}

void require_context(const ClassifyContext& ctx) {
  if (!ctx.components || !ctx.space) {
    throw Error(ErrorCode::kNotFitted, "classification needs trained components and a label space");
  }
}

sps::TemplateSet load_templates(const RunConfig& config) {
  sps::TemplateSet set;
  if (config.sps.template_dir.empty()) return set;
  bool any = false;
  for (auto mode : sps::kAllModes) {
    const auto path = fs::path(config.sps.template_dir) / (sps::mode_name(mode) + ".txt");
    if (fs::exists(path)) {
      set.set(sps::load_template(mode, path));
      any = true;
    }
  }
  if (!any) {
    throw Error(ErrorCode::kFileNotFound, "no templates in " + config.sps.template_dir);
  }
  return set;
}

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Prepared {
  ingest::Dataset dataset;
  TrainedComponents components;
};

Prepared prepare(const RunConfig& config, const fs::path& dir, const PipelineHooks& hooks) {
  validate(config);
  fs::create_directories(dir / "checkpoints");
  eval::write_text_file(dir / "config.json", to_json(config).dump(2) + "\n");
  say(hooks.log, "run directory " + dir.string());

  Prepared p;
  p.dataset = in_stage("load-dataset", [&] { return load_run_dataset(config); });
  say(hooks.log, "dataset: " + std::to_string(p.dataset.samples.size()) + " samples");
  p.components = train_components(p.dataset, config, hooks.log);
  in_stage("calibrate", [&] { calibrate_components(p.components, p.dataset, config); });
  in_stage("save-checkpoints", [&] { save_components(p.components, dir); });
  return p;
}

}  // namespace

ingest::Dataset load_run_dataset(const RunConfig& config) {
  const fs::path path = config.data.path;
  if (path.extension() == ".jsonl") {
    auto dataset = ingest::load_dataset(path);
    if (config.sequence_length != 0) {
      for (const auto& s : dataset.samples) {
        if (s.tokens.size() != config.sequence_length) {
          throw Error(ErrorCode::kInvalidConfig,
                      "sample " + s.id + " has " + std::to_string(s.tokens.size()) +
                          " tokens but sequence_length is " + std::to_string(config.sequence_length));
        }
      }
    }
    return dataset;
  }
  auto spec = ingest::load_synthetic_spec(path);
  if (config.sequence_length != 0) spec.sequence_length = config.sequence_length;
  return ingest::generate_synthetic(spec, config.data.samples_per_class, config.data.seed);
}

TrainedComponents train_components(const ingest::Dataset& dataset, const RunConfig& config,
                                   const Logger& log) {
  if (dataset.samples.empty()) throw Error(ErrorCode::kEmptyTrainingSet, "dataset is empty");
  TrainedComponents out;

  ood::DetectorFitOptions dopt;
  dopt.lstm = {config.detector.hidden, config.detector.input};
  dopt.gamma = config.detector.gamma;
  dopt.train = nn::detector_train_defaults();
  dopt.train.epochs = config.detector.epochs;
  dopt.train.learning_rate = config.detector.learning_rate;
  dopt.train.batch_size = config.detector.batch_size;
  dopt.train.seed = config.seed;
  dopt.train.on_epoch = [&](std::size_t epoch, double loss) {
    say(log, "detector epoch " + std::to_string(epoch + 1) + " loss " + fixed6(loss));
  };
  out.detector = in_stage("train-detector", [&] { return ood::fit_detector(dataset, dopt); });
  say(log, "residual subspace dimension " + std::to_string(out.detector.subspace->k));

  classifier::ClassifierFitOptions copt;
  copt.encoder = {config.classifier.dim, config.classifier.layers, config.classifier.heads,
                  config.classifier.ffn_dim, dataset.samples.front().tokens.size()};
  copt.train = nn::classifier_train_defaults();
  copt.train.epochs = config.classifier.epochs;
  copt.train.learning_rate = config.classifier.learning_rate;
  copt.train.weight_decay = config.classifier.weight_decay;
  copt.train.batch_size = config.classifier.batch_size;
  copt.train.seed = config.seed;
  copt.train.on_epoch = [&](std::size_t epoch, double loss) {
    say(log, "classifier epoch " + std::to_string(epoch + 1) + " loss " + fixed6(loss));
  };
  out.classifier = in_stage("train-classifier", [&] { return classifier::fit_classifier(dataset, copt); });
  out.detector.encoder = out.classifier.encoder;
  return out;
}

void calibrate_components(TrainedComponents& components, const ingest::Dataset& dataset,
                          const RunConfig& config) {
  std::vector<const ingest::TrafficSample*> id_valid;
  for (const auto* s : dataset.in_split(ingest::Split::kValid)) {
    if (s->label && dataset.label_space.is_id(*s->label)) id_valid.push_back(s);
  }
  const ood::CalibrationOptions opt{config.hybrid.alpha, config.hybrid.delta,
                                    config.hybrid.low_percentile, config.hybrid.high_percentile};
  components.detector.encoder = components.classifier.encoder;
  components.detector.hybrid = ood::calibrate(components.detector, id_valid, opt);
}

void save_components(const TrainedComponents& components, const fs::path& dir) {
  fs::create_directories(dir / "checkpoints");
  ood::save_detector(components.detector, dir / "checkpoints" / "detector.ckpt");
  classifier::save_classifier(components.classifier, dir / "checkpoints" / "classifier.ckpt");
}

TrainedComponents load_components(const fs::path& dir) {
  TrainedComponents out;
  out.detector = ood::load_detector(dir / "checkpoints" / "detector.ckpt");
  out.classifier = classifier::load_classifier(dir / "checkpoints" / "classifier.ckpt");
  out.detector.encoder = out.classifier.encoder;
  return out;
}

std::shared_ptr<llm::Backend> make_backend(const RunConfig& config, const ingest::Dataset& dataset) {
  switch (config.llm.backend) {
    case llm::BackendKind::kRemote: {
      auto rc = llm::RemoteConfig::from_env();
      if (!config.llm.base_url.empty()) rc.base_url = config.llm.base_url;
      if (!config.llm.model.empty()) rc.model = config.llm.model;
      return std::make_shared<llm::RemoteBackend>(rc, std::make_shared<llm::HttpTransport>());
    }
    case llm::BackendKind::kMockKeyword:
      return std::make_shared<llm::MockKeywordBackend>(
          llm::MockKeywordBackend::from_file(config.llm.keyword_rules));
    case llm::BackendKind::kMockOracle: {
      std::map<std::string, std::string> gold;
      for (const auto& s : dataset.samples) {
        if (s.label) gold[s.id] = *s.label;
      }
      return std::make_shared<llm::MockOracleBackend>(std::move(gold));
    }
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown backend");
}

PredictionRecord classify_one(const ClassifyContext& context, const ingest::TrafficSample& sample,
                              const ingest::PacketRecord* record) {
  require_context(context);
  const auto score = ood::detect(context.components->detector, sample);
  return label_sample(context, sample, record, score);
}

std::vector<PredictionRecord> classify_batch(const ClassifyContext& context,
                                             std::span<const ingest::TrafficSample* const> samples,
                                             std::size_t workers) {
  require_context(context);
  std::vector<PredictionRecord> out(samples.size());
  std::vector<std::size_t> llm_jobs;
  std::vector<ood::ScoreBreakdown> scores(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    scores[i] = ood::detect(context.components->detector, *samples[i]);
    if (needs_llm(context.routing, scores[i])) {
      llm_jobs.push_back(i);
    } else {
      out[i] = label_sample(context, *samples[i], nullptr, scores[i]);
    }
  }

  const std::size_t n_threads = std::min(std::max<std::size_t>(workers, 1), llm_jobs.size());
  if (n_threads <= 1) {
    for (auto i : llm_jobs) out[i] = label_sample(context, *samples[i], nullptr, scores[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t j = next++; j < llm_jobs.size() && !failed; j = next++) {
          const auto i = llm_jobs[j];
          try {
            out[i] = label_sample(context, *samples[i], nullptr, scores[i]);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!first_error) first_error = std::current_exception();
            failed = true;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const PredictionRecord& a, const PredictionRecord& b) { return a.sample_id < b.sample_id; });
  return out;
}

nlohmann::json prediction_to_json(const PredictionRecord& r) {
  json j = {{"sample_id", r.sample_id},
            {"route", route_name(r.route)},
            {"labeler", labeler_name(r.labeler)},
            {"label", r.label},
            {"confidence", r.confidence},
            {"gold", r.gold ? json(*r.gold) : json(nullptr)},
            {"distribution", r.distribution},
            {"raw_text", r.raw_text ? json(*r.raw_text) : json(nullptr)},
            {"prompt_sha256", r.prompt_sha256 ? json(*r.prompt_sha256) : json(nullptr)},
            {"score", nullptr}};
  if (r.score) {
    const auto& s = *r.score;
    j["score"] = {{"residual_raw", s.residual_raw},       {"smoothness_raw", s.smoothness_raw},
                  {"residual_norm", s.residual_norm},     {"smoothness_norm", s.smoothness_norm},
                  {"hybrid", s.hybrid},                   {"is_ood", s.is_ood}};
  }
  return j;
}

PredictionRecord prediction_from_json(const nlohmann::json& j) {
  PredictionRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    const auto route = j.at("route").get<std::string>();
    if (route != "ID" && route != "OOD") throw Error(ErrorCode::kSchemaViolation, "bad route " + route);
    r.route = route == "ID" ? Route::kId : Route::kOod;
    const auto labeler = j.at("labeler").get<std::string>();
    if (labeler != "id-classifier" && labeler != "llm") {
      throw Error(ErrorCode::kSchemaViolation, "bad labeler " + labeler);
    }
    r.labeler = labeler == "llm" ? Labeler::kLlm : Labeler::kIdClassifier;
    r.label = j.at("label").get<std::string>();
    r.confidence = j.at("confidence").get<double>();
    if (j.contains("gold") && !j["gold"].is_null()) r.gold = j["gold"].get<std::string>();
    if (j.contains("distribution")) r.distribution = j["distribution"].get<std::vector<double>>();
    if (j.contains("raw_text") && !j["raw_text"].is_null()) r.raw_text = j["raw_text"].get<std::string>();
    if (j.contains("prompt_sha256") && !j["prompt_sha256"].is_null()) {
      r.prompt_sha256 = j["prompt_sha256"].get<std::string>();
    }
    if (j.contains("score") && !j["score"].is_null()) {
      const auto& s = j["score"];
      r.score = ood::ScoreBreakdown{s.at("residual_raw").get<double>(), s.at("smoothness_raw").get<double>(),
                                    s.at("residual_norm").get<double>(), s.at("smoothness_norm").get<double>(),
                                    s.at("hybrid").get<double>(), s.at("is_ood").get<bool>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kSchemaViolation, std::string("prediction record: ") + e.what());
  }
  return r;
}

void write_predictions(std::span<const PredictionRecord> records, const fs::path& path) {
  std::string text;
  for (const auto& r : records) text += prediction_to_json(r).dump() + "\n";
  eval::write_text_file(path, text);
}

std::vector<PredictionRecord> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(prediction_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchemaViolation, path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kSchemaViolation, path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Evaluation evaluate_predictions(std::span<const PredictionRecord> records,
                                const ingest::LabelSpace& space, std::uint64_t seed) {
  std::vector<std::string> gold, pred;
  for (const auto& r : records) {
    if (!r.gold) continue;
    gold.push_back(*r.gold);
    pred.push_back(r.label);
  }
  if (gold.empty()) throw Error(ErrorCode::kEmptyMatrix, "no labeled predictions to evaluate");
  std::vector<std::string> order = space.id_labels;
  order.insert(order.end(), space.ood_labels.begin(), space.ood_labels.end());
  Evaluation e;
  e.matrix = eval::confusion(gold, pred, order);
  e.report = eval::compute_metrics(e.matrix);
  e.report.seed = seed;
  return e;
}

VariantResult run_variant(const RunConfig& config, const ingest::Dataset& dataset,
                          const TrainedComponents& components, const Variant& variant,
                          const fs::path& dir, const PipelineHooks& hooks) {
  fs::create_directories(dir);
  const auto templates = in_stage("load-templates", [&] { return load_templates(config); });
  auto backend = hooks.backend ? hooks.backend : in_stage("backend", [&] { return make_backend(config, dataset); });
  auto audit = std::make_shared<llm::AuditLog>(dir / "prompts.jsonl");
  llm::Gateway gateway(backend,
                       {config.llm.max_in_flight, config.llm.temperature, config.llm.top_p, config.llm.max_tokens},
                       audit);

  ClassifyContext ctx;
  ctx.components = &components;
  ctx.space = &dataset.label_space;
  ctx.gateway = &gateway;
  ctx.routing = variant.routing;
  ctx.sps_mode = variant.sps_mode;
  ctx.strict_source = config.sps.strict_source;
  ctx.templates = &templates;

  // Mock backends answer instantly; one worker keeps the audit log in order.
  const std::size_t workers = backend->kind() == llm::BackendKind::kRemote ? config.llm.max_in_flight : 1;
  const auto test = dataset.in_split(ingest::Split::kTest);
  say(hooks.log, "classifying " + std::to_string(test.size()) + " test samples (" +
                     routing_mode_name(variant.routing) + ", " + sps::mode_name(variant.sps_mode) + ")");

  VariantResult out;
  out.variant = variant;
  out.dir = dir;
  out.predictions = in_stage("classify", [&] { return classify_batch(ctx, test, workers); });
  write_predictions(out.predictions, dir / "predictions.jsonl");
  out.evaluation = in_stage("evaluate", [&] {
    auto e = evaluate_predictions(out.predictions, dataset.label_space, config.seed);
    eval::emit_report(e.report, e.matrix, dir);
    return e;
  });
  say(hooks.log, "macro F1 " + fixed6(out.evaluation.report.macro_f1));
  return out;
}

std::string comparison_csv(std::span<const VariantResult> results) {
  std::ostringstream out;
  out << "variant,macro_precision,macro_f1,micro_f1,recall,accuracy\n";
  for (const auto& r : results) {
    const auto& m = r.evaluation.report;
    out << r.variant.name << ',' << fixed6(m.macro_precision) << ',' << fixed6(m.macro_f1) << ','
        << fixed6(m.micro_f1) << ',' << fixed6(m.macro_recall) << ',' << fixed6(m.accuracy) << '\n';
  }
  return out.str();
}

std::vector<VariantResult> run_variants(const RunConfig& config, const ingest::Dataset& dataset,
                                        const TrainedComponents& components,
                                        std::span<const Variant> variants, const fs::path& dir,
                                        const std::string& table_name, const PipelineHooks& hooks) {
  fs::create_directories(dir);
  eval::write_text_file(dir / "config.json", to_json(config).dump(2) + "\n");
  std::vector<VariantResult> out;
  for (const auto& v : variants) {
    out.push_back(run_variant(config, dataset, components, v, dir / v.name, hooks));
  }
  eval::write_text_file(dir / table_name, comparison_csv(out));
  return out;
}

RunResult run_pipeline(const RunConfig& config, const PipelineHooks& hooks) {
  validate(config);
  RunResult result;
  result.run_dir = run_directory(config, "run");
  auto p = prepare(config, result.run_dir, hooks);
  const Variant v{routing_mode_name(config.routing), config.routing, config.sps.mode};
  result.variants.push_back(run_variant(config, p.dataset, p.components, v, result.run_dir, hooks));
  result.components = std::move(p.components);
  return result;
}

RunResult run_ablation(const RunConfig& config, const PipelineHooks& hooks) {
  validate(config);
  auto keyed = config;
  keyed.routing = RoutingMode::kAdaptive;
  RunResult result;
  result.run_dir = run_directory(keyed, "ablate");
  auto p = prepare(config, result.run_dir, hooks);
  const std::vector<Variant> variants = {
      {routing_mode_name(RoutingMode::kAdaptive), RoutingMode::kAdaptive, config.sps.mode},
      {routing_mode_name(RoutingMode::kAllId), RoutingMode::kAllId, config.sps.mode},
      {routing_mode_name(RoutingMode::kAllLlm), RoutingMode::kAllLlm, config.sps.mode}};
  result.variants = run_variants(config, p.dataset, p.components, variants, result.run_dir, "ablation.csv", hooks);
  result.components = std::move(p.components);
  return result;
}

RunResult run_sps_comparison(const RunConfig& config, const PipelineHooks& hooks) {
  validate(config);
  auto keyed = config;
  keyed.sps.mode = sps::SpsMode::kStrict;
  RunResult result;
  result.run_dir = run_directory(keyed, "sps");
  auto p = prepare(config, result.run_dir, hooks);
  std::vector<Variant> variants;
  for (auto mode : sps::kAllModes) variants.push_back({sps::mode_name(mode), config.routing, mode});
  result.variants =
      run_variants(config, p.dataset, p.components, variants, result.run_dir, "sps_comparison.csv", hooks);
  result.components = std::move(p.components);
  return result;
}

double auroc(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) {
    throw Error(ErrorCode::kLengthMismatch, "scores and flags differ in length");
  }
  const auto n_pos = static_cast<double>(std::count(positive.begin(), positive.end(), true));
  const double n_neg = static_cast<double>(positive.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw Error(ErrorCode::kSingleClassInput, "AUROC needs both positive and negative samples");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;  // 1-based
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) rank_sum += mid;
    }
    i = j;
  }
  return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg);
}

double detector_auroc(const ood::DetectorBundle& bundle,
                      std::span<const ingest::TrafficSample* const> samples,
                      const ingest::LabelSpace& space) {
  std::vector<double> scores;
  std::vector<bool> positive;
  for (const auto* s : samples) {
    if (!s->label) continue;
    scores.push_back(ood::detect(bundle, *s).hybrid);
    positive.push_back(space.is_ood(*s->label));
  }
  return auroc(scores, positive);
}

std::vector<eval::MetricSummary> run_repeated(const RunConfig& config, std::size_t runs,
                                              const PipelineHooks& hooks) {
  validate(config);
  if (runs == 0) throw Error(ErrorCode::kInvalidConfig, "need at least one run");
  std::vector<eval::MetricReport> reports;
  std::ostringstream per_run;
  per_run << "seed,macro_precision,macro_f1,micro_f1,recall,accuracy\n";
  for (std::size_t r = 0; r < runs; ++r) {
    auto c = config;
    c.seed = config.seed + r;
    say(hooks.log, "run " + std::to_string(r + 1) + " of " + std::to_string(runs) + ", seed " +
                       std::to_string(c.seed));
    const auto result = run_pipeline(c, hooks);
    const auto& m = result.variants.front().evaluation.report;
    reports.push_back(m);
    per_run << c.seed << ',' << fixed6(m.macro_precision) << ',' << fixed6(m.macro_f1) << ','
            << fixed6(m.micro_f1) << ',' << fixed6(m.macro_recall) << ',' << fixed6(m.accuracy) << '\n';
  }
  const auto summary = eval::aggregate_runs(reports);
  const auto dir = run_directory(config, "multi");
  fs::create_directories(dir);
  eval::write_text_file(dir / "runs.csv", per_run.str());
  eval::write_text_file(dir / "summary.csv", eval::summary_csv(summary));
  return summary;
}

}  // namespace taonet::pipeline
