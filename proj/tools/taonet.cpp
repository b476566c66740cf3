// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

// taonet command-line interface.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "taonet/error.hpp"
#include "taonet/eval/metrics.hpp"
#include "taonet/ingest/pcap.hpp"
#include "taonet/ingest/synthetic.hpp"
#include "taonet/ingest/tokenize.hpp"
#include "taonet/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using namespace taonet;

namespace {

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> routing_mode;
  std::optional<std::string> sps_mode;
  std::optional<std::string> backend;
  std::optional<std::string> data;
  bool print_config = false;
  bool quiet = false;
};

pipeline::RunConfig effective_config(const Globals& g) {
  auto c = g.config_path.empty() ? pipeline::RunConfig{} : pipeline::load_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (g.out_dir) c.out_dir = *g.out_dir;
  if (g.data) c.data.path = *g.data;
  if (g.routing_mode) c.routing = *pipeline::parse_routing_mode(*g.routing_mode);
  if (g.sps_mode) c.sps.mode = *sps::parse_mode(*g.sps_mode);
  if (g.backend) c.llm.backend = *llm::parse_backend_kind(*g.backend);
  return c;
}

pipeline::Logger make_logger(const Globals& g) {
  if (g.quiet) return {};
  return [](const std::string& msg) { std::cerr << "[taonet] " << msg << '\n'; };
}

pipeline::PipelineHooks hooks_for(const Globals& g) { return {make_logger(g), nullptr}; }

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void print_report(const eval::MetricReport& r) {
  std::cout << "macro_precision " << fixed6(r.macro_precision) << '\n'
            << "macro_f1        " << fixed6(r.macro_f1) << '\n'
            << "micro_f1        " << fixed6(r.micro_f1) << '\n'
            << "recall          " << fixed6(r.macro_recall) << '\n'
            << "accuracy        " << fixed6(r.accuracy) << '\n';
}

fs::path require_components(const pipeline::RunConfig& c) {
  const auto dir = pipeline::run_directory(c);
  if (!fs::exists(dir / "checkpoints" / "detector.ckpt") ||
      !fs::exists(dir / "checkpoints" / "classifier.ckpt")) {
    throw Error(ErrorCode::kFileNotFound,
                "no checkpoints in " + dir.string() + "; run `taonet train` with the same config first");
  }
  return dir;
}

int cmd_gen_synthetic(const std::string& spec_path, std::size_t per_class, std::uint64_t seed,
                      const std::string& output) {
  const auto spec = ingest::load_synthetic_spec(spec_path);
  const auto dataset = ingest::generate_synthetic(spec, per_class, seed);
  ingest::write_dataset(dataset, output);
  for (auto split : {ingest::Split::kTrain, ingest::Split::kValid, ingest::Split::kTest}) {
    std::cout << ingest::split_name(split) << ' ' << dataset.in_split(split).size() << '\n';
  }
  std::cout << "wrote " << dataset.samples.size() << " samples to " << output << '\n';
  return 0;
}

std::vector<double> parse_ratios(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    try {
      out.push_back(std::stod(part));
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidConfig, "bad split ratio '" + part + "'");
    }
  }
  if (out.size() != 3) throw Error(ErrorCode::kInvalidConfig, "--split needs three ratios");
  return out;
}

int cmd_ingest_pcap(const std::vector<std::string>& captures, const std::vector<std::string>& ood,
                    std::size_t length, std::optional<std::size_t> limit, const std::string& split,
                    std::uint64_t seed, const std::string& output) {
  ingest::Dataset dataset;
  for (const auto& spec : captures) {
    const auto eq = spec.rfind('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw Error(ErrorCode::kInvalidConfig, "--capture expects PATH=LABEL, got '" + spec + "'");
    }
    const fs::path path = spec.substr(0, eq);
    const std::string label = spec.substr(eq + 1);
    const auto read = ingest::parse_pcap(path, limit);
    std::size_t n = 0;
    for (const auto& record : read.records) {
      dataset.samples.push_back(ingest::tokenize_packet(
          record, length, path.stem().string() + "-" + std::to_string(n++), label));
      dataset.samples.back().origin = ingest::Origin::kPcap;
    }
    std::cout << path.string() << ": " << read.records.size() << " packets as " << label << ", "
              << read.skipped << " skipped\n";
    auto& space = dataset.label_space;
    const bool is_ood = std::find(ood.begin(), ood.end(), label) != ood.end();
    auto& bucket = is_ood ? space.ood_labels : space.id_labels;
    if (std::find(bucket.begin(), bucket.end(), label) == bucket.end()) bucket.push_back(label);
  }
  const auto r = parse_ratios(split);
  dataset = ingest::split_dataset(std::move(dataset), {r[0], r[1], r[2]}, seed);
  ingest::write_dataset(dataset, output);
  std::cout << "wrote " << dataset.samples.size() << " samples to " << output << '\n';
  return 0;
}

int cmd_train(const Globals& g) {
  const auto c = effective_config(g);
  pipeline::validate(c);
  const auto dir = pipeline::run_directory(c);
  fs::create_directories(dir);
  eval::write_text_file(dir / "config.json", pipeline::to_json(c).dump(2) + "\n");
  const auto dataset = pipeline::load_run_dataset(c);
  const auto components = pipeline::train_components(dataset, c, make_logger(g));
  pipeline::save_components(components, dir);
  std::cout << dir.string() << '\n';
  return 0;
}

int cmd_calibrate(const Globals& g) {
  const auto c = effective_config(g);
  pipeline::validate(c);
  const auto dir = require_components(c);
  auto components = pipeline::load_components(dir);
  const auto dataset = pipeline::load_run_dataset(c);
  pipeline::calibrate_components(components, dataset, c);
  pipeline::save_components(components, dir);
  const auto& h = *components.detector.hybrid;
  std::cout << "residual bounds   [" << h.residual.low << ", " << h.residual.high << "]\n"
            << "smoothness bounds [" << h.smoothness.low << ", " << h.smoothness.high << "]\n"
            << "alpha " << h.alpha << " delta " << h.delta << '\n';
  return 0;
}

int cmd_classify(const Globals& g) {
  const auto c = effective_config(g);
  pipeline::validate(c);
  const auto dir = require_components(c);
  const auto components = pipeline::load_components(dir);
  if (!components.detector.hybrid) {
    throw Error(ErrorCode::kNotFitted, "detector is not calibrated; run `taonet calibrate` first");
  }
  const auto dataset = pipeline::load_run_dataset(c);
  const pipeline::Variant v{pipeline::routing_mode_name(c.routing), c.routing, c.sps.mode};
  const auto result = pipeline::run_variant(c, dataset, components, v, dir, hooks_for(g));
  std::cout << (dir / "predictions.jsonl").string() << '\n';
  print_report(result.evaluation.report);
  return 0;
}

int cmd_evaluate(const Globals& g, const std::string& predictions) {
  const auto c = effective_config(g);
  const fs::path path = predictions.empty() ? pipeline::run_directory(c) / "predictions.jsonl" : fs::path(predictions);
  const auto records = pipeline::read_predictions(path);
  const auto dataset = pipeline::load_run_dataset(c);
  const auto e = pipeline::evaluate_predictions(records, dataset.label_space, c.seed);
  const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  eval::emit_report(e.report, e.matrix, dir);
  print_report(e.report);
  std::cout << '\n' << eval::confusion_text(e.matrix);
  return 0;
}

int cmd_auroc(const Globals& g, const std::string& split_name) {
  const auto c = effective_config(g);
  const auto dir = require_components(c);
  const auto components = pipeline::load_components(dir);
  const auto dataset = pipeline::load_run_dataset(c);
  const auto split = ingest::parse_split(split_name);
  if (!split) throw Error(ErrorCode::kInvalidConfig, "unknown split " + split_name);
  const auto samples = dataset.in_split(*split);
  std::cout << "auroc " << fixed6(pipeline::detector_auroc(components.detector, samples, dataset.label_space))
            << '\n';
  return 0;
}

int cmd_ablate(const Globals& g) {
  const auto result = pipeline::run_ablation(effective_config(g), hooks_for(g));
  std::cout << result.run_dir.string() << '\n' << pipeline::comparison_csv(result.variants);
  return 0;
}

int cmd_sps_compare(const Globals& g) {
  const auto result = pipeline::run_sps_comparison(effective_config(g), hooks_for(g));
  std::cout << result.run_dir.string() << '\n' << pipeline::comparison_csv(result.variants);
  return 0;
}

int cmd_run(const Globals& g, std::size_t runs) {
  const auto c = effective_config(g);
  if (runs > 1) {
    const auto summary = pipeline::run_repeated(c, runs, hooks_for(g));
    std::cout << pipeline::run_directory(c, "multi").string() << '\n' << eval::summary_csv(summary);
    return 0;
  }
  const auto result = pipeline::run_pipeline(c, hooks_for(g));
  std::cout << result.run_dir.string() << '\n';
  print_report(result.variants.front().evaluation.report);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"taonet: two-stage encrypted traffic classification with OOD routing"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  Globals g;
  app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Training seed");
  app.add_option("--out-dir", g.out_dir, "Root directory for run outputs");
  app.add_option("--data", g.data, "Dataset (.jsonl) or synthetic spec (.json)");
  app.add_option("--routing-mode", g.routing_mode, "adaptive | all-id | all-llm")
      ->check(CLI::IsMember({"adaptive", "all-id", "all-llm"}));
  app.add_option("--sps-mode", g.sps_mode, "strict | complete | extended")
      ->check(CLI::IsMember({"strict", "complete", "extended"}));
  app.add_option("--backend", g.backend, "remote | mock-keyword | mock-oracle")
      ->check(CLI::IsMember({"remote", "mock-keyword", "mock-oracle"}));
  app.add_flag("--print-config", g.print_config, "Print the effective configuration and exit");
  app.add_flag("--quiet", g.quiet, "No progress messages");

  std::string spec_path, gen_output;
  std::size_t per_class = 500;
  std::uint64_t data_seed = 42;
  auto* gen = app.add_subcommand("gen-synthetic", "Generate a JSONL dataset from a synthetic spec");
  gen->add_option("--spec", spec_path, "Synthetic spec JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--per-class", per_class, "Samples per class")->capture_default_str();
  gen->add_option("--data-seed", data_seed, "Generation seed")->capture_default_str();
  gen->add_option("--output", gen_output, "Output JSONL")->required();

  std::vector<std::string> captures, ood_labels;
  std::size_t length = ingest::kDefaultSequenceLength;
  std::optional<std::size_t> limit;
  std::string split_ratios = "0.8,0.1,0.1", ingest_output;
  std::uint64_t split_seed = 42;
  auto* ing = app.add_subcommand("ingest-pcap", "Tokenize labeled pcap captures into a JSONL dataset");
  ing->add_option("--capture", captures, "PATH=LABEL, repeatable")->required();
  ing->add_option("--ood", ood_labels, "Label to treat as out-of-distribution, repeatable");
  ing->add_option("--length", length, "Tokens per sample")->capture_default_str();
  ing->add_option("--limit", limit, "Packets read per capture");
  ing->add_option("--split", split_ratios, "train,valid,test ratios")->capture_default_str();
  ing->add_option("--split-seed", split_seed, "Split seed")->capture_default_str();
  ing->add_option("--output", ingest_output, "Output JSONL")->required();

  auto* train = app.add_subcommand("train", "Train the detector and ID classifier");
  auto* calibrate = app.add_subcommand("calibrate", "Calibrate the hybrid score on ID validation data");
  auto* classify = app.add_subcommand("classify", "Classify the test split");
  std::string predictions;
  auto* evaluate = app.add_subcommand("evaluate", "Recompute metrics from predictions.jsonl");
  evaluate->add_option("--predictions", predictions, "Prediction log (default: the run's)");
  auto* ablate = app.add_subcommand("ablate", "Train once, evaluate adaptive, all-id and all-llm routing");
  std::string auroc_split = "test";
  auto* auroc = app.add_subcommand("auroc", "Detector AUROC with OOD labels as positives");
  auroc->add_option("--split", auroc_split, "valid | test")->capture_default_str();
  std::size_t runs = 1;
  auto* run = app.add_subcommand("run", "Full pipeline: train, calibrate, classify, evaluate");
  run->add_option("--runs", runs, "Repeat with seeds seed, seed+1, ... and aggregate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  auto* sps_compare = app.add_subcommand("sps-compare", "Evaluate all three prompt modes on one training");

  CLI11_PARSE(app, argc, argv);

  try {
    if (g.print_config) {
      const auto c = effective_config(g);
      std::cout << pipeline::render_config(c);
      for (const auto& e : pipeline::validation_errors(c)) std::cout << "# invalid: " << e << '\n';
      return 0;
    }
    if (gen->parsed()) return cmd_gen_synthetic(spec_path, per_class, data_seed, gen_output);
    if (ing->parsed()) {
      return cmd_ingest_pcap(captures, ood_labels, length, limit, split_ratios, split_seed, ingest_output);
    }
    if (train->parsed()) return cmd_train(g);
    if (calibrate->parsed()) return cmd_calibrate(g);
    if (classify->parsed()) return cmd_classify(g);
    if (evaluate->parsed()) return cmd_evaluate(g, predictions);
    if (ablate->parsed()) return cmd_ablate(g);
    if (auroc->parsed()) return cmd_auroc(g, auroc_split);
    if (run->parsed()) return cmd_run(g, runs);
    if (sps_compare->parsed()) return cmd_sps_compare(g);
    std::cout << app.help();
    return 0;
  } catch (const Error& e) {
    std::cerr << "taonet: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "taonet: " << e.what() << '\n';
    return 1;
  }
}
