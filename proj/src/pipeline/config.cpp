// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/pipeline/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "taonet/error.hpp"

namespace taonet::pipeline {
namespace {

using nlohmann::json;

// Keys whose defaults restate the method's published settings.
const std::set<std::string> kPublished = {
    "seed",
    "hybrid.alpha",
    "hybrid.delta",
    "detector.epochs",
    "detector.learning_rate",
    "classifier.epochs",
    "classifier.learning_rate",
    "llm.temperature",
    "llm.top_p",
};

bool compatible(const json& want, const json& got) {
  if (want.is_object()) return got.is_object();
  if (want.is_string()) return got.is_string();
  if (want.is_boolean()) return got.is_boolean();
  if (want.is_number_unsigned()) return got.is_number_unsigned();
  if (want.is_number_integer()) return got.is_number_integer();
  if (want.is_number()) return got.is_number();
  return false;
}

// Overlays `doc` onto the default tree, refusing keys the tree lacks.
void overlay(json& base, const json& doc, const std::string& prefix) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, (prefix.empty() ? "config" : prefix) + " must be an object");
  }
  for (const auto& [key, value] : doc.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!base.contains(key)) throw Error(ErrorCode::kInvalidConfig, "unknown key " + path);
    auto& slot = base[key];
    if (!compatible(slot, value)) {
      throw Error(ErrorCode::kInvalidConfig, path + " has the wrong type (expected " +
                                                 std::string(slot.type_name()) + ")");
    }
    if (slot.is_object()) {
      overlay(slot, value, path);
    } else {
      slot = value;
    }
  }
}

void flatten(const json& node, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (const auto& [key, value] : node.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten(value, path, out);
    } else {
      out.emplace_back(path, value);
    }
  }
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

std::string routing_mode_name(RoutingMode mode) {
  switch (mode) {
    case RoutingMode::kAdaptive: return "adaptive";
    case RoutingMode::kAllId: return "all-id";
    case RoutingMode::kAllLlm: return "all-llm";
  }
  return "adaptive";
}

std::optional<RoutingMode> parse_routing_mode(std::string_view name) {
  for (auto m : {RoutingMode::kAdaptive, RoutingMode::kAllId, RoutingMode::kAllLlm}) {
    if (routing_mode_name(m) == name) return m;
  }
  return std::nullopt;
}

std::vector<std::string> validation_errors(const RunConfig& c) {
  std::vector<std::string> e;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) e.push_back(msg);
  };
  need(!c.data.path.empty(), "data.path is empty");
  need(c.data.samples_per_class >= 1, "data.samples_per_class must be >= 1");

  const auto& d = c.detector;
  need(d.hidden >= 1 && d.input >= 1, "detector.hidden and detector.input must be >= 1");
  need(d.gamma > 0.0 && d.gamma <= 1.0, "detector.gamma must lie in (0, 1]");
  need(d.epochs >= 1, "detector.epochs must be >= 1");
  need(d.learning_rate > 0.0 && std::isfinite(d.learning_rate), "detector.learning_rate must be > 0");
  need(d.batch_size >= 1, "detector.batch_size must be >= 1");

  const auto& k = c.classifier;
  need(k.dim >= 1 && k.layers >= 1 && k.ffn_dim >= 1, "classifier dimensions must be >= 1");
  need(k.heads >= 1 && k.dim % std::max<std::size_t>(k.heads, 1) == 0,
       "classifier.heads must divide classifier.dim");
  need(k.epochs >= 1, "classifier.epochs must be >= 1");
  need(k.learning_rate > 0.0 && std::isfinite(k.learning_rate), "classifier.learning_rate must be > 0");
  need(k.weight_decay >= 0.0 && std::isfinite(k.weight_decay), "classifier.weight_decay must be >= 0");
  need(k.batch_size >= 1, "classifier.batch_size must be >= 1");

  const auto& h = c.hybrid;
  need(in_unit(h.alpha), "hybrid.alpha must lie in [0, 1]");
  need(in_unit(h.delta), "hybrid.delta must lie in [0, 1]");
  need(h.low_percentile >= 0.0 && h.low_percentile < h.high_percentile && h.high_percentile <= 100.0,
       "hybrid percentiles need 0 <= low < high <= 100");

  const auto& l = c.llm;
  need(l.backend != llm::BackendKind::kMockKeyword || !l.keyword_rules.empty(),
       "llm.keyword_rules is required for the mock-keyword backend");
  need(l.max_in_flight >= 1, "llm.max_in_flight must be >= 1");
  need(l.temperature >= 0.0 && l.temperature <= 2.0, "llm.temperature must lie in [0, 2]");
  need(l.top_p > 0.0 && l.top_p <= 1.0, "llm.top_p must lie in (0, 1]");
  need(l.max_tokens >= 1, "llm.max_tokens must be >= 1");
  need(!c.out_dir.empty(), "out_dir is empty");
  return e;
}

void validate(const RunConfig& config) {
  const auto errors = validation_errors(config);
  if (errors.empty()) return;
  std::string msg;
  for (const auto& e : errors) msg += (msg.empty() ? "" : "; ") + e;
  throw Error(ErrorCode::kInvalidConfig, msg);
}

nlohmann::json to_json(const RunConfig& c) {
  return {
      {"data", {{"path", c.data.path}, {"samples_per_class", c.data.samples_per_class}, {"seed", c.data.seed}}},
      {"seed", c.seed},
      {"sequence_length", c.sequence_length},
      {"detector",
       {{"hidden", c.detector.hidden},
        {"input", c.detector.input},
        {"gamma", c.detector.gamma},
        {"epochs", c.detector.epochs},
        {"learning_rate", c.detector.learning_rate},
        {"batch_size", c.detector.batch_size}}},
      {"classifier",
       {{"dim", c.classifier.dim},
        {"layers", c.classifier.layers},
        {"heads", c.classifier.heads},
        {"ffn_dim", c.classifier.ffn_dim},
        {"epochs", c.classifier.epochs},
        {"learning_rate", c.classifier.learning_rate},
        {"weight_decay", c.classifier.weight_decay},
        {"batch_size", c.classifier.batch_size}}},
      {"hybrid",
       {{"alpha", c.hybrid.alpha},
        {"delta", c.hybrid.delta},
        {"low_percentile", c.hybrid.low_percentile},
        {"high_percentile", c.hybrid.high_percentile}}},
      {"sps",
       {{"mode", sps::mode_name(c.sps.mode)},
        {"strict_source", sps::strict_source_name(c.sps.strict_source)},
        {"template_dir", c.sps.template_dir}}},
      {"routing_mode", routing_mode_name(c.routing)},
      {"llm",
       {{"backend", llm::backend_kind_name(c.llm.backend)},
        {"keyword_rules", c.llm.keyword_rules},
        {"base_url", c.llm.base_url},
        {"model", c.llm.model},
        {"max_in_flight", c.llm.max_in_flight},
        {"temperature", c.llm.temperature},
        {"top_p", c.llm.top_p},
        {"max_tokens", c.llm.max_tokens}}},
      {"out_dir", c.out_dir},
  };
}

RunConfig config_from_json(const nlohmann::json& doc) {
  json t = to_json(RunConfig{});
  overlay(t, doc, "");

  RunConfig c;
  c.data.path = t["data"]["path"].get<std::string>();
  c.data.samples_per_class = t["data"]["samples_per_class"].get<std::size_t>();
  c.data.seed = t["data"]["seed"].get<std::uint64_t>();
  c.seed = t["seed"].get<std::uint64_t>();
  c.sequence_length = t["sequence_length"].get<std::size_t>();

  const auto& d = t["detector"];
  c.detector = {d["hidden"].get<std::size_t>(),    d["input"].get<std::size_t>(),
                d["gamma"].get<double>(),          d["epochs"].get<std::size_t>(),
                d["learning_rate"].get<double>(), d["batch_size"].get<std::size_t>()};
  const auto& k = t["classifier"];
  c.classifier = {k["dim"].get<std::size_t>(),     k["layers"].get<std::size_t>(),
                  k["heads"].get<std::size_t>(),   k["ffn_dim"].get<std::size_t>(),
                  k["epochs"].get<std::size_t>(),  k["learning_rate"].get<double>(),
                  k["weight_decay"].get<double>(), k["batch_size"].get<std::size_t>()};
  const auto& h = t["hybrid"];
  c.hybrid = {h["alpha"].get<double>(), h["delta"].get<double>(), h["low_percentile"].get<double>(),
              h["high_percentile"].get<double>()};

  const auto& s = t["sps"];
  const auto mode = sps::parse_mode(s["mode"].get<std::string>());
  if (!mode) throw Error(ErrorCode::kInvalidConfig, "unknown sps.mode " + s["mode"].dump());
  const auto source = sps::parse_strict_source(s["strict_source"].get<std::string>());
  if (!source) throw Error(ErrorCode::kInvalidConfig, "unknown sps.strict_source " + s["strict_source"].dump());
  c.sps = {*mode, *source, s["template_dir"].get<std::string>()};

  const auto routing = parse_routing_mode(t["routing_mode"].get<std::string>());
  if (!routing) throw Error(ErrorCode::kInvalidConfig, "unknown routing_mode " + t["routing_mode"].dump());
  c.routing = *routing;

  const auto& l = t["llm"];
  const auto backend = llm::parse_backend_kind(l["backend"].get<std::string>());
  if (!backend) throw Error(ErrorCode::kInvalidConfig, "unknown llm.backend " + l["backend"].dump());
  c.llm = {*backend,
           l["keyword_rules"].get<std::string>(),
           l["base_url"].get<std::string>(),
           l["model"].get<std::string>(),
           l["max_in_flight"].get<std::size_t>(),
           l["temperature"].get<double>(),
           l["top_p"].get<double>(),
           l["max_tokens"].get<int>()};
  c.out_dir = t["out_dir"].get<std::string>();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

std::vector<ConfigEntry> config_provenance(const RunConfig& config) {
  std::vector<std::pair<std::string, json>> now, defaults;
  flatten(to_json(config), "", now);
  flatten(to_json(RunConfig{}), "", defaults);
  std::vector<ConfigEntry> out;
  for (std::size_t i = 0; i < now.size(); ++i) {
    const auto& [key, value] = now[i];
    std::string tag = kPublished.count(key) ? "published" : "artifact";
    if (value != defaults[i].second) tag = "override";
    if (key == "data.path") tag = "input";
    out.push_back({key, value, tag});
  }
  return out;
}

std::string render_config(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& e : config_provenance(config)) {
    out << e.key << " = " << e.value.dump() << "  [" << e.provenance << "]\n";
  }
  return out.str();
}

std::string config_hash(const RunConfig& config) {
  auto j = to_json(config);
  j.erase("seed");
  j.erase("out_dir");
  return sps::sha256_hex(j.dump()).substr(0, 12);
}

std::filesystem::path run_directory(const RunConfig& config, const std::string& kind) {
  return std::filesystem::path(config.out_dir) /
         (kind + "-" + config_hash(config) + "-seed" + std::to_string(config.seed));
}

}  // namespace taonet::pipeline
