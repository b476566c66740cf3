// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/ingest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "taonet/error.hpp"
#include "taonet/rng.hpp"

namespace taonet::ingest {
namespace {

using ordered_json = nlohmann::ordered_json;

void add_unique(std::vector<std::string>& list, const std::string& value) {
  if (std::find(list.begin(), list.end(), value) == list.end()) list.push_back(value);
}

// Per-split counts for a class of size n; every positive-ratio split gets at
// least one sample.
std::array<std::size_t, 3> allocate(std::size_t n, const std::array<double, 3>& ratios,
                                    const std::string& label) {
  std::size_t needed = 0;
  for (double r : ratios) needed += r > 0.0 ? 1 : 0;
  if (n < needed) {
    throw Error(ErrorCode::kInsufficientSamples,
                "class '" + label + "' has " + std::to_string(n) + " samples for " +
                    std::to_string(needed) + " splits");
  }
  std::array<std::size_t, 3> counts{};
  std::size_t assigned = 0;
  for (std::size_t s = 0; s < 2; ++s) {
    counts[s] = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios[s]));
    counts[s] = std::min(counts[s], n - assigned);
    assigned += counts[s];
  }
  counts[2] = ratios[2] > 0.0 ? n - assigned : 0;
  if (ratios[2] <= 0.0) counts[ratios[1] > 0.0 ? 1 : 0] += n - assigned;
  for (std::size_t s = 0; s < 3; ++s) {
    if (ratios[s] <= 0.0 || counts[s] > 0) continue;
    auto donor = std::max_element(counts.begin(), counts.end());
    --*donor;
    counts[s] = 1;
  }
  return counts;
}

}  // namespace

std::string origin_name(Origin origin) {
  switch (origin) {
    case Origin::kPcap: return "pcap";
    case Origin::kJsonl: return "jsonl";
    case Origin::kSynthetic: return "synthetic";
  }
  return "jsonl";
}

std::string split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "train";
}

std::optional<Split> parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "valid") return Split::kValid;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

std::size_t TrafficSample::unpadded_length() const {
  const auto it = std::find(tokens.begin(), tokens.end(), kPadToken);
  return static_cast<std::size_t>(it - tokens.begin());
}

bool LabelSpace::is_id(const std::string& label) const {
  return std::find(id_labels.begin(), id_labels.end(), label) != id_labels.end();
}

bool LabelSpace::is_ood(const std::string& label) const {
  return std::find(ood_labels.begin(), ood_labels.end(), label) != ood_labels.end();
}

std::optional<std::size_t> LabelSpace::id_index(const std::string& label) const {
  const auto it = std::find(id_labels.begin(), id_labels.end(), label);
  if (it == id_labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - id_labels.begin());
}

Split Dataset::split_of(const TrafficSample& sample) const {
  const auto it = splits.find(sample.id);
  if (it == splits.end()) {
    throw Error(ErrorCode::kSchemaViolation, "sample '" + sample.id + "' has no split");
  }
  return it->second;
}

std::vector<const TrafficSample*> Dataset::in_split(Split split) const {
  std::vector<const TrafficSample*> out;
  for (const auto& s : samples) {
    if (split_of(s) == split) out.push_back(&s);
  }
  return out;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());

  Dataset ds;
  std::vector<std::string> problems;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      problems.push_back(where + "invalid JSON");
      continue;
    }
    if (!obj.is_object()) {
      problems.push_back(where + "not an object");
      continue;
    }
    bool ok = true;
    for (const char* field : {"id", "tokens", "label", "split"}) {
      if (!obj.contains(field)) {
        problems.push_back(where + "missing field '" + field + "'");
        ok = false;
      }
    }
    if (!ok) continue;
    if (!obj["id"].is_string() || !obj["tokens"].is_array() ||
        !(obj["label"].is_string() || obj["label"].is_null()) || !obj["split"].is_string()) {
      problems.push_back(where + "field has wrong type");
      continue;
    }
    TrafficSample sample;
    sample.id = obj["id"].get<std::string>();
    sample.origin = Origin::kJsonl;
    if (obj.contains("origin") && obj["origin"].is_string()) {
      const auto o = obj["origin"].get<std::string>();
      if (o == "pcap") sample.origin = Origin::kPcap;
      if (o == "synthetic") sample.origin = Origin::kSynthetic;
    }
    for (const auto& t : obj["tokens"]) {
      if (!t.is_number_integer() || t.get<long long>() < 0 || t.get<long long>() > kPadToken) {
        problems.push_back(where + "token out of range [0, 256]: " + t.dump());
        ok = false;
        break;
      }
      sample.tokens.push_back(static_cast<std::uint16_t>(t.get<long long>()));
    }
    if (!ok) continue;
    if (!obj["label"].is_null()) sample.label = obj["label"].get<std::string>();
    const auto split = parse_split(obj["split"].get<std::string>());
    if (!split) {
      problems.push_back(where + "unknown split '" + obj["split"].get<std::string>() + "'");
      continue;
    }
    if (!seen_ids.insert(sample.id).second) {
      problems.push_back(where + "duplicate id '" + sample.id + "'");
      continue;
    }
    ds.splits[sample.id] = *split;
    ds.samples.push_back(std::move(sample));
  }

  if (!problems.empty()) {
    std::ostringstream msg;
    msg << path.string() << ": " << problems.size() << " invalid line(s)";
    for (std::size_t i = 0; i < problems.size() && i < 20; ++i) msg << "\n  " << problems[i];
    throw Error(ErrorCode::kSchemaViolation, msg.str());
  }

  for (const auto& s : ds.samples) {
    if (s.label && ds.splits.at(s.id) == Split::kTrain) add_unique(ds.label_space.id_labels, *s.label);
  }
  for (const auto& s : ds.samples) {
    if (s.label && !ds.label_space.is_id(*s.label)) add_unique(ds.label_space.ood_labels, *s.label);
  }
  return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, "cannot write " + path.string());
  for (const auto& s : dataset.samples) {
    ordered_json obj;
    obj["id"] = s.id;
    obj["tokens"] = s.tokens;
    obj["label"] = s.label ? ordered_json(*s.label) : ordered_json(nullptr);
    obj["split"] = split_name(dataset.split_of(s));
    obj["origin"] = origin_name(s.origin);
    out << obj.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

Dataset split_dataset(Dataset dataset, const SplitRatios& ratios, std::uint64_t seed) {
  const std::array<double, 3> r = {ratios.train, ratios.valid, ratios.test};
  if (std::any_of(r.begin(), r.end(), [](double x) { return x < 0.0; }) ||
      std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidConfig, "split ratios must be non-negative and sum to 1");
  }
  const double holdout = r[1] + r[2];
  const std::array<double, 3> ood_ratios =
      holdout > 0.0 ? std::array<double, 3>{0.0, r[1] / holdout, r[2] / holdout}
                    : std::array<double, 3>{0.0, 0.0, 0.0};

  // Group sample indices by label; std::map keeps class order deterministic.
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::size_t> unlabeled;
  for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
    const auto& s = dataset.samples[i];
    if (!s.label) {
      unlabeled.push_back(i);
      continue;
    }
    if (!dataset.label_space.is_id(*s.label) && !dataset.label_space.is_ood(*s.label)) {
      throw Error(ErrorCode::kSchemaViolation,
                  "label '" + *s.label + "' is neither ID nor OOD in the label space");
    }
    groups[*s.label].push_back(i);
  }

  Rng rng(seed);
  dataset.splits.clear();
  auto assign = [&](std::vector<std::size_t>& members, const std::array<double, 3>& rr,
                    const std::string& name) {
    if (members.empty()) return;
    if (rr[1] + rr[2] <= 0.0 && rr[0] <= 0.0) {
      throw Error(ErrorCode::kInvalidConfig, "no split can hold class '" + name + "'");
    }
    rng.shuffle(members);
    const auto counts = allocate(members.size(), rr, name);
    std::size_t pos = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t c = 0; c < counts[s]; ++c, ++pos) {
        dataset.splits[dataset.samples[members[pos]].id] = static_cast<Split>(s);
      }
    }
  };
  for (auto& [label, members] : groups) {
    assign(members, dataset.label_space.is_id(label) ? r : ood_ratios, label);
  }
  assign(unlabeled, ood_ratios, "<unlabeled>");
  return dataset;
}

std::vector<std::string> validate_dataset(const Dataset& dataset, std::size_t expected_length) {
  std::vector<std::string> problems;
  for (const auto& s : dataset.samples) {
    if (s.tokens.size() != expected_length) {
      problems.push_back(s.id + ": length " + std::to_string(s.tokens.size()) + " != " +
                         std::to_string(expected_length));
    }
    if (std::any_of(s.tokens.begin(), s.tokens.end(), [](auto t) { return t > kPadToken; })) {
      problems.push_back(s.id + ": token out of range");
    }
    const auto it = dataset.splits.find(s.id);
    if (it == dataset.splits.end()) {
      problems.push_back(s.id + ": no split");
    } else if (it->second == Split::kTrain &&
               (!s.label || !dataset.label_space.is_id(*s.label))) {
      problems.push_back(s.id + ": non-ID sample in train split");
    }
  }
  return problems;
}

}  // namespace taonet::ingest
