// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/ingest/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "taonet/error.hpp"
#include "taonet/ingest/packet.hpp"
#include "taonet/ingest/tokenize.hpp"
#include "taonet/rng.hpp"

namespace taonet::ingest {
namespace {

using nlohmann::json;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::kInvalidSpec, what); }

std::vector<std::uint8_t> parse_hex(const std::string& hex, const std::string& label) {
  std::string digits;
  for (char c : hex) {
    if (c == ' ' || c == ':' || c == '\n') continue;
    digits += c;
  }
  if (digits.size() % 2 != 0) invalid("class '" + label + "': odd-length header_template");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < digits.size(); i += 2) {
    unsigned value = 0;
    if (std::sscanf(digits.substr(i, 2).c_str(), "%2x", &value) != 1) {
      invalid("class '" + label + "': bad hex in header_template");
    }
    out.push_back(static_cast<std::uint8_t>(value));
  }
  return out;
}

void put16(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  b[at] = static_cast<std::uint8_t>((v >> 8) & 0xFF);
  b[at + 1] = static_cast<std::uint8_t>(v & 0xFF);
}

// Template decoded with its length fields patched to the template size.
PacketRecord decode_template(std::vector<std::uint8_t> header, const std::string& label) {
  if (header.empty()) invalid("class '" + label + "': empty header_template");
  const int version = header[0] >> 4;
  if (version == 4 && header.size() >= 20) put16(header, 2, static_cast<std::uint32_t>(header.size()));
  if (version == 6 && header.size() >= 40) put16(header, 4, static_cast<std::uint32_t>(header.size() - 40));
  auto rec = decode_ip_packet(std::move(header), 0, LinkType::kRawIp);
  if (!rec) invalid("class '" + label + "': header_template is not a decodable IP header");
  return *rec;
}

std::uint8_t draw_byte(const PayloadDistribution& dist, Rng& rng) {
  if (dist.kind == PayloadDistribution::Kind::kUniform) {
    return static_cast<std::uint8_t>(
        dist.low + static_cast<int>(rng.index(static_cast<std::size_t>(dist.high - dist.low + 1))));
  }
  const double total = std::accumulate(dist.weights.begin(), dist.weights.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < dist.values.size(); ++i) {
    if (u < dist.weights[i]) return static_cast<std::uint8_t>(dist.values[i]);
    u -= dist.weights[i];
  }
  return static_cast<std::uint8_t>(dist.values.back());
}

std::vector<std::uint8_t> make_packet(const SyntheticClass& cls, const PacketRecord& layout,
                                      Rng& rng) {
  const double raw = std::round(cls.length.mean + cls.length.stddev * rng.normal());
  const double clamped = std::clamp(raw, static_cast<double>(cls.length.min),
                                    static_cast<double>(cls.length.max));
  const auto total = static_cast<std::size_t>(clamped);

  std::vector<std::uint8_t> bytes = cls.header_template;
  bytes.resize(total);
  const std::size_t ihl = layout.ip_header_length;
  if (layout.ip_version == 4) {
    put16(bytes, 2, static_cast<std::uint32_t>(total));
    for (std::size_t i = 12; i < 20; ++i) bytes[i] = static_cast<std::uint8_t>(rng.index(256));
  } else {
    put16(bytes, 4, static_cast<std::uint32_t>(total - 40));
    for (std::size_t i = 8; i < 40; ++i) bytes[i] = static_cast<std::uint8_t>(rng.index(256));
  }
  if (layout.transport != Transport::kOther && cls.src_port_range) {
    const auto [lo, hi] = *cls.src_port_range;
    put16(bytes, ihl, static_cast<std::uint32_t>(lo + rng.index(static_cast<std::size_t>(hi - lo) + 1)));
  }
  if (layout.transport == Transport::kTcp) {
    for (std::size_t i = ihl + 4; i < ihl + 12; ++i) bytes[i] = static_cast<std::uint8_t>(rng.index(256));
  } else if (layout.transport == Transport::kUdp) {
    put16(bytes, ihl + 4, static_cast<std::uint32_t>(total - ihl));
  }
  for (std::size_t i = cls.header_template.size(); i < total; ++i) {
    bytes[i] = draw_byte(cls.payload, rng);
  }
  return bytes;
}

}  // namespace

std::size_t ood_count_for(std::size_t id_count) { return (3 * id_count) / 7; }

SyntheticSpec parse_synthetic_spec(const json& doc) {
  if (!doc.is_object()) invalid("synthetic spec must be a JSON object");
  SyntheticSpec spec;
  try {
    spec.name = doc.value("name", spec.name);
    spec.sequence_length = doc.value("sequence_length", spec.sequence_length);
    if (doc.contains("id_split")) {
      const auto& s = doc.at("id_split");
      spec.id_split = {s.at("train").get<double>(), s.at("valid").get<double>(),
                       s.at("test").get<double>()};
    }
    if (doc.contains("extended_labels")) {
      spec.extended_labels = doc.at("extended_labels").get<std::vector<std::string>>();
    }
    for (const auto& c : doc.at("classes")) {
      SyntheticClass cls;
      cls.label = c.at("label").get<std::string>();
      const auto role = c.at("role").get<std::string>();
      if (role != "id" && role != "ood") invalid("class '" + cls.label + "': role must be id|ood");
      cls.is_ood = role == "ood";
      cls.header_template = parse_hex(c.at("header_template").get<std::string>(), cls.label);
      const auto& p = c.at("payload");
      const auto kind = p.at("kind").get<std::string>();
      if (kind == "uniform") {
        cls.payload.kind = PayloadDistribution::Kind::kUniform;
        cls.payload.low = p.at("low").get<int>();
        cls.payload.high = p.at("high").get<int>();
      } else if (kind == "categorical") {
        cls.payload.kind = PayloadDistribution::Kind::kCategorical;
        cls.payload.values = p.at("values").get<std::vector<int>>();
        cls.payload.weights = p.at("weights").get<std::vector<double>>();
      } else {
        invalid("class '" + cls.label + "': unknown payload kind '" + kind + "'");
      }
      const auto& l = c.at("length");
      cls.length.mean = l.at("mean").get<double>();
      cls.length.stddev = l.value("stddev", 0.0);
      cls.length.min = l.at("min").get<std::size_t>();
      cls.length.max = l.at("max").get<std::size_t>();
      if (c.contains("src_port_range")) {
        const auto r = c.at("src_port_range").get<std::vector<int>>();
        if (r.size() != 2 || r[0] < 0 || r[1] > 65535 || r[0] > r[1]) {
          invalid("class '" + cls.label + "': bad src_port_range");
        }
        cls.src_port_range = std::make_pair(static_cast<std::uint16_t>(r[0]),
                                            static_cast<std::uint16_t>(r[1]));
      }
      spec.classes.push_back(std::move(cls));
    }
  } catch (const json::exception& e) {
    invalid(std::string("malformed synthetic spec: ") + e.what());
  }
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    invalid(path.string() + ": " + e.what());
  }
  return parse_synthetic_spec(doc);
}

Dataset generate_synthetic(const SyntheticSpec& spec, std::size_t n_per_class, std::uint64_t seed) {
  if (spec.classes.empty()) invalid("empty class list");
  if (spec.sequence_length == 0) invalid("sequence_length must be >= 1");
  const auto id_classes = std::count_if(spec.classes.begin(), spec.classes.end(),
                                        [](const auto& c) { return !c.is_ood; });
  const auto ood_classes = static_cast<std::ptrdiff_t>(spec.classes.size()) - id_classes;
  if (id_classes < 2 || ood_classes < 1) invalid("need >= 2 ID classes and >= 1 OOD class");
  if (n_per_class == 0) invalid("n_per_class must be >= 1");
  const auto& r = spec.id_split;
  if (r.train <= 0.0 || r.valid <= 0.0 || r.test <= 0.0 ||
      std::abs(r.train + r.valid + r.test - 1.0) > 1e-9) {
    invalid("id_split ratios must be positive and sum to 1");
  }

  std::vector<PacketRecord> layouts;
  for (const auto& cls : spec.classes) {
    const auto& p = cls.payload;
    if (p.kind == PayloadDistribution::Kind::kUniform &&
        (p.low < 0 || p.high > 255 || p.low > p.high)) {
      invalid("class '" + cls.label + "': degenerate uniform payload range");
    }
    if (p.kind == PayloadDistribution::Kind::kCategorical) {
      const double total = std::accumulate(p.weights.begin(), p.weights.end(), 0.0);
      const bool bad_value = std::any_of(p.values.begin(), p.values.end(),
                                         [](int v) { return v < 0 || v > 255; });
      const bool bad_weight = std::any_of(p.weights.begin(), p.weights.end(),
                                          [](double w) { return !(w >= 0.0); });
      if (p.values.empty() || p.values.size() != p.weights.size() || !(total > 0.0) ||
          bad_value || bad_weight) {
        invalid("class '" + cls.label + "': degenerate categorical payload");
      }
    }
    const auto& l = cls.length;
    if (l.stddev < 0.0 || l.min > l.max || l.min < cls.header_template.size()) {
      invalid("class '" + cls.label + "': bad length distribution");
    }
    layouts.push_back(decode_template(cls.header_template, cls.label));
  }

  Dataset ds;
  for (const auto& cls : spec.classes) {
    auto& target = cls.is_ood ? ds.label_space.ood_labels : ds.label_space.id_labels;
    if (std::find(target.begin(), target.end(), cls.label) != target.end() ||
        ds.label_space.is_id(cls.label) || ds.label_space.is_ood(cls.label)) {
      invalid("duplicate class label '" + cls.label + "'");
    }
    target.push_back(cls.label);
  }
  ds.label_space.extended_labels = spec.extended_labels;

  Rng rng(seed);
  std::vector<std::vector<TrafficSample>> per_class(spec.classes.size());
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    const auto& cls = spec.classes[c];
    for (std::size_t i = 0; i < n_per_class; ++i) {
      auto rec = decode_ip_packet(make_packet(cls, layouts[c], rng), 0, LinkType::kRawIp);
      if (!rec) invalid("class '" + cls.label + "': generated packet failed to decode");
      char id[32];
      std::snprintf(id, sizeof id, "-%05zu", i);
      auto sample = tokenize_packet(*rec, spec.sequence_length, cls.label + id, cls.label);
      sample.origin = Origin::kSynthetic;
      per_class[c].push_back(std::move(sample));
    }
  }

  // ID split: shuffled per class, counts by rounding (test takes the rest).
  Rng split_rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::size_t valid_id = 0;
  std::size_t test_id = 0;
  std::vector<std::vector<std::size_t>> order(spec.classes.size());
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    order[c].resize(n_per_class);
    std::iota(order[c].begin(), order[c].end(), 0);
    split_rng.shuffle(order[c]);
    if (spec.classes[c].is_ood) continue;
    const auto n_train = static_cast<std::size_t>(std::llround(n_per_class * r.train));
    const auto n_valid = std::min(n_per_class - n_train,
                                  static_cast<std::size_t>(std::llround(n_per_class * r.valid)));
    for (std::size_t k = 0; k < n_per_class; ++k) {
      const auto& s = per_class[c][order[c][k]];
      const Split split = k < n_train ? Split::kTrain
                          : k < n_train + n_valid ? Split::kValid
                                                  : Split::kTest;
      ds.splits[s.id] = split;
      valid_id += split == Split::kValid;
      test_id += split == Split::kTest;
    }
  }

  // OOD draw: round-robin over OOD classes, valid first then test.
  const std::size_t need_valid = ood_count_for(valid_id);
  const std::size_t need_test = ood_count_for(test_id);
  std::vector<std::size_t> cursor(spec.classes.size(), 0);
  auto draw = [&](std::size_t needed, Split split) {
    std::size_t placed = 0;
    while (placed < needed) {
      bool progressed = false;
      for (std::size_t c = 0; c < spec.classes.size() && placed < needed; ++c) {
        if (!spec.classes[c].is_ood || cursor[c] >= n_per_class) continue;
        ds.splits[per_class[c][order[c][cursor[c]++]].id] = split;
        ++placed;
        progressed = true;
      }
      if (!progressed) {
        invalid("not enough OOD samples for the 7:3 mix (need " +
                std::to_string(need_valid + need_test) + ")");
      }
    }
  };
  draw(need_valid, Split::kValid);
  draw(need_test, Split::kTest);

  for (auto& cls_samples : per_class) {
    for (auto& s : cls_samples) {
      if (ds.splits.count(s.id) != 0) ds.samples.push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace taonet::ingest
