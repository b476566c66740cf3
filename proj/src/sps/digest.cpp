// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/sps/digest.hpp"

#include <array>
#include <cmath>
#include <cstdio>

#include "taonet/ingest/tokenize.hpp"

namespace taonet::sps {
namespace {

constexpr std::size_t kPreviewBytes = 32;

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::vector<std::uint8_t> unpadded_bytes(const ingest::TrafficSample& sample) {
  std::vector<std::uint8_t> out;
  for (auto t : sample.tokens) {
    if (t == ingest::kPadToken) break;
    out.push_back(static_cast<std::uint8_t>(t));
  }
  return out;
}

std::string hex_of(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

void set_payload_stats(FeatureDigest& d, std::span<const std::uint8_t> payload) {
  d.entropy = byte_entropy(payload);
  d.printable_fraction = sps::printable_fraction(payload);
}

}  // namespace

double byte_entropy(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (auto b : bytes) ++counts[b];
  const double n = static_cast<double>(bytes.size());
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

double printable_fraction(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) return 0.0;
  std::size_t printable = 0;
  for (auto b : bytes) printable += b >= 0x20 && b <= 0x7E;
  return static_cast<double>(printable) / static_cast<double>(bytes.size());
}

FeatureDigest build_digest(const ingest::PacketRecord& record, const ingest::TrafficSample& sample) {
  FeatureDigest d;
  d.protocol = ingest::transport_name(record.transport);
  d.ip_version = record.ip_version;
  d.dst_port = record.dst_port;
  if (record.tcp_flags) d.tcp_flags = ingest::tcp_flag_names(*record.tcp_flags);
  d.tcp_window = record.tcp_window;
  d.ttl = record.ttl;
  d.total_length = record.total_length;
  d.payload_length = record.payload_length;
  d.fragmented = record.fragmented;

  const auto ip = record.ip_bytes();
  const std::size_t start = std::min(ip.size(), record.ip_header_length + record.transport_header_length);
  // Ethernet frames may carry trailer padding past the IP total length.
  const std::size_t end = std::max(start, std::min<std::size_t>(ip.size(), record.total_length));
  set_payload_stats(d, ip.subspan(start, end - start));

  const auto tokens = unpadded_bytes(sample);
  d.hex_preview = hex_of(std::span(tokens).first(std::min(tokens.size(), kPreviewBytes)));
  return d;
}

FeatureDigest build_digest(const ingest::TrafficSample& sample) {
  if (const auto record = ingest::record_from_sample(sample)) return build_digest(*record, sample);
  FeatureDigest d;
  const auto tokens = unpadded_bytes(sample);
  set_payload_stats(d, tokens);
  d.hex_preview = hex_of(std::span(tokens).first(std::min(tokens.size(), kPreviewBytes)));
  return d;
}

std::string serialize_digest(const FeatureDigest& d) {
  std::vector<std::pair<std::string, std::string>> lines;
  lines.emplace_back("protocol", d.protocol);
  lines.emplace_back("ip_version", std::to_string(d.ip_version));
  if (d.dst_port) lines.emplace_back("dst_port", std::to_string(*d.dst_port));
  if (d.tcp_flags) lines.emplace_back("tcp_flags", *d.tcp_flags);
  if (d.tcp_window) lines.emplace_back("tcp_window", std::to_string(*d.tcp_window));
  lines.emplace_back("ttl", std::to_string(d.ttl));
  lines.emplace_back("total_length", std::to_string(d.total_length));
  lines.emplace_back("payload_length", std::to_string(d.payload_length));
  lines.emplace_back("fragmented", d.fragmented ? "yes" : "no");
  lines.emplace_back("entropy", fixed3(d.entropy));
  lines.emplace_back("printable_fraction", fixed3(d.printable_fraction));
  lines.emplace_back("hex_preview", d.hex_preview);
  lines.insert(lines.end(), d.extra.begin(), d.extra.end());

  std::string out;
  for (const auto& [k, v] : lines) {
    if (!out.empty()) out.push_back('\n');
    out += k + ":" + v;
  }
  return out;
}

}  // namespace taonet::sps
