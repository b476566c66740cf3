// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "taonet/ingest/dataset.hpp"
#include "taonet/ingest/packet.hpp"

namespace taonet::sps {

/// Structured packet summary placed into prompts.
///
/// Serialized as one `key:value` line per field in a fixed order. TCP-only
/// keys are omitted for other transports; `extra` lines follow the
/// standard keys in insertion order.
struct FeatureDigest {
  std::string protocol = "unknown";  // tcp | udp | other | unknown
  int ip_version = 0;
  std::optional<std::uint16_t> dst_port;
  std::optional<std::string> tcp_flags;
  std::optional<std::uint16_t> tcp_window;
  int ttl = 0;
  std::uint32_t total_length = 0;
  std::uint32_t payload_length = 0;
  bool fragmented = false;
  double entropy = 0.0;             // bits per byte, [0, 8]
  double printable_fraction = 0.0;  // share of bytes in 0x20..0x7e
  std::string hex_preview;          // first 32 anonymized bytes
  std::vector<std::pair<std::string, std::string>> extra;

  friend bool operator==(const FeatureDigest&, const FeatureDigest&) = default;
};

/// Shannon entropy in bits of the byte histogram; 0 for an empty input.
double byte_entropy(std::span<const std::uint8_t> bytes);

/// Fraction of bytes in the printable ASCII range; 0 for an empty input.
double printable_fraction(std::span<const std::uint8_t> bytes);

/// Header fields come from `record`. Payload statistics cover the captured
/// payload bytes after the IP and transport headers; the hex preview shows
/// the first 32 non-pad tokens of `sample`.
FeatureDigest build_digest(const ingest::PacketRecord& record, const ingest::TrafficSample& sample);

/// Digest from the tokens alone. When the tokens do not decode as an IP
/// packet the header fields stay at their defaults and the statistics
/// cover every non-pad token.
FeatureDigest build_digest(const ingest::TrafficSample& sample);

/// The `key:value` block, lines joined by '\n', no trailing newline.
std::string serialize_digest(const FeatureDigest& digest);

}  // namespace taonet::sps
