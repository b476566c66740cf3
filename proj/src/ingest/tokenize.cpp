// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/ingest/tokenize.hpp"

#include <algorithm>

namespace taonet::ingest {
namespace {

void zero_range(std::vector<std::uint8_t>& bytes, std::size_t from, std::size_t count) {
  for (std::size_t i = from; i < from + count && i < bytes.size(); ++i) bytes[i] = 0;
}

}  // namespace

std::vector<std::uint8_t> anonymized_ip_bytes(const PacketRecord& record) {
  const auto ip = record.ip_bytes();
  std::vector<std::uint8_t> bytes(ip.begin(), ip.end());
  const std::size_t ihl = record.ip_header_length;
  if (record.ip_version == 4) {
    zero_range(bytes, 10, 2);  // header checksum
    zero_range(bytes, 12, 8);  // source + destination
  } else {
    zero_range(bytes, 8, 32);
  }
  if (record.transport == Transport::kTcp) {
    zero_range(bytes, ihl + 16, 2);
  } else if (record.transport == Transport::kUdp) {
    zero_range(bytes, ihl + 6, 2);
  }
  return bytes;
}

TrafficSample tokenize_packet(const PacketRecord& record, std::size_t j, std::string id,
                              std::optional<std::string> label) {
  const auto bytes = anonymized_ip_bytes(record);
  TrafficSample sample;
  sample.id = std::move(id);
  sample.label = std::move(label);
  sample.origin = Origin::kPcap;
  sample.tokens.assign(j, kPadToken);
  const std::size_t n = std::min(j, bytes.size());
  std::copy_n(bytes.begin(), n, sample.tokens.begin());
  return sample;
}

std::optional<PacketRecord> record_from_sample(const TrafficSample& sample) {
  const std::size_t n = sample.unpadded_length();
  std::vector<std::uint8_t> bytes(n);
  for (std::size_t i = 0; i < n; ++i) bytes[i] = static_cast<std::uint8_t>(sample.tokens[i]);
  return decode_ip_packet(std::move(bytes), 0, LinkType::kRawIp);
}

}  // namespace taonet::ingest
