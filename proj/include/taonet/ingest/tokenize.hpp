// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taonet/ingest/dataset.hpp"
#include "taonet/ingest/packet.hpp"

namespace taonet::ingest {

/// Packet bytes from the IP header on, with source/destination addresses,
/// the IPv4 header checksum and the TCP/UDP checksum zeroed. Ports stay.
std::vector<std::uint8_t> anonymized_ip_bytes(const PacketRecord& record);

/// First `j` anonymized bytes as tokens, right-padded with kPadToken.
TrafficSample tokenize_packet(const PacketRecord& record, std::size_t j,
                              std::string id = {},
                              std::optional<std::string> label = std::nullopt);

/// Rebuilds a header summary from a sample's unpadded tokens, which start at
/// the IP header. Addresses and checksums read back as zero. Returns nullopt
/// when the tokens do not begin with a decodable IP header.
std::optional<PacketRecord> record_from_sample(const TrafficSample& sample);

}  // namespace taonet::ingest
