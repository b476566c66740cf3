// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

#include "taonet/ingest/packet.hpp"

namespace taonet::ingest {

struct PcapReadResult {
  std::vector<PacketRecord> records;  // file order
  std::size_t skipped = 0;            // undecodable link/IP headers
};

/// Reads a classic libpcap capture (microsecond or nanosecond magic, either
/// byte order). Link types 1 (Ethernet) and 101 (raw IP) are decoded; for
/// any other link type every packet is counted as skipped.
///
/// Throws Error{kFileNotFound} if the file cannot be opened and
/// Error{kMalformedCapture} on a bad magic or truncated global header.
/// A truncated trailing record ends the read and counts as skipped.
PcapReadResult parse_pcap(const std::filesystem::path& path,
                          std::optional<std::size_t> limit = std::nullopt);

}  // namespace taonet::ingest
