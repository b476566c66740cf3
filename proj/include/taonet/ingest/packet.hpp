// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace taonet::ingest {

enum class LinkType { kEthernet, kRawIp };

enum class Transport { kTcp, kUdp, kOther };

std::string transport_name(Transport transport);

/// TCP flag bits as they appear in byte 13 of the TCP header.
namespace tcp_flag {
inline constexpr std::uint8_t kFin = 0x01;
inline constexpr std::uint8_t kSyn = 0x02;
inline constexpr std::uint8_t kRst = 0x04;
inline constexpr std::uint8_t kPsh = 0x08;
inline constexpr std::uint8_t kAck = 0x10;
inline constexpr std::uint8_t kUrg = 0x20;
inline constexpr std::uint8_t kEce = 0x40;
inline constexpr std::uint8_t kCwr = 0x80;
}  // namespace tcp_flag

/// "SYN|ACK" style rendering, "none" for an empty mask.
std::string tcp_flag_names(std::uint8_t flags);

/// One captured packet plus the header summary decoded from it.
///
/// `raw_bytes` is the full captured frame; `ip_offset` is where the IP header
/// starts inside it (14 for untagged Ethernet, 0 for raw IP). TCP fields are
/// present iff `transport == Transport::kTcp`.
struct PacketRecord {
  double timestamp = 0.0;
  LinkType link_type = LinkType::kRawIp;
  std::vector<std::uint8_t> raw_bytes;
  std::size_t ip_offset = 0;

  int ip_version = 4;
  std::uint32_t total_length = 0;
  int ttl = 0;
  Transport transport = Transport::kOther;
  std::optional<std::uint8_t> tcp_flags;
  std::optional<std::uint16_t> tcp_window;
  std::optional<std::uint16_t> src_port;
  std::optional<std::uint16_t> dst_port;
  std::uint32_t payload_length = 0;
  bool fragmented = false;

  std::size_t ip_header_length = 0;
  std::size_t transport_header_length = 0;

  std::span<const std::uint8_t> ip_bytes() const {
    return std::span<const std::uint8_t>(raw_bytes).subspan(ip_offset);
  }
};

/// Decodes an IPv4/IPv6 packet that starts at `ip_offset` within `frame`.
/// Returns nullopt when the headers are truncated or inconsistent
/// (e.g. total length smaller than the headers it must contain).
std::optional<PacketRecord> decode_ip_packet(std::vector<std::uint8_t> frame,
                                             std::size_t ip_offset,
                                             LinkType link_type,
                                             double timestamp = 0.0);

/// Decodes a link-layer frame (Ethernet II with optional 802.1Q tag, or raw IP).
std::optional<PacketRecord> decode_frame(std::vector<std::uint8_t> frame,
                                         LinkType link_type,
                                         double timestamp = 0.0);

}  // namespace taonet::ingest
