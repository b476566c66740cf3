// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/ingest/packet.hpp"

#include <array>
#include <utility>

namespace taonet::ingest {
namespace {

constexpr std::uint8_t kProtoTcp = 6;
constexpr std::uint8_t kProtoUdp = 17;
constexpr std::size_t kEthernetHeader = 14;
constexpr std::size_t kVlanTag = 4;
constexpr std::uint16_t kEtherIpv4 = 0x0800;
constexpr std::uint16_t kEtherIpv6 = 0x86DD;
constexpr std::uint16_t kEtherVlan = 0x8100;

std::uint16_t be16(std::span<const std::uint8_t> bytes, std::size_t at) {
  return static_cast<std::uint16_t>((bytes[at] << 8) | bytes[at + 1]);
}

// Fills transport fields from the header at `at`; false if it is truncated.
bool decode_transport(std::span<const std::uint8_t> ip, std::size_t at,
                      std::uint8_t protocol, PacketRecord& rec) {
  if (protocol == kProtoTcp) {
    if (ip.size() < at + 20) return false;
    const std::size_t data_offset = static_cast<std::size_t>(ip[at + 12] >> 4) * 4;
    if (data_offset < 20) return false;
    rec.transport = Transport::kTcp;
    rec.src_port = be16(ip, at);
    rec.dst_port = be16(ip, at + 2);
    rec.tcp_flags = ip[at + 13];
    rec.tcp_window = be16(ip, at + 14);
    rec.transport_header_length = data_offset;
    return true;
  }
  if (protocol == kProtoUdp) {
    if (ip.size() < at + 8) return false;
    rec.transport = Transport::kUdp;
    rec.src_port = be16(ip, at);
    rec.dst_port = be16(ip, at + 2);
    rec.transport_header_length = 8;
    return true;
  }
  rec.transport = Transport::kOther;
  rec.transport_header_length = 0;
  return true;
}

}  // namespace

std::string transport_name(Transport transport) {
  switch (transport) {
    case Transport::kTcp: return "tcp";
    case Transport::kUdp: return "udp";
    case Transport::kOther: return "other";
  }
  return "other";
}

std::string tcp_flag_names(std::uint8_t flags) {
  static constexpr std::array<std::pair<std::uint8_t, const char*>, 8> kNames = {{
      {tcp_flag::kFin, "FIN"}, {tcp_flag::kSyn, "SYN"}, {tcp_flag::kRst, "RST"},
      {tcp_flag::kPsh, "PSH"}, {tcp_flag::kAck, "ACK"}, {tcp_flag::kUrg, "URG"},
      {tcp_flag::kEce, "ECE"}, {tcp_flag::kCwr, "CWR"},
  }};
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if ((flags & bit) == 0) continue;
    if (!out.empty()) out += '|';
    out += name;
  }
  return out.empty() ? "none" : out;
}

std::optional<PacketRecord> decode_ip_packet(std::vector<std::uint8_t> frame,
                                             std::size_t ip_offset,
                                             LinkType link_type,
                                             double timestamp) {
  if (ip_offset >= frame.size()) return std::nullopt;
  PacketRecord rec;
  rec.timestamp = timestamp;
  rec.link_type = link_type;
  rec.raw_bytes = std::move(frame);
  rec.ip_offset = ip_offset;
  const auto ip = rec.ip_bytes();

  const int version = ip[0] >> 4;
  if (version == 4) {
    if (ip.size() < 20) return std::nullopt;
    const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
    if (ihl < 20 || ip.size() < ihl) return std::nullopt;
    rec.ip_version = 4;
    rec.ip_header_length = ihl;
    rec.total_length = be16(ip, 2);
    if (rec.total_length < ihl) return std::nullopt;
    rec.ttl = ip[8];
    const std::uint16_t frag = be16(ip, 6);
    const bool more_fragments = (frag & 0x2000) != 0;
    const std::uint16_t frag_offset = frag & 0x1FFF;
    rec.fragmented = more_fragments || frag_offset != 0;
    if (frag_offset != 0) {
      // Later fragments carry no transport header.
      rec.transport = Transport::kOther;
    } else if (!decode_transport(ip, ihl, ip[9], rec)) {
      return std::nullopt;
    }
  } else if (version == 6) {
    constexpr std::size_t kFixed = 40;
    if (ip.size() < kFixed) return std::nullopt;
    rec.ip_version = 6;
    rec.ip_header_length = kFixed;
    rec.total_length = kFixed + be16(ip, 4);
    rec.ttl = ip[7];
    const std::uint8_t next_header = ip[6];
    rec.fragmented = next_header == 44;
    if (!decode_transport(ip, kFixed, next_header, rec)) return std::nullopt;
  } else {
    return std::nullopt;
  }

  const std::size_t headers = rec.ip_header_length + rec.transport_header_length;
  if (rec.total_length < headers) return std::nullopt;
  rec.payload_length = static_cast<std::uint32_t>(rec.total_length - headers);
  return rec;
}

std::optional<PacketRecord> decode_frame(std::vector<std::uint8_t> frame,
                                         LinkType link_type, double timestamp) {
  if (link_type == LinkType::kRawIp) {
    return decode_ip_packet(std::move(frame), 0, link_type, timestamp);
  }
  if (frame.size() < kEthernetHeader) return std::nullopt;
  std::size_t offset = kEthernetHeader;
  std::uint16_t ether_type = be16(frame, 12);
  if (ether_type == kEtherVlan) {
    if (frame.size() < kEthernetHeader + kVlanTag) return std::nullopt;
    ether_type = be16(frame, 16);
    offset += kVlanTag;
  }
  if (ether_type != kEtherIpv4 && ether_type != kEtherIpv6) return std::nullopt;
  auto rec = decode_ip_packet(std::move(frame), offset, link_type, timestamp);
  if (!rec) return std::nullopt;
  const int expected = ether_type == kEtherIpv4 ? 4 : 6;
  if (rec->ip_version != expected) return std::nullopt;
  return rec;
}

}  // namespace taonet::ingest
