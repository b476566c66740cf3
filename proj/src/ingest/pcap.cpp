// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/ingest/pcap.hpp"

#include <array>
#include <cstdint>
#include <fstream>

#include "taonet/error.hpp"

namespace taonet::ingest {
namespace {

constexpr std::size_t kGlobalHeader = 24;
constexpr std::size_t kRecordHeader = 16;
constexpr std::uint32_t kMagicMicros = 0xA1B2C3D4;
constexpr std::uint32_t kMagicNanos = 0xA1B23C4D;
constexpr std::uint32_t kLinkEthernet = 1;
constexpr std::uint32_t kLinkRaw = 101;

std::uint32_t read_u32(const std::uint8_t* p, bool swap) {
  const std::uint32_t le = static_cast<std::uint32_t>(p[0]) |
                           (static_cast<std::uint32_t>(p[1]) << 8) |
                           (static_cast<std::uint32_t>(p[2]) << 16) |
                           (static_cast<std::uint32_t>(p[3]) << 24);
  if (!swap) return le;
  return ((le & 0xFF) << 24) | ((le & 0xFF00) << 8) | ((le >> 8) & 0xFF00) | (le >> 24);
}

}  // namespace

PcapReadResult parse_pcap(const std::filesystem::path& path,
                          std::optional<std::size_t> limit) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kFileNotFound, path.string());

  std::array<std::uint8_t, kGlobalHeader> header{};
  in.read(reinterpret_cast<char*>(header.data()), kGlobalHeader);
  if (static_cast<std::size_t>(in.gcount()) != kGlobalHeader) {
    throw Error(ErrorCode::kMalformedCapture, "truncated global header in " + path.string());
  }

  // The magic is written in the writer's native order; reading it as
  // little-endian tells us whether fields need swapping.
  const std::uint32_t magic = read_u32(header.data(), false);
  bool swap = false;
  bool nanos = false;
  if (magic == kMagicMicros || magic == kMagicNanos) {
    nanos = magic == kMagicNanos;
  } else if (read_u32(header.data(), true) == kMagicMicros ||
             read_u32(header.data(), true) == kMagicNanos) {
    swap = true;
    nanos = read_u32(header.data(), true) == kMagicNanos;
  } else {
    throw Error(ErrorCode::kMalformedCapture, "bad magic in " + path.string());
  }
  const std::uint32_t network = read_u32(header.data() + 20, swap);
  const bool supported = network == kLinkEthernet || network == kLinkRaw;
  const LinkType link = network == kLinkEthernet ? LinkType::kEthernet : LinkType::kRawIp;

  PcapReadResult result;
  std::array<std::uint8_t, kRecordHeader> rec_header{};
  while (!limit || result.records.size() < *limit) {
    in.read(reinterpret_cast<char*>(rec_header.data()), kRecordHeader);
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    if (got != kRecordHeader) {
      ++result.skipped;
      break;
    }
    const std::uint32_t ts_sec = read_u32(rec_header.data(), swap);
    const std::uint32_t ts_frac = read_u32(rec_header.data() + 4, swap);
    const std::uint32_t incl_len = read_u32(rec_header.data() + 8, swap);
    std::vector<std::uint8_t> frame(incl_len);
    in.read(reinterpret_cast<char*>(frame.data()), incl_len);
    if (static_cast<std::size_t>(in.gcount()) != incl_len) {
      ++result.skipped;
      break;
    }
    if (!supported) {
      ++result.skipped;
      continue;
    }
    const double timestamp =
        static_cast<double>(ts_sec) + static_cast<double>(ts_frac) * (nanos ? 1e-9 : 1e-6);
    auto decoded = decode_frame(std::move(frame), link, timestamp);
    if (decoded) {
      result.records.push_back(std::move(*decoded));
    } else {
      ++result.skipped;
    }
  }
  return result;
}

}  // namespace taonet::ingest
