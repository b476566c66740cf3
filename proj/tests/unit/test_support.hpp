// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace taonet::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("taonet-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_bytes(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void push_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void push_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

/// Classic pcap file bytes: little-endian microsecond format unless
/// `big_endian` is set.
inline std::vector<std::uint8_t> pcap_file(const std::vector<std::vector<std::uint8_t>>& frames,
                                           std::uint32_t link_type, bool big_endian = false) {
  std::vector<std::uint8_t> out;
  auto put32 = [&](std::uint32_t v) { big_endian ? push_be32(out, v) : push_le32(out, v); };
  auto put16 = [&](std::uint16_t v) {
    if (big_endian) {
      out.push_back(static_cast<std::uint8_t>(v >> 8));
      out.push_back(static_cast<std::uint8_t>(v));
    } else {
      out.push_back(static_cast<std::uint8_t>(v));
      out.push_back(static_cast<std::uint8_t>(v >> 8));
    }
  };
  put32(0xA1B2C3D4);
  put16(2);
  put16(4);
  put32(0);
  put32(0);
  put32(65535);
  put32(link_type);
  std::uint32_t ts = 1700000000;
  for (const auto& f : frames) {
    put32(ts++);
    put32(250000);
    put32(static_cast<std::uint32_t>(f.size()));
    put32(static_cast<std::uint32_t>(f.size()));
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

/// IPv4 + TCP packet (no options) carrying `payload`.
inline std::vector<std::uint8_t> ipv4_tcp_packet(std::array<std::uint8_t, 4> src,
                                                 std::array<std::uint8_t, 4> dst,
                                                 std::uint16_t sport, std::uint16_t dport,
                                                 std::uint8_t flags, std::uint16_t window,
                                                 const std::vector<std::uint8_t>& payload,
                                                 std::uint8_t ttl = 64) {
  const std::uint16_t total = static_cast<std::uint16_t>(40 + payload.size());
  std::vector<std::uint8_t> p = {
      0x45, 0x00, static_cast<std::uint8_t>(total >> 8), static_cast<std::uint8_t>(total),
      0x12, 0x34, 0x40, 0x00, ttl, 0x06, 0xBE, 0xEF,
      src[0], src[1], src[2], src[3], dst[0], dst[1], dst[2], dst[3],
      static_cast<std::uint8_t>(sport >> 8), static_cast<std::uint8_t>(sport),
      static_cast<std::uint8_t>(dport >> 8), static_cast<std::uint8_t>(dport),
      0x00, 0x00, 0x10, 0x00, 0x00, 0x00, 0x20, 0x00,
      0x50, flags, static_cast<std::uint8_t>(window >> 8), static_cast<std::uint8_t>(window),
      0xCA, 0xFE, 0x00, 0x00};
  p.insert(p.end(), payload.begin(), payload.end());
  return p;
}

inline std::vector<std::uint8_t> ethernet_frame(const std::vector<std::uint8_t>& ip,
                                                std::uint16_t ether_type = 0x0800) {
  std::vector<std::uint8_t> f = {0x00, 0x11, 0x22, 0x33, 0x44, 0x55, 0x66, 0x77, 0x88, 0x99,
                                 0xAA, 0xBB, static_cast<std::uint8_t>(ether_type >> 8),
                                 static_cast<std::uint8_t>(ether_type)};
  f.insert(f.end(), ip.begin(), ip.end());
  return f;
}

/// Synthetic spec with 32-token samples: ID classes A, B, C and OOD
/// class Z, each with its own payload distribution.
inline nlohmann::json small_spec_json() {
  return nlohmann::json::parse(R"({
    "name": "nn-unit",
    "sequence_length": 32,
    "classes": [
      {"label": "A", "role": "id",
       "header_template": "4500002800004000400600000000000000000000000001bb00000000000000005018020000000000",
       "payload": {"kind": "categorical", "values": [0, 17], "weights": [1, 1]},
       "length": {"mean": 60, "stddev": 4, "min": 40, "max": 200}},
      {"label": "B", "role": "id",
       "header_template": "4500002800004000800600000000000000000000000000500000000000000000501000ff00000000",
       "payload": {"kind": "uniform", "low": 200, "high": 255},
       "length": {"mean": 60, "stddev": 4, "min": 40, "max": 200}},
      {"label": "C", "role": "id",
       "header_template": "4500001c000040004011000000000000000000000035003500080000",
       "payload": {"kind": "uniform", "low": 64, "high": 96},
       "length": {"mean": 30, "stddev": 1, "min": 28, "max": 200}},
      {"label": "Z", "role": "ood",
       "header_template": "4500001c000040004011000000000000000000000035003500080000",
       "payload": {"kind": "uniform", "low": 0, "high": 255},
       "length": {"mean": 40, "stddev": 4, "min": 28, "max": 200}}
    ]})");
}

}  // namespace taonet::testing
