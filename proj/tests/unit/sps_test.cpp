// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <doctest.h>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "taonet/error.hpp"
#include "taonet/ingest/packet.hpp"
#include "taonet/ingest/tokenize.hpp"
#include "taonet/rng.hpp"
#include "taonet/sps/canonicalize.hpp"
#include "taonet/sps/digest.hpp"
#include "taonet/sps/prompt.hpp"
#include "test_support.hpp"

using namespace taonet;
using namespace taonet::sps;
using taonet::testing::TempDir;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected taonet::Error");
  return ErrorCode::kIoFailure;
}

const std::filesystem::path kTemplateDir = std::filesystem::path(TAONET_SOURCE_DIR) / "resources" /
                                           "templates" / "v1";

ingest::LabelSpace chnapp() {
  return {{"QQMail", "QQMusic", "Youku", "TaoBao"},
          {"WeChat", "Weibo"},
          {"Gmail", "Facebook", "Skype", "YouTube"}};
}

// The three published prompt texts, copied verbatim.
const std::map<SpsMode, std::string> kPublished = {
    {SpsMode::kStrict,
     "Classify this encrypted network traffic packet into one of these known application "
     "categories: QQMail, QQMusic, Youku, TaoBao. Consider the traffic packet characteristics "
     "including: 1. Protocol behavior (TCP flags, window size) 2. Packet structure (length, "
     "fragmentation) 3. Encrypted payload patterns. Your output should be exactly one application "
     "name without any additional explanation."},
    {SpsMode::kComplete,
     "Given this encrypted network traffic packet, classify it into one of these possible "
     "applications: QQMail, QQMusic, Youku, TaoBao, WeChat, Weibo. Analyze the characteristics "
     "including TCP protocol behaviors, packet structure patterns, and encrypted payload features. "
     "Consider both transport layer behaviors and application layer patterns when making "
     "prediction. Your output should be exactly one application name."},
    {SpsMode::kExtended,
     "Analyze this encrypted network traffic packet and classify it based on its characteristics. "
     "Consider the following applications across different platforms: QQMail, QQMusic, Youku, "
     "TaoBao, WeChat, Weibo, Gmail, Facebook, Skype, YouTube. Examine the traffic packet features "
     "including protocol behaviors (e.g., TCP flags, window size), packet structures (length, "
     "fragmentation), and encrypted payload patterns. Provide exactly one application name as "
     "output."},
};

ingest::PacketRecord tcp_record(const std::vector<std::uint8_t>& payload,
                                std::array<std::uint8_t, 4> src = {10, 0, 0, 1}) {
  auto bytes = testing::ipv4_tcp_packet(src, {10, 0, 0, 2}, 40001, 443,
                                        ingest::tcp_flag::kAck | ingest::tcp_flag::kPsh, 8192,
                                        payload);
  auto rec = ingest::decode_ip_packet(std::move(bytes), 0, ingest::LinkType::kRawIp);
  REQUIRE(rec.has_value());
  return *rec;
}

// Independent entropy: natural-log form converted to bits.
double entropy_oracle(const std::vector<std::uint8_t>& bytes) {
  std::map<int, double> counts;
  for (auto b : bytes) counts[b] += 1.0;
  double h = 0.0;
  for (const auto& [value, c] : counts) {
    const double p = c / static_cast<double>(bytes.size());
    h += p * std::log(1.0 / p);
  }
  return h / std::log(2.0);
}

std::size_t edit_oracle(const std::string& a, const std::string& b) {
  std::function<std::size_t(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) {
    if (i == 0) return j;
    if (j == 0) return i;
    return std::min({go(i - 1, j) + 1, go(i, j - 1) + 1,
                     go(i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0u : 1u)});
  };
  return go(a.size(), b.size());
}

std::string read_template(const std::string& name) {
  auto text = testing::read_text(kTemplateDir / name);
  while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.pop_back();
  return text;
}

// Splits a template at its two slots and reassembles it by hand.
std::string substitute_by_hand(const std::string& tmpl, const std::string& list,
                               const std::string& digest) {
  const auto c = tmpl.find("{{candidates}}");
  const auto d = tmpl.find("{{digest}}");
  REQUIRE(c < d);
  return tmpl.substr(0, c) + list + tmpl.substr(c + 14, d - c - 14) + digest + tmpl.substr(d + 10);
}

}  // namespace

TEST_CASE("candidate sets follow the mode definitions") {
  const auto space = chnapp();
  CHECK(candidate_labels(SpsMode::kStrict, space) == std::vector<std::string>{"WeChat", "Weibo"});
  CHECK(candidate_labels(SpsMode::kStrict, space, StrictSource::kId) == space.id_labels);
  CHECK(candidate_labels(SpsMode::kComplete, space) ==
        std::vector<std::string>{"QQMail", "QQMusic", "Youku", "TaoBao", "WeChat", "Weibo"});
  const auto ext = candidate_labels(SpsMode::kExtended, space);
  CHECK(ext.size() == 10);
  CHECK(std::vector<std::string>(ext.end() - 4, ext.end()) ==
        std::vector<std::string>{"Gmail", "Facebook", "Skype", "YouTube"});

  auto no_ood = space;
  no_ood.ood_labels.clear();
  CHECK(code_of([&] { candidate_labels(SpsMode::kStrict, no_ood); }) == ErrorCode::kMissingLabels);
  auto no_ext = space;
  no_ext.extended_labels.clear();
  CHECK(code_of([&] { candidate_labels(SpsMode::kExtended, no_ext); }) ==
        ErrorCode::kMissingLabels);
  CHECK(code_of([&] { candidate_labels(SpsMode::kComplete, ingest::LabelSpace{}); }) ==
        ErrorCode::kMissingLabels);

  // Extended labels that repeat an existing one appear once.
  auto dup = space;
  dup.extended_labels.push_back("WeChat");
  CHECK(candidate_labels(SpsMode::kExtended, dup).size() == 10);
}

TEST_CASE("candidate sets nest for random label spaces") {
  Rng rng(8);
  const std::vector<std::string> pool{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  for (int trial = 0; trial < 300; ++trial) {
    auto names = pool;
    rng.shuffle(names);
    ingest::LabelSpace s;
    const std::size_t n_id = 1 + rng.index(4), n_ood = 1 + rng.index(3), n_ext = 1 + rng.index(3);
    s.id_labels.assign(names.begin(), names.begin() + n_id);
    s.ood_labels.assign(names.begin() + n_id, names.begin() + n_id + n_ood);
    // Extended labels may overlap the others.
    for (std::size_t i = 0; i < n_ext; ++i) s.extended_labels.push_back(pool[rng.index(pool.size())]);
    for (auto source : {StrictSource::kOod, StrictSource::kId}) {
      const auto t1 = candidate_labels(SpsMode::kStrict, s, source);
      const auto t2 = candidate_labels(SpsMode::kComplete, s, source);
      const auto t3 = candidate_labels(SpsMode::kExtended, s, source);
      for (const auto& l : t1) CHECK(std::find(t2.begin(), t2.end(), l) != t2.end());
      for (const auto& l : t2) CHECK(std::find(t3.begin(), t3.end(), l) != t3.end());
      auto sorted = t3;
      std::sort(sorted.begin(), sorted.end());
      CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
  }
}

TEST_CASE("rendered prompts reproduce the published texts") {
  const auto space = chnapp();
  const auto digest = build_digest(tcp_record({'h', 'i'}), ingest::tokenize_packet(tcp_record({'h', 'i'}), 64));
  const auto block = "\n\nPacket features:\n" + serialize_digest(digest) + "\n\n";
  for (auto mode : kAllModes) {
    const auto source = mode == SpsMode::kStrict ? StrictSource::kId : StrictSource::kOod;
    const auto b = render_prompt(mode, space, digest, source);
    auto text = b.rendered_text;
    const auto at = text.find(block);
    REQUIRE(at != std::string::npos);
    text.replace(at, block.size(), " ");
    CHECK(text == kPublished.at(mode));
  }
  const auto strict = render_prompt(SpsMode::kStrict, space, digest, StrictSource::kId);
  CHECK(strict.rendered_text.starts_with(
      "Classify this encrypted network traffic packet into one of these known application "
      "categories: QQMail, QQMusic, Youku, TaoBao."));
  CHECK(strict.rendered_text.ends_with("exactly one application name without any additional "
                                       "explanation."));
}

TEST_CASE("rendered prompts byte-match the template files") {
  const auto space = chnapp();
  const auto digest = build_digest(tcp_record({1, 2, 3}), ingest::tokenize_packet(tcp_record({1, 2, 3}), 64));
  const std::map<SpsMode, std::string> files = {{SpsMode::kStrict, "strict.txt"},
                                                {SpsMode::kComplete, "complete.txt"},
                                                {SpsMode::kExtended, "extended.txt"}};
  for (auto mode : kAllModes) {
    const auto tmpl = read_template(files.at(mode));
    const auto b = render_prompt(mode, space, digest);
    std::string list;
    for (const auto& c : b.candidates) list += (list.empty() ? "" : ", ") + c;
    CHECK(b.rendered_text == substitute_by_hand(tmpl, list, serialize_digest(digest)));
    CHECK(b.template_version == "v1");
    CHECK(b.template_sha256 == sha256_hex(tmpl));
    CHECK(b.template_sha256.size() == 64);
    CHECK(render_prompt(mode, space, digest).rendered_text == b.rendered_text);
  }
  // Known vector for the hash itself.
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("template files can override the built-ins") {
  TempDir dir("tpl");
  testing::write_bytes(dir / "t.txt", {'P', 'i', 'c', 'k', ' ', '{', '{', 'c', 'a', 'n', 'd', 'i', 'd',
                                       'a', 't', 'e', 's', '}', '}', ':', '{', '{', 'd', 'i', 'g', 'e',
                                       's', 't', '}', '}', '\n', '\n'});
  const auto t = load_template(SpsMode::kComplete, dir / "t.txt");
  CHECK(t.text == "Pick {{candidates}}:{{digest}}");
  CHECK(t.version == "file");
  FeatureDigest d;
  d.extra = {{"k", "v"}};
  const auto b = render_prompt(t, chnapp(), d);
  CHECK(b.rendered_text.starts_with("Pick QQMail, QQMusic, Youku, TaoBao, WeChat, Weibo:protocol:"));
  CHECK(b.rendered_text.ends_with("k:v"));

  TemplateSet set;
  set.set(t);
  CHECK(set.get(SpsMode::kComplete).text == t.text);
  CHECK(set.get(SpsMode::kStrict).text == builtin_template(SpsMode::kStrict).text);

  testing::write_bytes(dir / "bad.txt", {'x', '{', '{', 'd', 'i', 'g', 'e', 's', 't', '}', '}'});
  CHECK(code_of([&] { load_template(SpsMode::kStrict, dir / "bad.txt"); }) ==
        ErrorCode::kInvalidConfig);
  CHECK(code_of([&] { load_template(SpsMode::kStrict, dir / "none.txt"); }) ==
        ErrorCode::kFileNotFound);

  // A label holding a slot marker is inserted literally.
  ingest::LabelSpace odd{{"A"}, {"{{digest}}"}, {}};
  const auto r = render_prompt(t, odd, d);
  CHECK(r.rendered_text == "Pick A, {{digest}}:" + serialize_digest(d));
}

TEST_CASE("mode and source names parse") {
  for (auto m : kAllModes) CHECK(parse_mode(mode_name(m)) == m);
  CHECK(parse_mode("STRICT") == SpsMode::kStrict);
  CHECK_FALSE(parse_mode("loose").has_value());
  CHECK(parse_strict_source("ID") == StrictSource::kId);
  CHECK_FALSE(parse_strict_source("both").has_value());
}

TEST_CASE("digest statistics") {
  SUBCASE("all-zero payload has zero entropy") {
    const auto rec = tcp_record(std::vector<std::uint8_t>(100, 0));
    const auto d = build_digest(rec, ingest::tokenize_packet(rec, 128));
    CHECK(d.entropy == 0.0);
    CHECK(d.printable_fraction == 0.0);
    CHECK(d.payload_length == 100);
  }
  SUBCASE("every byte value once gives eight bits") {
    std::vector<std::uint8_t> payload(256);
    for (int i = 0; i < 256; ++i) payload[i] = static_cast<std::uint8_t>(i);
    const auto rec = tcp_record(payload);
    const auto d = build_digest(rec, ingest::tokenize_packet(rec, 128));
    CHECK(std::abs(d.entropy - entropy_oracle(payload)) < 1e-12);
    CHECK(std::abs(d.entropy - 8.0) <= 0.01);
    CHECK(d.printable_fraction == doctest::Approx(95.0 / 256.0));
  }
  SUBCASE("ASCII payload is fully printable") {
    const std::string text = "GET /index.html HTTP/1.1 Host: example";
    const auto rec = tcp_record(std::vector<std::uint8_t>(text.begin(), text.end()));
    const auto d = build_digest(rec, ingest::tokenize_packet(rec, 128));
    CHECK(d.printable_fraction == 1.0);
  }
  SUBCASE("random payloads match the entropy oracle and stay in range") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::uint8_t> payload(1 + rng.index(300));
      const std::size_t alphabet = 1 + rng.index(256);
      for (auto& b : payload) b = static_cast<std::uint8_t>(rng.index(alphabet));
      const double h = byte_entropy(payload);
      CHECK(std::abs(h - entropy_oracle(payload)) < 1e-9);
      CHECK(h >= 0.0);
      CHECK(h <= 8.0);
      const double p = printable_fraction(payload);
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
}

TEST_CASE("digest header fields and serialization") {
  const std::vector<std::uint8_t> payload{'a', 'b', 0x00, 0xff};
  const auto rec = tcp_record(payload);
  const auto sample = ingest::tokenize_packet(rec, 64);
  const auto d = build_digest(rec, sample);
  CHECK(d.protocol == "tcp");
  CHECK(d.dst_port == 443);
  CHECK(d.tcp_flags == "PSH|ACK");
  CHECK(d.tcp_window == 8192);
  CHECK(d.ttl == 64);
  CHECK(d.total_length == 44);
  CHECK(d.payload_length == 4);
  CHECK_FALSE(d.fragmented);
  CHECK(d.entropy == 2.0);
  CHECK(d.printable_fraction == 0.5);
  // 44 bytes on the wire, preview capped at 32; source address zeroed.
  CHECK(d.hex_preview.size() == 64);
  CHECK(d.hex_preview.substr(0, 8) == "4500002c");
  CHECK(d.hex_preview.substr(24, 8) == "00000000");

  const auto text = serialize_digest(d);
  CHECK(text ==
        "protocol:tcp\nip_version:4\ndst_port:443\ntcp_flags:PSH|ACK\ntcp_window:8192\nttl:64\n"
        "total_length:44\npayload_length:4\nfragmented:no\nentropy:2.000\n"
        "printable_fraction:0.500\nhex_preview:" +
            d.hex_preview);

  // Packets that differ only in source address digest identically.
  const auto other = tcp_record(payload, {192, 168, 9, 9});
  CHECK(build_digest(other, ingest::tokenize_packet(other, 64)) == d);
  // Rebuilding the header summary from tokens gives the same digest.
  CHECK(build_digest(sample) == d);

  auto routed = d;
  routed.extra.emplace_back("detector_route", "OOD");
  CHECK(serialize_digest(routed).ends_with("\ndetector_route:OOD"));
}

TEST_CASE("digest of UDP and undecodable samples") {
  std::vector<std::uint8_t> udp = {0x45, 0x00, 0x00, 0x20, 0, 0, 0x40, 0, 58, 17, 0, 0,
                                   1, 2, 3, 4, 5, 6, 7, 8, 0x13, 0x88, 0x07, 0x8f, 0x00, 0x0c,
                                   0, 0, 'x', 'y', 'z', 'w'};
  const auto rec = ingest::decode_ip_packet(udp, 0, ingest::LinkType::kRawIp);
  REQUIRE(rec.has_value());
  const auto d = build_digest(*rec, ingest::tokenize_packet(*rec, 64));
  CHECK(d.protocol == "udp");
  CHECK(d.dst_port == 1935);
  CHECK_FALSE(d.tcp_flags.has_value());
  const auto text = serialize_digest(d);
  CHECK(text.find("tcp_") == std::string::npos);
  CHECK(text.find("dst_port:1935") != std::string::npos);
  CHECK(d.printable_fraction == 1.0);

  ingest::TrafficSample junk;
  junk.tokens = {0x00, 0x00, 0x00, 0x00, ingest::kPadToken, ingest::kPadToken};
  const auto j = build_digest(junk);
  CHECK(j.protocol == "unknown");
  CHECK(j.entropy == 0.0);
  CHECK(j.hex_preview == "00000000");
}

TEST_CASE("ethernet trailer bytes are not payload") {
  const auto ip = testing::ipv4_tcp_packet({1, 1, 1, 1}, {2, 2, 2, 2}, 1, 2, 0x10, 1, {'a', 'a'});
  auto frame = testing::ethernet_frame(ip);
  frame.resize(60, 0xEE);  // minimum Ethernet frame size
  const auto rec = ingest::decode_frame(frame, ingest::LinkType::kEthernet);
  REQUIRE(rec.has_value());
  const auto d = build_digest(*rec, ingest::tokenize_packet(*rec, 64));
  CHECK(d.entropy == 0.0);
  CHECK(d.printable_fraction == 1.0);
}

TEST_CASE("canonicalization examples") {
  const std::vector<std::string> chn{"QQMail", "QQMusic", "Youku", "TaoBao", "WeChat", "Weibo"};
  CHECK(canonicalize_label("WeChat", chn) == "WeChat");
  CHECK(canonicalize_label("qq music!", chn) == "QQMusic");
  CHECK(canonicalize_label("  wechat ", chn) == "WeChat");
  CHECK(canonicalize_label("Internet Explorer", chn) == "UNMAPPED");
  CHECK(canonicalize_label("", chn) == "UNMAPPED");
  CHECK(canonicalize_label("!!!", chn) == "UNMAPPED");
  // One edit in seven characters is within the 0.2 bound, two are not.
  CHECK(canonicalize_label("WeChatt", chn) == "WeChat");
  CHECK(canonicalize_label("QQMusc", chn) == "QQMusic");
  CHECK(canonicalize_label("QQMxsxc", chn) == "UNMAPPED");
  CHECK(canonicalize_label("Weibo.", chn) == "Weibo");
}

TEST_CASE("edit distance matches a recursive oracle") {
  Rng rng(12);
  const std::string alphabet = "abc";
  for (int trial = 0; trial < 300; ++trial) {
    std::string a, b;
    for (std::size_t i = rng.index(7); i > 0; --i) a.push_back(alphabet[rng.index(3)]);
    for (std::size_t i = rng.index(7); i > 0; --i) b.push_back(alphabet[rng.index(3)]);
    CHECK(edit_distance(a, b) == edit_oracle(a, b));
  }
  CHECK(edit_distance("kitten", "sitting") == 3);
}

TEST_CASE("canonicalization is idempotent and respects the ratio bound") {
  const std::vector<std::string> cands{"QQMail", "QQMusic", "Youku", "TaoBao", "WeChat", "Weibo"};
  Rng rng(31);
  const std::string chars = "abcdeiklmoqsuwyQWTB !";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    if (trial % 2 == 0) {
      text = cands[rng.index(cands.size())];
      const std::size_t edits = rng.index(3);
      for (std::size_t e = 0; e < edits && !text.empty(); ++e) {
        text[rng.index(text.size())] = chars[rng.index(chars.size())];
      }
    } else {
      for (std::size_t i = 1 + rng.index(10); i > 0; --i) text.push_back(chars[rng.index(chars.size())]);
    }
    const auto first = canonicalize_label(text, cands);
    if (first == kUnmapped) continue;
    CHECK(canonicalize_label(first, cands) == first);
    const auto n = normalize_label(text), c = normalize_label(first);
    const double ratio =
        static_cast<double>(edit_oracle(n, c)) / static_cast<double>(std::max(n.size(), c.size()));
    CHECK(ratio <= 0.2);
  }
}

TEST_CASE("label inventories of the three benchmarks canonicalize to themselves") {
  const std::vector<std::vector<std::string>> inventories = {
      {"QQMail", "QQMusic", "Youku", "TaoBao", "WeChat", "Weibo"},
      {"Gmail", "Facebook", "FTPS", "Hangouts", "Hangout", "Netflix", "BitTorrent", "SFTP", "Skype",
       "VoipBuster", "YouTube", "Vimeo", "Spotify"},
      {"Gmail", "Facebook", "FTP", "Hangout", "P2P", "POP", "Skype", "Spotify", "SSL", "Thunderbird",
       "Vimeo", "YouTube"}};
  std::vector<std::pair<std::string, std::string>> close;
  for (const auto& inv : inventories) {
    for (const auto& l : inv) CHECK(canonicalize_label(l, inv) == l);
    for (std::size_t i = 0; i < inv.size(); ++i) {
      for (std::size_t j = i + 1; j < inv.size(); ++j) {
        const auto a = normalize_label(inv[i]), b = normalize_label(inv[j]);
        const double ratio = static_cast<double>(edit_distance(a, b)) /
                             static_cast<double>(std::max(a.size(), b.size()));
        if (ratio <= kMaxEditRatio) close.emplace_back(inv[i], inv[j]);
      }
    }
  }
  // Only the two Hangouts spellings sit inside each other's tolerance.
  CHECK(close == std::vector<std::pair<std::string, std::string>>{{"Hangouts", "Hangout"}});
}
