// Copyright 2026 The taonet Authors
// SPDX-License-Identifier: Apache-2.0

#include "taonet/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "taonet/error.hpp"

namespace taonet::nn {
namespace {

constexpr char kMagic[] = "TAONET";
constexpr std::size_t kMagicLength = 6;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class Reader {
 public:
  explicit Reader(const std::string& data) : data_(data) {}

  void need(std::size_t n, const char* what) const {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorCode::kCorruptPayload, std::string("checkpoint truncated in ") + what);
    }
  }
  std::uint64_t uint(std::size_t bytes, const char* what) {
    need(bytes, what);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += bytes;
    return v;
  }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  const std::string& data_;
  std::size_t pos_ = 0;
};

Component parse_component(const std::string& tag) {
  if (tag == "detector") return Component::kDetector;
  if (tag == "classifier") return Component::kClassifier;
  throw Error(ErrorCode::kCorruptPayload, "unknown checkpoint component '" + tag + "'");
}

}  // namespace

std::string component_name(Component component) {
  return component == Component::kDetector ? "detector" : "classifier";
}

void Checkpoint::append(const ParameterSet& params) {
  std::size_t offset = payload.size();
  for (const auto& spec : params.manifest()) {
    TensorSpec copy = spec;
    copy.offset = offset;
    offset += spec.numel();
    manifest.push_back(std::move(copy));
  }
  for (double v : params.flat()) payload.push_back(static_cast<float>(v));
}

void Checkpoint::restore(ParameterSet& params) const {
  for (std::size_t i = 0; i < params.manifest().size(); ++i) {
    const auto& want = params.spec(i);
    const TensorSpec* found = nullptr;
    for (const auto& have : manifest) {
      if (have.name == want.name) {
        found = &have;
        break;
      }
    }
    if (found == nullptr) {
      throw Error(ErrorCode::kCorruptPayload, "checkpoint lacks tensor '" + want.name + "'");
    }
    if (found->shape != want.shape) {
      throw Error(ErrorCode::kCorruptPayload, "tensor '" + want.name + "' has an unexpected shape");
    }
    auto dst = params.view(i);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = payload[found->offset + k];
  }
}

void write_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  nlohmann::json manifest = nlohmann::json::array();
  for (const auto& spec : checkpoint.manifest) {
    manifest.push_back({{"name", spec.name}, {"shape", spec.shape}});
  }
  const nlohmann::json header = {
      {"manifest", manifest},
      {"metadata",
       {{"seed", checkpoint.metadata.seed},
        {"epochs", checkpoint.metadata.epochs},
        {"loss_curve", checkpoint.metadata.loss_curve}}},
      {"extras", checkpoint.extras}};
  const std::string header_text = header.dump();
  const std::string tag = component_name(checkpoint.component);

  std::string out(kMagic, kMagicLength);
  put_u32(out, checkpoint.version);
  put_u32(out, static_cast<std::uint32_t>(tag.size()));
  out += tag;
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  put_u64(out, checkpoint.payload.size());
  for (float f : checkpoint.payload) put_u32(out, std::bit_cast<std::uint32_t>(f));

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::kIoFailure, "cannot write checkpoint " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw Error(ErrorCode::kIoFailure, "write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kFileNotFound, "checkpoint not found: " + path.string());
  const std::string data((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());

  Reader in(data);
  if (in.bytes(kMagicLength, "magic") != std::string(kMagic, kMagicLength)) {
    throw Error(ErrorCode::kCorruptPayload, "not a checkpoint file: " + path.string());
  }
  Checkpoint ck;
  ck.version = static_cast<std::uint32_t>(in.uint(4, "version"));
  if (ck.version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, "checkpoint version " + std::to_string(ck.version) +
                                                 " (supported: " +
                                                 std::to_string(kCheckpointVersion) + ")");
  }
  const auto tag_len = in.uint(4, "component tag");
  ck.component = parse_component(in.bytes(tag_len, "component tag"));
  const auto header_len = in.uint(4, "header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(in.bytes(header_len, "header"));
    std::size_t offset = 0;
    for (const auto& entry : header.at("manifest")) {
      TensorSpec spec{entry.at("name").get<std::string>(),
                      entry.at("shape").get<std::vector<std::size_t>>(), offset};
      offset += spec.numel();
      ck.manifest.push_back(std::move(spec));
    }
    const auto& meta = header.at("metadata");
    ck.metadata.seed = meta.at("seed").get<std::uint64_t>();
    ck.metadata.epochs = meta.at("epochs").get<std::size_t>();
    ck.metadata.loss_curve = meta.at("loss_curve").get<std::vector<double>>();
    ck.extras = header.value("extras", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kCorruptPayload, std::string("bad checkpoint header: ") + e.what());
  }

  std::size_t expected = 0;
  for (const auto& spec : ck.manifest) expected += spec.numel();
  const auto count = in.uint(8, "payload length");
  if (count != expected) {
    throw Error(ErrorCode::kCorruptPayload, "payload holds " + std::to_string(count) +
                                                " values, manifest expects " +
                                                std::to_string(expected));
  }
  if (in.remaining() != count * 4) {
    throw Error(ErrorCode::kCorruptPayload, "payload is " + std::to_string(in.remaining()) +
                                                " bytes, expected " + std::to_string(count * 4));
  }
  ck.payload.resize(count);
  for (auto& f : ck.payload) f = std::bit_cast<float>(static_cast<std::uint32_t>(in.uint(4, "payload")));
  return ck;
}

}  // namespace taonet::nn
