// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Model file layout, all integers little-endian:
//
//   "SRMN"            4 bytes magic
//   u32               format version (1)
//   u32               header length in bytes
//   header            UTF-8 JSON: {"config": {...}, "tensors": [{name, shape, offset}]}
//   payload           float32 tensors in manifest order; offsets are relative
//                     to the start of the payload
//   u32               CRC-32 of every preceding byte

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "srmnet/graph.hpp"

namespace srmnet {

inline constexpr char kModelMagic[4] = {'S', 'R', 'M', 'N'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

inline nlohmann::ordered_json config_to_json(const MnetConfig& c) {
  nlohmann::ordered_json j;
  j["base_channels"] = c.base_channels;
  j["scales"] = c.scales;
  j["blocks_per_srb"] = c.blocks_per_srb;
  j["skff_reduction"] = c.skff_reduction;
  j["epsilon"] = c.epsilon;
  j["global_residual"] = c.global_residual;
  j["leaky_slope"] = c.leaky_slope;
  return j;
}

inline MnetConfig config_from_json(const nlohmann::ordered_json& j) {
  MnetConfig c;
  try {
    c.base_channels = j.at("base_channels").get<std::size_t>();
    c.scales = j.at("scales").get<std::size_t>();
    c.blocks_per_srb = j.at("blocks_per_srb").get<std::size_t>();
    c.skff_reduction = j.at("skff_reduction").get<std::size_t>();
    c.epsilon = j.at("epsilon").get<double>();
    c.global_residual = j.at("global_residual").get<bool>();
    c.leaky_slope = j.at("leaky_slope").get<double>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptFile, std::string("model config: ") + e.what());
  }
  return c;
}

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
}

inline std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in bounded chunks.
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace detail

/// Serializes parameters (stored as float32) and their configuration.
template <typename T>
std::vector<std::uint8_t> encode_model(const ModelParams<T>& params, const MnetConfig& config) {
  nlohmann::ordered_json header;
  header["config"] = config_to_json(config);
  header["tensors"] = nlohmann::ordered_json::array();
  std::size_t offset = 0;
  for (const auto& e : params.entries()) {
    const Shape& s = e.var.value().shape();
    nlohmann::ordered_json t;
    t["name"] = e.name;
    t["shape"] = {s.n, s.c, s.h, s.w};
    t["offset"] = offset;
    header["tensors"].push_back(std::move(t));
    offset += s.numel() * sizeof(float);
  }
  const std::string text = header.dump();

  std::vector<std::uint8_t> out;
  out.reserve(16 + text.size() + offset);
  out.insert(out.end(), kModelMagic, kModelMagic + 4);
  detail::put_u32(out, kModelFormatVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& e : params.entries()) {
    for (T v : e.var.value().data()) {
      detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  detail::put_u32(out, detail::crc32_of(out.data(), out.size()));
  return out;
}

struct LoadedModel {
  ModelParams<float> params;
  MnetConfig config;
};

inline LoadedModel decode_model(const std::vector<std::uint8_t>& bytes) {
  require(bytes.size() >= 16, ErrorCode::CorruptFile, "model file too short");
  const std::size_t body = bytes.size() - 4;
  require(detail::get_u32(bytes.data() + body) == detail::crc32_of(bytes.data(), body),
          ErrorCode::CorruptFile, "checksum mismatch");
  require(std::memcmp(bytes.data(), kModelMagic, 4) == 0, ErrorCode::CorruptFile, "bad magic");
  const std::uint32_t version = detail::get_u32(bytes.data() + 4);
  require(version == kModelFormatVersion, ErrorCode::CorruptFile,
          "unsupported format version " + std::to_string(version));
  const std::size_t header_len = detail::get_u32(bytes.data() + 8);
  require(12 + header_len <= body, ErrorCode::CorruptFile, "header overruns file");

  nlohmann::ordered_json header;
  try {
    header = nlohmann::ordered_json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::CorruptFile, std::string("header: ") + e.what());
  }
  require(header.contains("config") && header.contains("tensors") && header["tensors"].is_array(),
          ErrorCode::CorruptFile, "header missing config or tensors");

  LoadedModel model{{}, config_from_json(header["config"])};
  const LayerGraph graph = build_mnet_graph(model.config);
  const auto& manifest = header["tensors"];
  require(manifest.size() == graph.params().size(), ErrorCode::TensorCountMismatch,
          "file has " + std::to_string(manifest.size()) + " tensors, configuration needs " +
              std::to_string(graph.params().size()));

  const std::size_t payload = 12 + header_len;
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const ParamSpec& spec = graph.params()[i];
    std::string name;
    std::vector<std::size_t> dims;
    std::size_t offset = 0;
    try {
      name = manifest[i].at("name").get<std::string>();
      dims = manifest[i].at("shape").get<std::vector<std::size_t>>();
      offset = manifest[i].at("offset").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::CorruptFile, std::string("manifest: ") + e.what());
    }
    require(name == spec.name, ErrorCode::TensorCountMismatch,
            "tensor " + std::to_string(i) + " is '" + name + "', expected '" + spec.name + "'");
    require(dims.size() == 4, ErrorCode::CorruptFile, name + ": shape must have 4 dims");
    const Shape shape{dims[0], dims[1], dims[2], dims[3]};
    require(shape == spec.shape, ErrorCode::CorruptFile,
            name + ": shape " + shape.str() + " expected " + spec.shape.str());
    const std::size_t start = payload + offset;
    require(start + shape.numel() * 4 <= body, ErrorCode::CorruptFile, name + ": payload overrun");
    std::vector<float> data(shape.numel());
    for (std::size_t k = 0; k < data.size(); ++k) {
      data[k] = std::bit_cast<float>(detail::get_u32(bytes.data() + start + 4 * k));
    }
    model.params.add(spec.name, Tensor<float>(shape, std::move(data)), spec.init);
  }
  return model;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file_bytes(const std::filesystem::path& path,
                             const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrorCode::IoError, "short write to " + path.string());
}

template <typename T>
void save_model(const ModelParams<T>& params, const MnetConfig& config,
                const std::filesystem::path& path) {
  write_file_bytes(path, encode_model(params, config));
}

inline LoadedModel load_model(const std::filesystem::path& path) {
  return decode_model(read_file_bytes(path));
}

}  // namespace srmnet
