// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "srmnet/serialize.hpp"
#include "srmnet/tensor.hpp"

namespace srmnet {

/// RGB image with interleaved channel values in [0, 1].
struct ImageBuffer {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> pixels;  // (y * width + x) * 3 + channel

  static constexpr std::size_t channels = 3;

  float& at(std::size_t x, std::size_t y, std::size_t c) { return pixels[(y * width + x) * 3 + c]; }
  float at(std::size_t x, std::size_t y, std::size_t c) const {
    return pixels[(y * width + x) * 3 + c];
  }
};

/// Quantizes [0,1] to 8 bits: clamp, scale by 255, round half up.
inline std::uint8_t quantize_unit(float v) {
  const double clamped = std::clamp(static_cast<double>(v), 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(clamped * 255.0 + 0.5));
}

namespace detail {

// Reads one PPM header token, skipping whitespace and '#' comment lines.
inline std::string ppm_token(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  for (;;) {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    if (pos < bytes.size() && bytes[pos] == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      continue;
    }
    break;
  }
  std::string token;
  while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#') {
    token.push_back(static_cast<char>(bytes[pos++]));
  }
  return token;
}

inline std::size_t ppm_number(const std::string& token, const char* what) {
  require(!token.empty() && std::all_of(token.begin(), token.end(),
                                        [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }),
          ErrorCode::UnsupportedFormat, std::string("PPM ") + what + " is not a number");
  require(token.size() <= 9, ErrorCode::UnsupportedFormat, std::string("PPM ") + what + " too large");
  return std::stoul(token);
}

}  // namespace detail

inline ImageBuffer decode_ppm(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  require(detail::ppm_token(bytes, pos) == "P6", ErrorCode::UnsupportedFormat,
          "only binary PPM (P6) is supported");
  ImageBuffer image;
  image.width = detail::ppm_number(detail::ppm_token(bytes, pos), "width");
  image.height = detail::ppm_number(detail::ppm_token(bytes, pos), "height");
  const std::size_t maxval = detail::ppm_number(detail::ppm_token(bytes, pos), "maxval");
  require(maxval == 255, ErrorCode::UnsupportedFormat,
          "maxval " + std::to_string(maxval) + " unsupported, need 255");
  require(image.width > 0 && image.height > 0, ErrorCode::UnsupportedFormat, "empty image");
  require(pos < bytes.size() && std::isspace(bytes[pos]), ErrorCode::TruncatedPayload,
          "missing header terminator");
  ++pos;
  const std::size_t count = image.width * image.height * 3;
  require(bytes.size() - pos >= count, ErrorCode::TruncatedPayload,
          "payload has " + std::to_string(bytes.size() - pos) + " bytes, need " +
              std::to_string(count));
  image.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i) image.pixels[i] = static_cast<float>(bytes[pos + i]) / 255.0f;
  return image;
}

inline std::vector<std::uint8_t> encode_ppm(const ImageBuffer& image) {
  const std::string header =
      "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(header.size() + image.pixels.size());
  for (float v : image.pixels) out.push_back(quantize_unit(v));
  return out;
}

inline ImageBuffer load_ppm(const std::filesystem::path& path) {
  return decode_ppm(read_file_bytes(path));
}

inline void save_ppm(const ImageBuffer& image, const std::filesystem::path& path) {
  write_file_bytes(path, encode_ppm(image));
}

/// Scans a directory for *.ppm files, sorted by filename.
inline std::vector<std::filesystem::path> list_ppm_files(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorCode::EmptyDataset,
          dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

/// (1, 3, H, W) tensor view of an image.
template <typename T = float>
Tensor<T> image_to_tensor(const ImageBuffer& image) {
  Tensor<T> t({1, 3, image.height, image.width});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < image.height; ++y)
      for (std::size_t x = 0; x < image.width; ++x) t.at(0, c, y, x) = static_cast<T>(image.at(x, y, c));
  return t;
}

/// First sample of a (B, 3, H, W) tensor as an image (values unclamped).
template <typename T>
ImageBuffer tensor_to_image(const Tensor<T>& t, std::size_t sample = 0) {
  const Shape& s = t.shape();
  require(s.c == 3 && sample < s.n, ErrorCode::ShapeMismatch, "tensor_to_image: " + s.str());
  ImageBuffer image{s.w, s.h, std::vector<float>(s.w * s.h * 3)};
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < s.h; ++y)
      for (std::size_t x = 0; x < s.w; ++x) image.at(x, y, c) = static_cast<float>(t.at(sample, c, y, x));
  return image;
}

namespace detail {
// Mirror index without repeating the edge sample: -1 -> 1, n -> n - 2.
inline std::size_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return static_cast<std::size_t>(i < n ? i : period - i);
}
}  // namespace detail

/// Reflect-pads height and width at the bottom/right up to the next multiple.
template <typename T>
Tensor<T> reflect_pad_to_multiple(const Tensor<T>& x, std::size_t multiple) {
  const Shape& s = x.shape();
  const std::size_t h = (s.h + multiple - 1) / multiple * multiple;
  const std::size_t w = (s.w + multiple - 1) / multiple * multiple;
  if (h == s.h && w == s.w) return x;
  Tensor<T> out({s.n, s.c, h, w});
  for (std::size_t b = 0; b < s.n; ++b)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < h; ++y) {
        const std::size_t sy = detail::reflect_index(static_cast<std::ptrdiff_t>(y),
                                                     static_cast<std::ptrdiff_t>(s.h));
        for (std::size_t xx = 0; xx < w; ++xx) {
          const std::size_t sx = detail::reflect_index(static_cast<std::ptrdiff_t>(xx),
                                                       static_cast<std::ptrdiff_t>(s.w));
          out.at(b, c, y, xx) = x.at(b, c, sy, sx);
        }
      }
  return out;
}

/// Top-left crop to height x width.
template <typename T>
Tensor<T> crop(const Tensor<T>& x, std::size_t height, std::size_t width) {
  const Shape& s = x.shape();
  require(height <= s.h && width <= s.w, ErrorCode::ShapeMismatch, "crop larger than " + s.str());
  if (height == s.h && width == s.w) return x;
  Tensor<T> out({s.n, s.c, height, width});
  for (std::size_t b = 0; b < s.n; ++b)
    for (std::size_t c = 0; c < s.c; ++c)
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t xx = 0; xx < width; ++xx) out.at(b, c, y, xx) = x.at(b, c, y, xx);
  return out;
}

}  // namespace srmnet
