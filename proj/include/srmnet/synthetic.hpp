// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Procedural RGB scenes for smoke tests and demos: a smooth colour gradient
// overlaid with flat-shaded discs and rectangles plus a faint stripe texture.
// Piecewise-smooth content with sharp edges, which is what a denoiser has to
// preserve.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "srmnet/image.hpp"
#include "srmnet/random.hpp"

namespace srmnet {

inline ImageBuffer synthetic_image(std::size_t width, std::size_t height, std::uint64_t seed) {
  Rng rng(mix_seed(seed, 0x5CE9Eull));
  ImageBuffer image{width, height, std::vector<float>(width * height * 3)};

  std::array<double, 3> base{}, slope_x{}, slope_y{};
  for (std::size_t c = 0; c < 3; ++c) {
    base[c] = rng.uniform(0.2, 0.8);
    slope_x[c] = rng.uniform(-0.3, 0.3);
    slope_y[c] = rng.uniform(-0.3, 0.3);
  }
  const double stripe_freq = rng.uniform(0.05, 0.25);
  const double stripe_angle = rng.uniform(0.0, std::numbers::pi);
  const double stripe_amp = rng.uniform(0.02, 0.08);
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const double u = static_cast<double>(x) / static_cast<double>(width) - 0.5;
      const double v = static_cast<double>(y) / static_cast<double>(height) - 0.5;
      const double stripe =
          stripe_amp * std::sin(stripe_freq * (std::cos(stripe_angle) * x + std::sin(stripe_angle) * y));
      for (std::size_t c = 0; c < 3; ++c) {
        image.at(x, y, c) = static_cast<float>(base[c] + slope_x[c] * u + slope_y[c] * v + stripe);
      }
    }
  }

  const std::size_t shapes = 4 + rng.below(5);
  const double extent = static_cast<double>(std::min(width, height));
  for (std::size_t k = 0; k < shapes; ++k) {
    std::array<double, 3> colour{};
    for (auto& ch : colour) ch = rng.uniform(0.0, 1.0);
    const double cx = rng.uniform(0.0, static_cast<double>(width));
    const double cy = rng.uniform(0.0, static_cast<double>(height));
    const double r = rng.uniform(0.08, 0.3) * extent;
    const bool disc = rng.below(2) == 0;
    const double aspect = rng.uniform(0.5, 2.0);
    for (std::size_t y = 0; y < height; ++y) {
      for (std::size_t x = 0; x < width; ++x) {
        const double dx = static_cast<double>(x) - cx;
        const double dy = static_cast<double>(y) - cy;
        const bool inside = disc ? dx * dx + dy * dy <= r * r
                                 : std::abs(dx) <= r * aspect && std::abs(dy) <= r / aspect;
        if (!inside) continue;
        for (std::size_t c = 0; c < 3; ++c) image.at(x, y, c) = static_cast<float>(colour[c]);
      }
    }
  }
  for (auto& p : image.pixels) p = static_cast<float>(quantize_unit(p)) / 255.0f;
  return image;
}

/// Writes `count` scenes as img_000.ppm, img_001.ppm, ... into `dir`.
inline std::vector<std::filesystem::path> write_synthetic_set(const std::filesystem::path& dir,
                                                              std::size_t count, std::size_t size,
                                                              std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> paths;
  for (std::size_t i = 0; i < count; ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%03zu.ppm", i);
    paths.push_back(dir / name);
    save_ppm(synthetic_image(size, size, mix_seed(seed, i)), paths.back());
  }
  return paths;
}

}  // namespace srmnet
