// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "srmnet/tensor.hpp"

namespace srmnet {

/// Mean squared error in double precision.
template <typename T>
double mse(const Tensor<T>& a, const Tensor<T>& b) {
  require(a.shape() == b.shape(), ErrorCode::ShapeMismatch,
          "mse: " + a.shape().str() + " vs " + b.shape().str());
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

/// Peak signal-to-noise ratio in dB for signals on [0, 1]; +infinity when
/// the inputs are identical.
template <typename T>
double psnr(const Tensor<T>& a, const Tensor<T>& b) {
  const double err = mse(a, b);
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / err);
}

struct SsimParams {
  static constexpr std::size_t window = 11;
  static constexpr double sigma = 1.5;
  static constexpr double k1 = 0.01;
  static constexpr double k2 = 0.03;
  static constexpr double range = 1.0;
};

namespace detail {

inline std::array<double, SsimParams::window> gaussian_window() {
  std::array<double, SsimParams::window> w{};
  const double centre = (SsimParams::window - 1) / 2.0;
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double d = static_cast<double>(i) - centre;
    w[i] = std::exp(-(d * d) / (2.0 * SsimParams::sigma * SsimParams::sigma));
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

// Separable valid-mode filtering of an h x w plane.
inline std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t h,
                                        std::size_t w) {
  constexpr std::size_t k = SsimParams::window;
  static const auto taps = gaussian_window();
  const std::size_t oh = h - k + 1;
  const std::size_t ow = w - k + 1;
  std::vector<double> rows(h * ow);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += taps[i] * plane[y * w + x + i];
      rows[y * ow + x] = acc;
    }
  std::vector<double> out(oh * ow);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t i = 0; i < k; ++i) acc += taps[i] * rows[(y + i) * ow + x];
      out[y * ow + x] = acc;
    }
  return out;
}

template <typename T>
std::vector<double> luma(const Tensor<T>& t, std::size_t b) {
  const Shape& s = t.shape();
  std::vector<double> out(s.plane());
  for (std::size_t y = 0; y < s.h; ++y)
    for (std::size_t x = 0; x < s.w; ++x) {
      const std::size_t p = y * s.w + x;
      if (s.c == 1) {
        out[p] = static_cast<double>(t.at(b, 0, y, x));
      } else {
        out[p] = 0.299 * static_cast<double>(t.at(b, 0, y, x)) +
                 0.587 * static_cast<double>(t.at(b, 1, y, x)) +
                 0.114 * static_cast<double>(t.at(b, 2, y, x));
      }
    }
  return out;
}

}  // namespace detail

/// Single-scale SSIM on luma (0.299 R + 0.587 G + 0.114 B), 11x11 Gaussian
/// window with sigma 1.5, averaged over valid window positions and batch.
template <typename T>
double ssim(const Tensor<T>& a, const Tensor<T>& b) {
  const Shape& s = a.shape();
  require(s == b.shape(), ErrorCode::ShapeMismatch, "ssim: " + s.str() + " vs " + b.shape().str());
  require(s.c == 1 || s.c == 3, ErrorCode::ShapeMismatch, "ssim needs 1 or 3 channels");
  require(s.h >= SsimParams::window && s.w >= SsimParams::window, ErrorCode::ImageTooSmall,
          "ssim needs at least 11x11, got " + s.str());
  const double c1 = std::pow(SsimParams::k1 * SsimParams::range, 2);
  const double c2 = std::pow(SsimParams::k2 * SsimParams::range, 2);
  double total = 0.0;
  for (std::size_t n = 0; n < s.n; ++n) {
    const std::vector<double> x = detail::luma(a, n);
    const std::vector<double> y = detail::luma(b, n);
    std::vector<double> xx(x.size()), yy(x.size()), xy(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = detail::filter_valid(x, s.h, s.w);
    const auto my = detail::filter_valid(y, s.h, s.w);
    const auto exx = detail::filter_valid(xx, s.h, s.w);
    const auto eyy = detail::filter_valid(yy, s.h, s.w);
    const auto exy = detail::filter_valid(xy, s.h, s.w);
    double acc = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = exx[i] - mx[i] * mx[i];
      const double vy = eyy[i] - my[i] * my[i];
      const double cov = exy[i] - mx[i] * my[i];
      const double num = (2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2);
      const double den = (mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2);
      acc += num / den;
    }
    total += acc / static_cast<double>(mx.size());
  }
  return total / static_cast<double>(s.n);
}

}  // namespace srmnet
