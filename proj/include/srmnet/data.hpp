// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <vector>

#include "srmnet/image.hpp"
#include "srmnet/random.hpp"

namespace srmnet {

/// A clean patch, its corrupted copy, and the noise level (0-255 scale).
template <typename T = float>
struct NoisySample {
  Tensor<T> clean;
  Tensor<T> noisy;
  double sigma = 0.0;
};

/// Additive white Gaussian noise: noisy = clean + g * sigma / 255 with g drawn
/// per element from the seeded stream. The result is not clamped.
template <typename T = float>
NoisySample<T> add_awgn(const Tensor<T>& clean, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  NoisySample<T> sample{clean, clean, sigma};
  const double scale = sigma / 255.0;
  for (auto& v : sample.noisy.data()) v = static_cast<T>(static_cast<double>(v) + rng.normal() * scale);
  return sample;
}

/// `count` square crops at uniformly random top-left corners, each (1,3,p,p).
inline std::vector<Tensor<float>> sample_patches(const ImageBuffer& image, std::size_t patch,
                                                 std::size_t count, std::uint64_t seed) {
  require(patch > 0 && patch <= std::min(image.width, image.height), ErrorCode::PatchTooLarge,
          "patch " + std::to_string(patch) + " exceeds image " + std::to_string(image.width) + "x" +
              std::to_string(image.height));
  Rng rng(seed);
  std::vector<Tensor<float>> patches;
  patches.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t x0 = rng.below(image.width - patch + 1);
    const std::size_t y0 = rng.below(image.height - patch + 1);
    Tensor<float> t({1, 3, patch, patch});
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t y = 0; y < patch; ++y)
        for (std::size_t x = 0; x < patch; ++x) t.at(0, c, y, x) = image.at(x0 + x, y0 + y, c);
    patches.push_back(std::move(t));
  }
  return patches;
}

/// Stacks (1,C,H,W) tensors into (N,C,H,W).
template <typename T>
Tensor<T> stack_batch(const std::vector<Tensor<T>>& items) {
  require(!items.empty(), ErrorCode::ShapeMismatch, "stack_batch: empty");
  Shape s = items.front().shape();
  require(s.n == 1, ErrorCode::ShapeMismatch, "stack_batch: items must have batch 1");
  s.n = items.size();
  Tensor<T> out(s);
  for (std::size_t i = 0; i < items.size(); ++i) {
    require(items[i].shape() == items.front().shape(), ErrorCode::ShapeMismatch,
            "stack_batch: " + items[i].shape().str() + " vs " + items.front().shape().str());
    std::copy(items[i].data().begin(), items[i].data().end(), out.ptr() + i * items[i].size());
  }
  return out;
}

/// Single-producer, single-consumer queue with a fixed capacity.
template <typename Item>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  void push(Item item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    if (closed_) return;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  /// Blocks until an item arrives; empty once closed and drained.
  std::optional<Item> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return std::nullopt;
    Item item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::deque<Item> items_;
  std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  bool closed_ = false;
};

}  // namespace srmnet
