// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <vector>

#include "srmnet/params.hpp"

namespace srmnet {

struct AdamOptions {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First-order adaptive-moment optimizer with bias correction.
template <typename T>
class Adam {
 public:
  Adam(ModelParams<T>& params, AdamOptions options) : params_(params), options_(options) {
    for (const auto& e : params_.entries()) {
      first_.emplace_back(e.var.value().size(), 0.0);
      second_.emplace_back(e.var.value().size(), 0.0);
    }
  }

  /// Applies one update from the gradients currently held by the leaves.
  /// Leaves without a gradient are left untouched.
  void step() {
    ++steps_;
    const double c1 = 1.0 - std::pow(options_.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(options_.beta2, static_cast<double>(steps_));
    auto& entries = params_.entries();
    for (std::size_t p = 0; p < entries.size(); ++p) {
      const Tensor<T>& grad = entries[p].var.grad();
      if (grad.empty()) continue;
      Tensor<T>& value = entries[p].var.mutable_value();
      auto& m = first_[p];
      auto& v = second_[p];
      for (std::size_t i = 0; i < value.size(); ++i) {
        const double g = static_cast<double>(grad[i]);
        m[i] = options_.beta1 * m[i] + (1.0 - options_.beta1) * g;
        v[i] = options_.beta2 * v[i] + (1.0 - options_.beta2) * g * g;
        const double update = options_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + options_.eps);
        value[i] = static_cast<T>(static_cast<double>(value[i]) - update);
      }
    }
  }

  std::size_t steps() const { return steps_; }

 private:
  ModelParams<T>& params_;
  AdamOptions options_;
  std::vector<std::vector<double>> first_;
  std::vector<std::vector<double>> second_;
  std::size_t steps_ = 0;
};

}  // namespace srmnet
