// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "srmnet/params.hpp"
#include "srmnet/random.hpp"

namespace srmnet {

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-3;
  std::size_t samples_per_tensor = 8;
  std::uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_err = 0.0;
  bool pass = false;
  std::size_t coordinates = 0;
  std::size_t kinks_skipped = 0;  // coordinates rejected for straddling a kink
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

/// Compares reverse-mode gradients of `loss_fn(params)` against central
/// differences on a seeded sample of coordinates from every tensor.
/// Runs in 64-bit only.
template <typename LossFn>
GradCheckReport finite_diff_check(LossFn&& loss_fn, ModelParams<double>& params,
                                  const GradCheckOptions& options = {}) {
  params.zero_grad();
  Var<double> loss = loss_fn(params);
  backward(loss);

  Rng rng(options.seed);
  GradCheckReport report;
  for (auto& entry : params.entries()) {
    Tensor<double>& value = entry.var.mutable_value();
    const Tensor<double> analytic =
        entry.var.grad().empty() ? Tensor<double>(value.shape()) : entry.var.grad();

    // Coordinates come from a lazily shuffled order (partial Fisher-Yates).
    // A coordinate whose +/- step lands on two different pieces of a
    // piecewise op has no meaningful central difference and is replaced by
    // the next one in the order.
    std::vector<std::size_t> order(value.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::size_t accepted = 0;
    for (std::size_t pos = 0; pos < order.size() && accepted < options.samples_per_tensor; ++pos) {
      std::swap(order[pos], order[pos + rng.below(order.size() - pos)]);
      const std::size_t idx = order[pos];
      const double saved = value[idx];
      auto evaluate = [&](double x, std::uint64_t& signature) {
        value[idx] = x;
        KinkTrace trace;
        const double v = loss_fn(params).value()[0];
        signature = trace.signature();
        return v;
      };
      std::uint64_t sig_plus = 0, sig_minus = 0;
      const double plus = evaluate(saved + options.step, sig_plus);
      const double minus = evaluate(saved - options.step, sig_minus);
      value[idx] = saved;
      if (sig_plus != sig_minus) {
        ++report.kinks_skipped;
        continue;
      }
      ++accepted;

      const double numeric = (plus - minus) / (2.0 * options.step);
      const double grad = analytic[idx];
      require(std::isfinite(grad) && std::isfinite(numeric), ErrorCode::NonFiniteGradient,
              "non-finite gradient for " + entry.name + "[" + std::to_string(idx) + "]");
      const double err = relative_error(grad, numeric);
      ++report.coordinates;
      if (err > report.max_rel_err || report.coordinates == 1) {
        report.max_rel_err = err;
        report.worst_param = entry.name;
        report.worst_index = idx;
        report.worst_analytic = grad;
        report.worst_numeric = numeric;
      }
    }
  }
  report.pass = report.max_rel_err < options.tolerance;
  return report;
}

}  // namespace srmnet
