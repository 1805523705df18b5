// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string_view>

#include "srmnet/autodiff.hpp"

namespace srmnet {

enum class CharbonnierVariant {
  Literal,     // sqrt(||x_hat - x||^2 + eps^2) over the whole batch
  PerElement,  // mean(sqrt((x_hat - x)^2 + eps^2))
};

inline CharbonnierVariant parse_charbonnier_variant(std::string_view name) {
  if (name == "literal") return CharbonnierVariant::Literal;
  if (name == "per_element") return CharbonnierVariant::PerElement;
  fail(ErrorCode::ConfigInvalid, "unknown loss_variant '" + std::string(name) + "'");
}

constexpr std::string_view to_string(CharbonnierVariant v) {
  return v == CharbonnierVariant::Literal ? "literal" : "per_element";
}

/// Charbonnier penalty between a prediction and its target. The literal
/// form is never below eps and equals it only when the inputs match.
template <typename T>
Var<T> charbonnier_loss(const Var<T>& prediction, const Var<T>& target, double epsilon = 1e-3,
                        CharbonnierVariant variant = CharbonnierVariant::Literal) {
  require(prediction.shape() == target.shape(), ErrorCode::ShapeMismatch,
          "charbonnier_loss: " + prediction.shape().str() + " vs " + target.shape().str());
  const Var<T> diff = sub(prediction, target);
  const Var<T> squared = mul(diff, diff);
  const T eps2 = static_cast<T>(epsilon * epsilon);
  if (variant == CharbonnierVariant::Literal) {
    return sqrt(scalar_add(sum(squared), eps2));
  }
  return mean(sqrt(scalar_add(squared, eps2)));
}

}  // namespace srmnet
