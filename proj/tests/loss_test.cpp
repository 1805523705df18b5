// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "srmnet/loss.hpp"
#include "test_util.hpp"

namespace srmnet {
namespace {

using VarD = Var<double>;
using VarF = Var<float>;

TEST(Charbonnier, ZeroDifferenceGivesEpsilon) {
  Rng rng(1);
  const Tensor<float> x = random_tensor<float>({2, 3, 8, 8}, rng);
  const float lf = charbonnier_loss(VarF::constant(x), VarF::constant(x), 1e-3).value()[0];
  EXPECT_NEAR(lf, 1e-3f, 1e-3f * std::numeric_limits<float>::epsilon());
  const Tensor<double> xd = x.cast<double>();
  const double ld = charbonnier_loss(VarD::constant(xd), VarD::constant(xd), 1e-3).value()[0];
  EXPECT_NEAR(ld, 1e-3, 1e-3 * std::numeric_limits<double>::epsilon());
}

TEST(Charbonnier, SingleElementClosedForm) {
  const auto pred = VarD::constant(Tensor<double>::full({1, 1, 1, 1}, 0.5 + 3e-3));
  const auto target = VarD::constant(Tensor<double>::full({1, 1, 1, 1}, 0.5));
  const double l = charbonnier_loss(pred, target, 1e-3).value()[0];
  EXPECT_NEAR(l, 3.1623e-3, 1e-7);
  EXPECT_NEAR(l, std::sqrt(1e-5), 1e-15);
  const double pe = charbonnier_loss(pred, target, 1e-3, CharbonnierVariant::PerElement).value()[0];
  EXPECT_NEAR(pe, 3.1623e-3, 1e-7);
}

TEST(Charbonnier, LiteralFormSumsTheBatch) {
  // Two elements with difference 3e-3 and 4e-3: sqrt(9e-6 + 16e-6 + 1e-6).
  const auto pred = VarD::constant(Tensor<double>({1, 1, 1, 2}, {3e-3, -4e-3}));
  const auto target = VarD::constant(Tensor<double>({1, 1, 1, 2}));
  EXPECT_NEAR(charbonnier_loss(pred, target, 1e-3).value()[0], std::sqrt(26e-6), 1e-15);
  EXPECT_NEAR(charbonnier_loss(pred, target, 1e-3, CharbonnierVariant::PerElement).value()[0],
              (std::sqrt(10e-6) + std::sqrt(17e-6)) / 2, 1e-15);
}

TEST(Charbonnier, BoundedBelowAndMonotone) {
  Rng rng(2);
  Tensor<double> pred = random_tensor<double>({1, 2, 3, 3}, rng);
  const auto target = VarD::constant(random_tensor<double>({1, 2, 3, 3}, rng));
  double previous = charbonnier_loss(VarD::constant(pred), target).value()[0];
  EXPECT_GT(previous, 1e-3);
  for (int step = 0; step < 20; ++step) {
    pred[4] += pred[4] >= target.value()[4] ? 0.05 : -0.05;
    const double l = charbonnier_loss(VarD::constant(pred), target).value()[0];
    EXPECT_GT(l, previous);
    previous = l;
  }
}

TEST(Charbonnier, ShapeMismatchAndVariantNames) {
  expect_error(ErrorCode::ShapeMismatch, [] {
    charbonnier_loss(VarF::constant(Tensor<float>({1, 3, 2, 2})), VarF::constant(Tensor<float>({1, 3, 2, 3})));
  });
  EXPECT_EQ(parse_charbonnier_variant("literal"), CharbonnierVariant::Literal);
  EXPECT_EQ(parse_charbonnier_variant("per_element"), CharbonnierVariant::PerElement);
  EXPECT_EQ(to_string(CharbonnierVariant::PerElement), "per_element");
  expect_error(ErrorCode::ConfigInvalid, [] { parse_charbonnier_variant("l1"); });
}

TEST(Charbonnier, GradientOfLiteralForm) {
  // d/dp sqrt(sum d^2 + eps^2) = d / L
  auto pred = VarD::leaf(Tensor<double>({1, 1, 1, 2}, {3e-3, -4e-3}), true);
  const auto target = VarD::constant(Tensor<double>({1, 1, 1, 2}));
  const auto loss = charbonnier_loss(pred, target, 1e-3);
  backward(loss);
  const double l = std::sqrt(26e-6);
  EXPECT_NEAR(pred.grad()[0], 3e-3 / l, 1e-12);
  EXPECT_NEAR(pred.grad()[1], -4e-3 / l, 1e-12);
}

}  // namespace
}  // namespace srmnet
