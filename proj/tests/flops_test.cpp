// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <fstream>

#include <json.hpp>

#include "srmnet/flops.hpp"
#include "srmnet/model.hpp"
#include "srmnet/train.hpp"
#include "test_util.hpp"

namespace srmnet {
namespace {

TEST(Flops, SingleConvClosedForm) {
  LayerGraph graph;
  GraphBuilder b(graph, 8, kLeakySlope);
  b.conv("conv", b.input(3), 96, 3);
  graph.resolve({1, 3, 256, 256});
  const FlopsReport r = count_flops(graph);
  EXPECT_EQ(r.macs, 96ull * 3 * 9 * 256 * 256);
  EXPECT_EQ(r.macs, 169869312ull);
  EXPECT_EQ(r.other_ops, 0u);
  EXPECT_EQ(r.flops_2x, 2 * r.macs);
  EXPECT_EQ(r.params, 96u * 3 * 9 + 96);
}

TEST(Flops, OneByOneOnSinglePixel) {
  LayerGraph graph;
  GraphBuilder b(graph, 8, kLeakySlope);
  b.conv("conv", b.input(17), 17, 1);
  graph.resolve({1, 17, 1, 1});
  EXPECT_EQ(count_flops(graph).macs, 17u * 17);
}

TEST(Flops, UnresolvedGraphIsRejected) {
  const LayerGraph graph = build_mnet_graph(tiny_config());
  expect_error(ErrorCode::UnresolvedShape, [&] { count_flops(graph); });
}

TEST(Flops, ConvMacsScaleWithArea) {
  MnetConfig config = tiny_config();
  const FlopsReport small = count_flops(config, {1, 3, 32, 32});
  const FlopsReport large = count_flops(config, {1, 3, 64, 64});
  std::uint64_t conv_small = 0, conv_large = 0;
  for (std::size_t i = 0; i < small.nodes.size(); ++i) {
    if (small.nodes[i].kind != OpKind::Conv) continue;
    conv_small += small.nodes[i].macs;
    conv_large += large.nodes[i].macs;
  }
  EXPECT_EQ(conv_large, 4 * conv_small);
  EXPECT_EQ(small.params, large.params);
}

TEST(Flops, ParamsMatchAllocatedTensors) {
  for (const MnetConfig& config : {tiny_config(), MnetConfig{}}) {
    const LayerGraph graph = build_mnet_graph(config);
    const ModelParams<float> params = zero_params<float>(graph);
    const FlopsReport r = count_flops(config, {1, 3, 64, 64});
    EXPECT_EQ(r.params, params.total_elements());
    std::uint64_t attributed = 0;
    for (const auto& n : r.nodes) attributed += n.params;
    EXPECT_EQ(attributed, r.params);
  }
}

TEST(Flops, TinyConfigMatchesGolden) {
  std::ifstream in(std::string(SRMNET_GOLDEN_DIR) + "/tiny_flops.json");
  ASSERT_TRUE(in.good());
  const nlohmann::json golden = nlohmann::json::parse(in);
  MnetConfig config = tiny_config();
  ASSERT_EQ(golden["config"]["base_channels"].get<std::size_t>(), config.base_channels);
  ASSERT_EQ(golden["config"]["scales"].get<std::size_t>(), config.scales);
  ASSERT_EQ(golden["config"]["blocks_per_srb"].get<std::size_t>(), config.blocks_per_srb);
  const auto dims = golden["input"].get<std::vector<std::size_t>>();
  const FlopsReport r = count_flops(config, {dims[0], dims[1], dims[2], dims[3]});
  EXPECT_EQ(r.macs, golden["macs"].get<std::uint64_t>());
  EXPECT_EQ(r.other_ops, golden["other_ops"].get<std::uint64_t>());
  EXPECT_EQ(r.flops_2x, golden["flops_2x"].get<std::uint64_t>());
  EXPECT_EQ(r.params, golden["params"].get<std::uint64_t>());
}

TEST(Flops, FullWidthConfigurationTotals) {
  const FlopsReport r = count_flops(MnetConfig{}, {1, 3, 256, 256});
  // Pinned regression values for the default architecture.
  EXPECT_EQ(r.macs, 212732627328ull);
  EXPECT_EQ(r.flops_2x, 426150174612ull);
  EXPECT_EQ(r.params, 27831063ull);
}

}  // namespace
}  // namespace srmnet
