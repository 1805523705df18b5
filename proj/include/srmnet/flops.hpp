// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Analytic cost model over a resolved LayerGraph.
//
//   conv            MACs = Cout * Cin * k^2 * B * H * W
//   bilinear        8 ops per output element
//   activation/add  1 op per element
//   skff            reduce/branch transforms as 1x1 convs on (B,C,1,1);
//                   branch sum, pooling, weighting and weighted sum at
//                   1 op per element; activation and softmax at 1 op per
//                   element of their (B,*,1,1) tensors
//   shuffle/concat  pure data movement, 0 ops
//
// flops_2x = 2 * macs + other_ops.

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "srmnet/graph.hpp"

namespace srmnet {

struct NodeCost {
  std::string name;
  OpKind kind = OpKind::Input;
  Shape shape;
  std::uint64_t macs = 0;
  std::uint64_t other_ops = 0;
  std::uint64_t params = 0;
};

struct FlopsReport {
  std::vector<NodeCost> nodes;
  std::uint64_t macs = 0;
  std::uint64_t other_ops = 0;
  std::uint64_t flops_2x = 0;
  std::uint64_t params = 0;
};

inline NodeCost node_cost(const GraphNode& node) {
  NodeCost cost{node.name, node.kind, node.shape, 0, 0, 0};
  const Shape& s = node.shape;
  const std::uint64_t elements = s.numel();
  switch (node.kind) {
    case OpKind::Input:
    case OpKind::PixelUnshuffle:
    case OpKind::PixelShuffle:
    case OpKind::Concat:
      break;
    case OpKind::Conv:
      cost.macs = static_cast<std::uint64_t>(node.conv.out_channels) * node.conv.in_channels *
                  node.conv.kernel * node.conv.kernel * s.n * s.h * s.w;
      break;
    case OpKind::Bilinear:
      cost.other_ops = 8 * elements;
      break;
    case OpKind::Activation:
    case OpKind::Add:
      cost.other_ops = elements;
      break;
    case OpKind::Skff: {
      const SkffNode& k = node.skff;
      const std::uint64_t branches = k.branches;
      const std::uint64_t batch = s.n;
      cost.macs = batch * (k.hidden * k.channels + branches * k.channels * k.hidden);
      cost.other_ops = (branches - 1) * elements   // branch sum
                       + elements                  // global average pool
                       + batch * k.hidden          // activation
                       + batch * branches * k.channels  // softmax
                       + branches * elements       // channel weighting
                       + (branches - 1) * elements;  // weighted sum
      break;
    }
  }
  return cost;
}

/// Totals and per-node costs. Throws UnresolvedShape unless `graph` has been
/// resolved against an input size.
inline FlopsReport count_flops(const LayerGraph& graph) {
  require(graph.resolved(), ErrorCode::UnresolvedShape, "count_flops needs a resolved graph");
  FlopsReport report;
  for (const auto& node : graph.nodes()) {
    NodeCost cost = node_cost(node);
    report.macs += cost.macs;
    report.other_ops += cost.other_ops;
    report.nodes.push_back(std::move(cost));
  }
  report.flops_2x = 2 * report.macs + report.other_ops;
  report.params = graph.param_count();
  // Attribute parameters to the first node that names them.
  std::vector<std::string> seen;
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    const GraphNode& node = graph.nodes()[i];
    std::vector<std::string> names;
    if (node.kind == OpKind::Conv) {
      names = {node.weight, node.bias};
    } else if (node.kind == OpKind::Skff) {
      names = {node.skff.reduce_weight(), node.skff.reduce_bias()};
      for (std::size_t b = 0; b < node.skff.branches; ++b) {
        names.push_back(node.skff.branch_weight(b));
        names.push_back(node.skff.branch_bias(b));
      }
    }
    for (const auto& name : names) {
      if (std::find(seen.begin(), seen.end(), name) != seen.end()) continue;
      seen.push_back(name);
      for (const auto& p : graph.params()) {
        if (p.name == name) report.nodes[i].params += p.shape.numel();
      }
    }
  }
  return report;
}

/// Convenience: build, resolve at (batch, 3, height, width) and count.
inline FlopsReport count_flops(const MnetConfig& config, const Shape& input) {
  LayerGraph graph = build_mnet_graph(config);
  graph.resolve(input);
  return count_flops(graph);
}

}  // namespace srmnet
