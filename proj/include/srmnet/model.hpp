// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "srmnet/graph.hpp"
#include "srmnet/random.hpp"

namespace srmnet {

/// Draws every parameter of `graph` in graph order. Uniform tensors use
/// [-bound, bound] with bound = sqrt(1 / fan_in); biases start at zero.
template <typename T>
ModelParams<T> init_params(const LayerGraph& graph, std::uint64_t seed) {
  Rng rng(seed);
  ModelParams<T> params;
  for (const ParamSpec& spec : graph.params()) {
    Tensor<T> value(spec.shape);
    switch (spec.init.kind) {
      case ParamInit::Kind::Uniform:
        for (auto& v : value.data()) v = static_cast<T>(rng.uniform(-spec.init.bound, spec.init.bound));
        break;
      case ParamInit::Kind::Zero:
        break;
      case ParamInit::Kind::CopyOf:
        value = params[spec.init.source].value();
        break;
    }
    params.add(spec.name, std::move(value), spec.init);
  }
  return params;
}

template <typename T>
ModelParams<T> init_params(const MnetConfig& config, std::uint64_t seed) {
  return init_params<T>(build_mnet_graph(config), seed);
}

/// Zero-valued parameters in graph order.
template <typename T>
ModelParams<T> zero_params(const LayerGraph& graph) {
  ModelParams<T> params;
  for (const ParamSpec& spec : graph.params()) params.add(spec.name, Tensor<T>(spec.shape), spec.init);
  return params;
}

/// Weighted fusion of same-shape feature maps:
///   u = sum(inputs), s = mean_hw(u), z = act(reduce(s)),
///   v = softmax_i(branch_i(z)), out = sum_i v_i * inputs_i.
template <typename T>
Var<T> skff_fuse(const std::vector<Var<T>>& inputs, const SkffNode& node,
                 const ModelParams<T>& params, T slope = static_cast<T>(kLeakySlope),
                 ConvAlgo algo = ConvAlgo::Im2col) {
  require(inputs.size() == node.branches && inputs.size() >= 2, ErrorCode::BranchCountMismatch,
          node.prefix + ": expected " + std::to_string(node.branches) + " inputs, got " +
              std::to_string(inputs.size()));
  for (const auto& in : inputs) {
    require(in.shape() == inputs.front().shape(), ErrorCode::ShapeMismatch,
            node.prefix + ": " + in.shape().str() + " vs " + inputs.front().shape().str());
  }
  require(inputs.front().shape().c == node.channels, ErrorCode::ShapeMismatch,
          node.prefix + ": channel count");
  Var<T> total = inputs[0];
  for (std::size_t i = 1; i < inputs.size(); ++i) total = add(total, inputs[i]);
  const Var<T> stats = global_avg_pool(total);
  const Var<T> squeezed = leaky_relu(
      conv2d(stats, params[node.reduce_weight()], {params[node.reduce_bias()]}, algo), slope);
  std::vector<Var<T>> logits;
  logits.reserve(node.branches);
  for (std::size_t i = 0; i < node.branches; ++i) {
    logits.push_back(
        conv2d(squeezed, params[node.branch_weight(i)], {params[node.branch_bias(i)]}, algo));
  }
  const std::vector<Var<T>> weights = branch_softmax(logits);
  Var<T> out = mul(inputs[0], weights[0]);
  for (std::size_t i = 1; i < inputs.size(); ++i) out = add(out, mul(inputs[i], weights[i]));
  return out;
}

/// Per-branch channel weights the fusion would apply; exposed for tests and
/// inspection.
template <typename T>
std::vector<Tensor<T>> skff_weights(const std::vector<Var<T>>& inputs, const SkffNode& node,
                                    const ModelParams<T>& params,
                                    T slope = static_cast<T>(kLeakySlope)) {
  Var<T> total = inputs[0];
  for (std::size_t i = 1; i < inputs.size(); ++i) total = add(total, inputs[i]);
  const Var<T> squeezed = leaky_relu(
      conv2d(global_avg_pool(total), params[node.reduce_weight()], {params[node.reduce_bias()]}),
      slope);
  std::vector<Var<T>> logits;
  for (std::size_t i = 0; i < node.branches; ++i) {
    logits.push_back(conv2d(squeezed, params[node.branch_weight(i)], {params[node.branch_bias(i)]}));
  }
  std::vector<Tensor<T>> out;
  for (const auto& w : branch_softmax(logits)) out.push_back(w.value());
  return out;
}

struct ForwardOptions {
  ConvAlgo conv_algo = ConvAlgo::Im2col;
};

/// Interprets a resolved graph. Intermediate values are dropped after their
/// last consumer, so inference without gradients stays memory-light.
template <typename T>
Var<T> run_graph(LayerGraph& graph, const ModelParams<T>& params, const Var<T>& input,
                 const ForwardOptions& options = {}) {
  graph.resolve(input.shape());
  const auto& nodes = graph.nodes();
  std::vector<std::size_t> last_use(nodes.size(), 0);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t in : nodes[i].inputs) last_use[in] = i;
  }
  last_use[graph.output()] = nodes.size();

  std::vector<Var<T>> values(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const GraphNode& node = nodes[i];
    auto arg = [&](std::size_t k) -> const Var<T>& { return values[node.inputs[k]]; };
    switch (node.kind) {
      case OpKind::Input:
        values[i] = input;
        break;
      case OpKind::Conv:
        values[i] = conv2d(arg(0), params[node.weight], {params[node.bias]}, options.conv_algo);
        break;
      case OpKind::Activation:
        values[i] = leaky_relu(arg(0), static_cast<T>(node.slope));
        break;
      case OpKind::Bilinear:
        values[i] = bilinear_resize(arg(0), node.factor, node.direction);
        break;
      case OpKind::PixelUnshuffle:
        values[i] = pixel_unshuffle(arg(0));
        break;
      case OpKind::PixelShuffle:
        values[i] = pixel_shuffle(arg(0));
        break;
      case OpKind::Concat: {
        std::vector<Var<T>> parts;
        for (std::size_t k = 0; k < node.inputs.size(); ++k) parts.push_back(arg(k));
        values[i] = concat_channels(parts);
        break;
      }
      case OpKind::Add:
        values[i] = add(arg(0), arg(1));
        break;
      case OpKind::Skff: {
        std::vector<Var<T>> parts;
        for (std::size_t k = 0; k < node.inputs.size(); ++k) parts.push_back(arg(k));
        values[i] = skff_fuse(parts, node.skff, params, static_cast<T>(node.slope), options.conv_algo);
        break;
      }
    }
    for (std::size_t in : node.inputs) {
      if (last_use[in] == i) values[in] = Var<T>();
    }
  }
  return values[graph.output()];
}

/// Denoising forward pass: (B,3,H,W) -> (B,3,H,W).
template <typename T>
Var<T> mnet_forward(const Var<T>& noisy, const MnetConfig& config, const ModelParams<T>& params,
                    const ForwardOptions& options = {}) {
  LayerGraph graph = build_mnet_graph(config);
  return run_graph(graph, params, noisy, options);
}

template <typename T>
Var<T> srb_forward(const Var<T>& x, const SrbNode& node, const ModelParams<T>& params,
                   std::size_t skff_reduction = 8, T slope = static_cast<T>(kLeakySlope)) {
  LayerGraph graph = build_srb_graph(node, skff_reduction, slope);
  return run_graph(graph, params, x);
}

/// (B,C,H,W) -> (B,C,H/2,W/2): pixel unshuffle then a 4C -> C 1x1 conv.
template <typename T>
Var<T> down_resize(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  return conv2d(pixel_unshuffle(x), weight, {bias});
}

/// (B,Cin,H,W) -> (B,Cout,2H,2W): a Cin -> 4 Cout 1x1 conv then pixel shuffle.
template <typename T>
Var<T> up_resize(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  return pixel_shuffle(conv2d(x, weight, {bias}));
}

}  // namespace srmnet
