// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "srmnet/ops.hpp"
#include "srmnet/params.hpp"

namespace srmnet {

/// Architecture hyper-parameters of the selective residual M-Net.
struct MnetConfig {
  std::size_t base_channels = 96;
  std::size_t scales = 4;
  std::size_t blocks_per_srb = 3;
  std::size_t skff_reduction = 8;
  double epsilon = 1e-3;
  bool global_residual = true;
  double leaky_slope = kLeakySlope;

  /// Channel width at scale i: the down-resized previous scale plus the
  /// base-width gatepost features.
  std::size_t channels_at(std::size_t scale) const { return (scale + 1) * base_channels; }
  std::size_t spatial_multiple() const { return std::size_t{1} << (scales - 1); }

  bool operator==(const MnetConfig&) const = default;

  void validate() const {
    require(base_channels > 0, ErrorCode::ConfigInvalid, "base_channels must be positive");
    require(scales >= 1 && scales <= 4, ErrorCode::ConfigInvalid, "scales must be in [1, 4]");
    require(blocks_per_srb > 0, ErrorCode::ConfigInvalid, "blocks_per_srb must be positive");
    require(skff_reduction > 0, ErrorCode::ConfigInvalid, "skff_reduction must be positive");
    require(epsilon > 0.0 && std::isfinite(epsilon), ErrorCode::ConfigInvalid,
            "epsilon must be positive");
    require(leaky_slope >= 0.0 && leaky_slope < 1.0, ErrorCode::ConfigInvalid,
            "leaky_slope must be in [0, 1)");
  }
};

/// Bottleneck width of a selective fusion descriptor transform.
constexpr std::size_t skff_hidden(std::size_t channels, std::size_t reduction) {
  return std::max<std::size_t>(channels / reduction, 4);
}

enum class OpKind { Input, Conv, Activation, Bilinear, PixelUnshuffle, PixelShuffle, Concat, Add, Skff };

constexpr const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::Input: return "input";
    case OpKind::Conv: return "conv";
    case OpKind::Activation: return "activation";
    case OpKind::Bilinear: return "bilinear";
    case OpKind::PixelUnshuffle: return "pixel_unshuffle";
    case OpKind::PixelShuffle: return "pixel_shuffle";
    case OpKind::Concat: return "concat";
    case OpKind::Add: return "add";
    case OpKind::Skff: return "skff";
  }
  return "?";
}

/// Selective kernel feature fusion over `branches` same-shape inputs.
/// Parameters live under `prefix`: .reduce (C -> hidden) and .branch<i>
/// (hidden -> C), all 1x1 with bias.
struct SkffNode {
  std::size_t branches = 2;
  std::size_t channels = 0;
  std::size_t hidden = 4;
  std::string prefix;

  std::string reduce_weight() const { return prefix + ".reduce.weight"; }
  std::string reduce_bias() const { return prefix + ".reduce.bias"; }
  std::string branch_weight(std::size_t i) const {
    return prefix + ".branch" + std::to_string(i) + ".weight";
  }
  std::string branch_bias(std::size_t i) const {
    return prefix + ".branch" + std::to_string(i) + ".bias";
  }
};

/// Selective residual block: `num_blocks` identity/conv pairs fused by a
/// 2-branch SKFF, a 3x3 tail and a 1x1 long skip.
struct SrbNode {
  std::size_t channels = 0;
  std::size_t num_blocks = 3;
  std::string prefix;
};

struct GraphNode {
  OpKind kind = OpKind::Input;
  std::string name;
  std::vector<std::size_t> inputs;
  std::size_t channels = 0;  // output channels, known before shape resolution

  ConvSpec conv;               // Conv
  std::string weight;          // Conv
  std::string bias;            // Conv
  std::size_t factor = 1;      // Bilinear
  ResizeDirection direction = ResizeDirection::Down;
  SkffNode skff;               // Skff
  double slope = kLeakySlope;  // Activation

  Shape shape;  // filled by LayerGraph::resolve
};

struct ParamSpec {
  std::string name;
  Shape shape;
  ParamInit init;
};

/// Ordered, acyclic node list: every node's inputs precede it.
class LayerGraph {
 public:
  std::size_t add(GraphNode node) {
    for (std::size_t in : node.inputs) {
      require(in < nodes_.size(), ErrorCode::ShapeMismatch, "graph edge to a later node");
    }
    nodes_.push_back(std::move(node));
    resolved_ = false;
    return nodes_.size() - 1;
  }

  void add_param(ParamSpec spec) {
    auto it = std::find_if(params_.begin(), params_.end(),
                           [&](const ParamSpec& p) { return p.name == spec.name; });
    if (it != params_.end()) {
      require(it->shape == spec.shape, ErrorCode::ShapeMismatch, "shared parameter " + spec.name +
                                                                     " declared with two shapes");
      return;
    }
    params_.push_back(std::move(spec));
  }

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<ParamSpec>& params() const { return params_; }
  std::size_t output() const { return nodes_.size() - 1; }
  bool resolved() const { return resolved_; }
  const Shape& input_shape() const { return nodes_.front().shape; }

  std::size_t param_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.shape.numel();
    return total;
  }

  /// Propagates shapes from an input of the given extents. Throws before any
  /// compute when the extents violate a resize constraint.
  void resolve(const Shape& input) {
    require(!nodes_.empty() && nodes_.front().kind == OpKind::Input, ErrorCode::UnresolvedShape,
            "graph has no input node");
    require(input.c == nodes_.front().channels, ErrorCode::ShapeMismatch,
            "input has " + std::to_string(input.c) + " channels, graph expects " +
                std::to_string(nodes_.front().channels));
    require(input.n > 0 && input.h > 0 && input.w > 0, ErrorCode::ShapeMismatch,
            "empty input " + input.str());
    for (auto& node : nodes_) {
      node.shape = infer(node, input);
    }
    resolved_ = true;
  }

 private:
  Shape infer(const GraphNode& node, const Shape& input) const {
    auto in = [&](std::size_t i) -> const Shape& { return nodes_[node.inputs.at(i)].shape; };
    switch (node.kind) {
      case OpKind::Input:
        return input;
      case OpKind::Conv: {
        Shape s = in(0);
        require(s.c == node.conv.in_channels, ErrorCode::ShapeMismatch,
                node.name + ": input " + s.str() + " for conv with " +
                    std::to_string(node.conv.in_channels) + " inputs");
        s.c = node.conv.out_channels;
        return s;
      }
      case OpKind::Activation:
        return in(0);
      case OpKind::Bilinear: {
        Shape s = in(0);
        if (node.direction == ResizeDirection::Down) {
          require(s.h % node.factor == 0 && s.w % node.factor == 0, ErrorCode::IndivisibleSize,
                  node.name + ": " + s.str() + " not divisible by " + std::to_string(node.factor));
          s.h /= node.factor;
          s.w /= node.factor;
        } else {
          s.h *= node.factor;
          s.w *= node.factor;
        }
        return s;
      }
      case OpKind::PixelUnshuffle: {
        Shape s = in(0);
        require(s.h % 2 == 0 && s.w % 2 == 0, ErrorCode::IndivisibleSize,
                node.name + ": odd spatial size " + s.str());
        return {s.n, s.c * 4, s.h / 2, s.w / 2};
      }
      case OpKind::PixelShuffle: {
        const Shape& s = in(0);
        require(s.c % 4 == 0, ErrorCode::IndivisibleSize, node.name + ": channels not / 4");
        return {s.n, s.c / 4, s.h * 2, s.w * 2};
      }
      case OpKind::Concat: {
        Shape s = in(0);
        s.c = 0;
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
          require(in(i).h == in(0).h && in(i).w == in(0).w, ErrorCode::ShapeMismatch,
                  node.name + ": concat of " + in(i).str() + " and " + in(0).str());
          s.c += in(i).c;
        }
        return s;
      }
      case OpKind::Add:
      case OpKind::Skff: {
        for (std::size_t i = 1; i < node.inputs.size(); ++i) {
          require(in(i) == in(0), ErrorCode::ShapeMismatch,
                  node.name + ": " + in(i).str() + " vs " + in(0).str());
        }
        if (node.kind == OpKind::Skff) {
          require(node.inputs.size() == node.skff.branches, ErrorCode::BranchCountMismatch,
                  node.name + ": branch count");
          require(in(0).c == node.skff.channels, ErrorCode::ShapeMismatch,
                  node.name + ": channel count");
        }
        return in(0);
      }
    }
    fail(ErrorCode::UnresolvedShape, node.name);
  }

  std::vector<GraphNode> nodes_;
  std::vector<ParamSpec> params_;
  bool resolved_ = false;
};

/// Appends SRMNet building blocks to a LayerGraph.
class GraphBuilder {
 public:
  GraphBuilder(LayerGraph& graph, std::size_t skff_reduction, double slope)
      : graph_(graph), reduction_(skff_reduction), slope_(slope) {}

  std::size_t input(std::size_t channels) {
    GraphNode node;
    node.kind = OpKind::Input;
    node.name = "input";
    node.channels = channels;
    return graph_.add(std::move(node));
  }

  /// Conv whose parameters are `<prefix>.weight` / `<prefix>.bias`. Reusing a
  /// prefix shares the weights.
  std::size_t conv(const std::string& prefix, std::size_t from, std::size_t out_channels,
                   std::size_t kernel) {
    GraphNode node;
    node.kind = OpKind::Conv;
    node.name = prefix;
    node.inputs = {from};
    node.conv = {channels(from), out_channels, kernel, true};
    node.channels = out_channels;
    node.weight = prefix + ".weight";
    node.bias = prefix + ".bias";
    const double bound = std::sqrt(1.0 / static_cast<double>(channels(from) * kernel * kernel));
    graph_.add_param({node.weight, node.conv.weight_shape(), {ParamInit::Kind::Uniform, bound, {}}});
    graph_.add_param({node.bias, node.conv.bias_shape(), {ParamInit::Kind::Zero, 0.0, {}}});
    return graph_.add(std::move(node));
  }

  std::size_t activation(const std::string& name, std::size_t from) {
    GraphNode node;
    node.kind = OpKind::Activation;
    node.name = name;
    node.inputs = {from};
    node.channels = channels(from);
    node.slope = slope_;
    return graph_.add(std::move(node));
  }

  std::size_t bilinear(const std::string& name, std::size_t from, std::size_t factor,
                       ResizeDirection direction) {
    if (factor == 1) return from;
    GraphNode node;
    node.kind = OpKind::Bilinear;
    node.name = name;
    node.inputs = {from};
    node.channels = channels(from);
    node.factor = factor;
    node.direction = direction;
    return graph_.add(std::move(node));
  }

  std::size_t shuffle(const std::string& name, std::size_t from, bool unshuffle) {
    GraphNode node;
    node.kind = unshuffle ? OpKind::PixelUnshuffle : OpKind::PixelShuffle;
    node.name = name;
    node.inputs = {from};
    node.channels = unshuffle ? channels(from) * 4 : channels(from) / 4;
    return graph_.add(std::move(node));
  }

  std::size_t concat(const std::string& name, std::vector<std::size_t> from) {
    GraphNode node;
    node.kind = OpKind::Concat;
    node.name = name;
    for (std::size_t f : from) node.channels += channels(f);
    node.inputs = std::move(from);
    return graph_.add(std::move(node));
  }

  std::size_t add(const std::string& name, std::size_t a, std::size_t b) {
    GraphNode node;
    node.kind = OpKind::Add;
    node.name = name;
    node.inputs = {a, b};
    node.channels = channels(a);
    return graph_.add(std::move(node));
  }

  std::size_t skff(const std::string& prefix, std::vector<std::size_t> from) {
    GraphNode node;
    node.kind = OpKind::Skff;
    node.name = prefix;
    node.channels = channels(from.front());
    node.skff = {from.size(), node.channels, skff_hidden(node.channels, reduction_), prefix};
    node.inputs = std::move(from);
    const SkffNode& s = node.skff;
    const double reduce_bound = std::sqrt(1.0 / static_cast<double>(s.channels));
    const double branch_bound = std::sqrt(1.0 / static_cast<double>(s.hidden));
    graph_.add_param({s.reduce_weight(), {s.hidden, s.channels, 1, 1},
                      {ParamInit::Kind::Uniform, reduce_bound, {}}});
    graph_.add_param({s.reduce_bias(), {1, s.hidden, 1, 1}, {ParamInit::Kind::Zero, 0.0, {}}});
    for (std::size_t i = 0; i < s.branches; ++i) {
      // Branch transforms start identical so the initial weights are 1/L.
      ParamInit init = i == 0 ? ParamInit{ParamInit::Kind::Uniform, branch_bound, {}}
                              : ParamInit{ParamInit::Kind::CopyOf, 0.0, s.branch_weight(0)};
      graph_.add_param({s.branch_weight(i), {s.channels, s.hidden, 1, 1}, init});
      graph_.add_param({s.branch_bias(i), {1, s.channels, 1, 1}, {ParamInit::Kind::Zero, 0.0, {}}});
    }
    return graph_.add(std::move(node));
  }

  std::size_t srb(const SrbNode& spec, std::size_t from) {
    require(channels(from) == spec.channels, ErrorCode::ShapeMismatch,
            spec.prefix + ": input channels " + std::to_string(channels(from)) + " != " +
                std::to_string(spec.channels));
    const std::string& p = spec.prefix;
    std::size_t h = from;
    for (std::size_t k = 0; k < spec.num_blocks; ++k) {
      const std::string block = p + ".block" + std::to_string(k);
      const std::size_t a = conv(block + ".conv1", h, spec.channels, 3);
      const std::size_t r = activation(block + ".act", a);
      const std::size_t m = conv(block + ".conv2", r, spec.channels, 3);
      h = skff(block + ".skff", {h, m});
    }
    const std::size_t tail = conv(p + ".tail", h, spec.channels, 3);
    const std::size_t skip = conv(p + ".skip", from, spec.channels, 1);
    return add(p + ".out", tail, skip);
  }

  /// Pixel unshuffle then 1x1 back to the input width.
  std::size_t down_resize(const std::string& prefix, std::size_t from) {
    const std::size_t c = channels(from);
    const std::size_t u = shuffle(prefix + ".unshuffle", from, true);
    return conv(prefix + ".conv", u, c, 1);
  }

  /// 1x1 to 4 * out_channels then pixel shuffle.
  std::size_t up_resize(const std::string& prefix, std::size_t from, std::size_t out_channels) {
    const std::size_t e = conv(prefix + ".conv", from, 4 * out_channels, 1);
    return shuffle(prefix + ".shuffle", e, false);
  }

  std::size_t channels(std::size_t id) const { return graph_.nodes().at(id).channels; }

 private:
  LayerGraph& graph_;
  std::size_t reduction_;
  double slope_;
};

/// The full network for one configuration (shapes unresolved).
inline LayerGraph build_mnet_graph(const MnetConfig& config) {
  config.validate();
  LayerGraph graph;
  GraphBuilder b(graph, config.skff_reduction, config.leaky_slope);
  const std::size_t scales = config.scales;
  const std::size_t c0 = config.base_channels;

  const std::size_t y = b.input(3);

  // Gatepost: bilinear pyramid of the input through one shared 3x3 conv.
  std::vector<std::size_t> gate(scales);
  for (std::size_t i = 0; i < scales; ++i) {
    const std::size_t factor = std::size_t{1} << i;
    const std::size_t level =
        b.bilinear("gate.down" + std::to_string(i), y, factor, ResizeDirection::Down);
    gate[i] = b.conv("gate.conv", level, c0, 3);
  }

  std::vector<std::size_t> enc(scales);
  enc[0] = b.srb({config.channels_at(0), config.blocks_per_srb, "enc0"}, gate[0]);
  for (std::size_t i = 1; i < scales; ++i) {
    const std::string p = "enc" + std::to_string(i);
    const std::size_t down = b.down_resize(p + ".down", enc[i - 1]);
    const std::size_t joined = b.concat(p + ".concat", {down, gate[i]});
    enc[i] = b.srb({config.channels_at(i), config.blocks_per_srb, p}, joined);
  }

  std::vector<std::size_t> dec(scales);
  dec[scales - 1] = enc[scales - 1];
  for (std::size_t i = scales - 1; i-- > 0;) {
    const std::string p = "dec" + std::to_string(i);
    const std::size_t up = b.up_resize(p + ".up", dec[i + 1], config.channels_at(i));
    const std::size_t fused = b.skff(p + ".fuse", {up, enc[i]});
    dec[i] = b.srb({config.channels_at(i), config.blocks_per_srb, p}, fused);
  }

  std::size_t merged = dec[0];
  if (scales > 1) {
    std::vector<std::size_t> branches{dec[0]};
    for (std::size_t i = 1; i < scales; ++i) {
      const std::string p = "out.proj" + std::to_string(i);
      const std::size_t proj = b.conv(p, dec[i], c0, 1);
      branches.push_back(
          b.bilinear(p + ".up", proj, std::size_t{1} << i, ResizeDirection::Up));
    }
    merged = b.skff("out.fuse", branches);
  }
  const std::size_t tail = b.conv("out.tail", merged, 3, 3);
  if (config.global_residual) b.add("out.residual", y, tail);
  return graph;
}

/// A standalone SRB with its own input node.
inline LayerGraph build_srb_graph(const SrbNode& spec, std::size_t skff_reduction = 8,
                                  double slope = kLeakySlope) {
  LayerGraph graph;
  GraphBuilder b(graph, skff_reduction, slope);
  b.srb(spec, b.input(spec.channels));
  return graph;
}

}  // namespace srmnet
