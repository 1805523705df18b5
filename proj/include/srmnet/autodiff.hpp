// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Reverse-mode automatic differentiation over 4-D tensors.
//
// Every op returns a Var that owns its value and, when any input requires a
// gradient, a closure that pushes the output gradient back into the inputs.
// Node ids come from a global monotone counter, so sorting reachable nodes by
// id gives a topological order; that ordered list is the tape.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <utility>
#include <vector>

#include "srmnet/tensor.hpp"

namespace srmnet {

namespace detail {
inline std::uint64_t next_node_id() {
  static std::atomic<std::uint64_t> counter{0};
  return counter.fetch_add(1, std::memory_order_relaxed);
}
}  // namespace detail

/// Records which side of each non-differentiable point the piecewise ops
/// took during a forward pass. Two passes with equal signatures evaluated
/// the same smooth piece of the function.
class KinkTrace {
 public:
  KinkTrace() : previous_(active()) { active() = this; }
  ~KinkTrace() { active() = previous_; }
  KinkTrace(const KinkTrace&) = delete;
  KinkTrace& operator=(const KinkTrace&) = delete;

  static KinkTrace*& active() {
    thread_local KinkTrace* current = nullptr;
    return current;
  }

  void record(bool side) {
    word_ = word_ << 1 | static_cast<std::uint64_t>(side);
    if (++bits_ % 64 == 0) flush();
  }

  std::uint64_t signature() {
    flush();
    return hash_ ^ bits_;
  }

 private:
  void flush() {
    hash_ = (hash_ ^ word_) * 0x100000001B3ull + 0x9E3779B97F4A7C15ull;
    hash_ ^= hash_ >> 29;
    word_ = 0;
  }

  KinkTrace* previous_;
  std::uint64_t hash_ = 0;
  std::uint64_t word_ = 0;
  std::uint64_t bits_ = 0;
};

template <typename T>
struct Node {
  std::uint64_t id = detail::next_node_id();
  Tensor<T> value;
  Tensor<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> inputs;
  std::function<void(Node&)> backward;

  bool is_leaf() const { return !backward; }

  Tensor<T>& grad_buffer() {
    if (grad.empty() && value.size() > 0) grad = Tensor<T>(value.shape());
    return grad;
  }
};

/// Handle to a node in the recorded graph. Copies share the node.
template <typename T>
class Var {
 public:
  Var() = default;
  explicit Var(std::shared_ptr<Node<T>> node) : node_(std::move(node)) {}

  static Var leaf(Tensor<T> value, bool requires_grad = false) {
    auto node = std::make_shared<Node<T>>();
    node->value = std::move(value);
    node->requires_grad = requires_grad;
    return Var(std::move(node));
  }
  static Var constant(Tensor<T> value) { return leaf(std::move(value), false); }

  bool defined() const { return node_ != nullptr; }
  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& mutable_value() { return node_->value; }
  const Tensor<T>& grad() const { return node_->grad; }
  Tensor<T>& grad_buffer() { return node_->grad_buffer(); }
  const Shape& shape() const { return node_->value.shape(); }
  bool requires_grad() const { return node_->requires_grad; }
  std::uint64_t id() const { return node_->id; }
  void zero_grad() { node_->grad = Tensor<T>(); }

  Node<T>* node() const { return node_.get(); }
  const std::shared_ptr<Node<T>>& shared() const { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

/// Builds a result node. `backward` runs only when the node is reached during
/// backpropagation; it reads node.grad and accumulates into node.inputs.
template <typename T>
Var<T> make_result(Tensor<T> value, std::vector<Var<T>> inputs,
                   std::function<void(Node<T>&)> backward) {
  if (finite_checks()) {
    require(value.all_finite(), ErrorCode::NonFiniteValue, "non-finite op output");
  }
  auto node = std::make_shared<Node<T>>();
  node->value = std::move(value);
  const bool tracked =
      std::any_of(inputs.begin(), inputs.end(), [](const Var<T>& v) { return v.requires_grad(); });
  if (tracked) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.shared());
    node->backward = std::move(backward);
  }
  return Var<T>(std::move(node));
}

/// Ordered record of the graph reachable from one output.
template <typename T>
class Tape {
 public:
  static constexpr Precision precision = precision_of<T>;

  static Tape record(const Var<T>& output) {
    Tape tape;
    std::unordered_set<const Node<T>*> seen;
    std::vector<Node<T>*> stack{output.node()};
    while (!stack.empty()) {
      Node<T>* node = stack.back();
      stack.pop_back();
      if (!node->requires_grad || !seen.insert(node).second) continue;
      tape.nodes_.push_back(node);
      for (auto& in : node->inputs) stack.push_back(in.get());
    }
    std::sort(tape.nodes_.begin(), tape.nodes_.end(),
              [](const Node<T>* a, const Node<T>* b) { return a->id < b->id; });
    return tape;
  }

  const std::vector<Node<T>*>& nodes() const { return nodes_; }

 private:
  std::vector<Node<T>*> nodes_;
};

/// Backpropagates from a scalar loss. Leaf gradients accumulate across calls
/// until zeroed; interior gradients are released once consumed.
template <typename T>
void backward(const Var<T>& loss) {
  require(loss.shape().is_scalar(), ErrorCode::NonScalarLoss,
          "loss must have shape (1,1,1,1), got " + loss.shape().str());
  if (!loss.requires_grad()) return;
  const Tape<T> tape = Tape<T>::record(loss);
  loss.node()->grad_buffer()[0] += T(1);
  const auto& nodes = tape.nodes();
  for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
    Node<T>* node = *it;
    if (node->is_leaf()) continue;
    if (!node->grad.empty()) node->backward(*node);
    node->grad = Tensor<T>();
  }
}

// ---------------------------------------------------------------------------
// Element-wise arithmetic
// ---------------------------------------------------------------------------

namespace detail {

// b either matches a exactly or is a per-channel descriptor (N|1, C, 1, 1).
inline bool is_channel_broadcast(const Shape& a, const Shape& b) {
  return b.c == a.c && b.h == 1 && b.w == 1 && (b.n == a.n || b.n == 1);
}

inline void check_binary(const Shape& a, const Shape& b, const char* op) {
  require(a == b || is_channel_broadcast(a, b), ErrorCode::ShapeMismatch,
          std::string(op) + ": " + a.str() + " vs " + b.str());
}

// Calls f(i, j) for every element i of a with j the matching index in b.
template <typename F>
void for_each_pair(const Shape& a, const Shape& b, F&& f) {
  if (a == b) {
    for (std::size_t i = 0; i < a.numel(); ++i) f(i, i);
    return;
  }
  const std::size_t plane = a.plane();
  std::size_t i = 0;
  for (std::size_t n = 0; n < a.n; ++n) {
    const std::size_t bn = b.n == 1 ? 0 : n;
    for (std::size_t c = 0; c < a.c; ++c) {
      const std::size_t j = bn * b.c + c;
      for (std::size_t p = 0; p < plane; ++p, ++i) f(i, j);
    }
  }
}

}  // namespace detail

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  detail::check_binary(a.shape(), b.shape(), "add");
  Tensor<T> out = a.value();
  const Tensor<T>& bv = b.value();
  detail::for_each_pair(a.shape(), b.shape(), [&](std::size_t i, std::size_t j) { out[i] += bv[j]; });
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& na = *self.inputs[0];
    Node<T>& nb = *self.inputs[1];
    const Tensor<T>& g = self.grad;
    if (na.requires_grad) {
      Tensor<T>& ga = na.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (nb.requires_grad) {
      Tensor<T>& gb = nb.grad_buffer();
      detail::for_each_pair(g.shape(), nb.value.shape(),
                            [&](std::size_t i, std::size_t j) { gb[j] += g[i]; });
    }
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  detail::check_binary(a.shape(), b.shape(), "sub");
  Tensor<T> out = a.value();
  const Tensor<T>& bv = b.value();
  detail::for_each_pair(a.shape(), b.shape(), [&](std::size_t i, std::size_t j) { out[i] -= bv[j]; });
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& na = *self.inputs[0];
    Node<T>& nb = *self.inputs[1];
    const Tensor<T>& g = self.grad;
    if (na.requires_grad) {
      Tensor<T>& ga = na.grad_buffer();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (nb.requires_grad) {
      Tensor<T>& gb = nb.grad_buffer();
      detail::for_each_pair(g.shape(), nb.value.shape(),
                            [&](std::size_t i, std::size_t j) { gb[j] -= g[i]; });
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  detail::check_binary(a.shape(), b.shape(), "mul");
  Tensor<T> out = a.value();
  const Tensor<T>& bv = b.value();
  detail::for_each_pair(a.shape(), b.shape(), [&](std::size_t i, std::size_t j) { out[i] *= bv[j]; });
  return make_result<T>(std::move(out), {a, b}, [](Node<T>& self) {
    Node<T>& na = *self.inputs[0];
    Node<T>& nb = *self.inputs[1];
    const Tensor<T>& g = self.grad;
    const Shape& bs = nb.value.shape();
    if (na.requires_grad) {
      Tensor<T>& ga = na.grad_buffer();
      detail::for_each_pair(g.shape(), bs,
                            [&](std::size_t i, std::size_t j) { ga[i] += g[i] * nb.value[j]; });
    }
    if (nb.requires_grad) {
      Tensor<T>& gb = nb.grad_buffer();
      detail::for_each_pair(g.shape(), bs,
                            [&](std::size_t i, std::size_t j) { gb[j] += g[i] * na.value[i]; });
    }
  });
}

template <typename T>
Var<T> scalar_mul(const Var<T>& a, T s) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v *= s;
  return make_result<T>(std::move(out), {a}, [s](Node<T>& self) {
    Tensor<T>& ga = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += s * self.grad[i];
  });
}

template <typename T>
Var<T> scalar_add(const Var<T>& a, T s) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v += s;
  return make_result<T>(std::move(out), {a}, [](Node<T>& self) {
    Tensor<T>& ga = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) ga[i] += self.grad[i];
  });
}

/// Element-wise square root; inputs must be positive.
template <typename T>
Var<T> sqrt(const Var<T>& a) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v = std::sqrt(v);
  return make_result<T>(std::move(out), {a}, [](Node<T>& self) {
    Tensor<T>& ga = self.inputs[0]->grad_buffer();
    for (std::size_t i = 0; i < self.grad.size(); ++i) {
      ga[i] += self.grad[i] / (T(2) * self.value[i]);
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions
// ---------------------------------------------------------------------------

enum Axis : unsigned {
  kBatch = 1u << 0,
  kChannel = 1u << 1,
  kHeight = 1u << 2,
  kWidth = 1u << 3,
  kAllAxes = kBatch | kChannel | kHeight | kWidth,
};

namespace detail {

inline Shape reduced_shape(const Shape& s, unsigned axes) {
  return {(axes & kBatch) ? 1 : s.n, (axes & kChannel) ? 1 : s.c, (axes & kHeight) ? 1 : s.h,
          (axes & kWidth) ? 1 : s.w};
}

// Maps every element of s to its slot in the reduced shape r.
template <typename F>
void for_each_reduced(const Shape& s, const Shape& r, F&& f) {
  std::size_t i = 0;
  for (std::size_t n = 0; n < s.n; ++n) {
    const std::size_t rn = r.n == 1 ? 0 : n;
    for (std::size_t c = 0; c < s.c; ++c) {
      const std::size_t rc = r.c == 1 ? 0 : c;
      for (std::size_t y = 0; y < s.h; ++y) {
        const std::size_t ry = r.h == 1 ? 0 : y;
        const std::size_t row = ((rn * r.c + rc) * r.h + ry) * r.w;
        for (std::size_t x = 0; x < s.w; ++x, ++i) f(i, row + (r.w == 1 ? 0 : x));
      }
    }
  }
}

template <typename T>
Var<T> reduce_scaled(const Var<T>& a, unsigned axes, bool mean) {
  require((axes & ~static_cast<unsigned>(kAllAxes)) == 0, ErrorCode::ShapeMismatch,
          "reduce: unknown axis bits");
  const Shape& s = a.shape();
  const Shape r = reduced_shape(s, axes);
  // Accumulate wider than T so check-precision losses stay well below the
  // resolution a central difference can see.
  using Acc = std::conditional_t<std::is_same_v<T, float>, double, long double>;
  std::vector<Acc> acc(r.numel(), Acc(0));
  const Tensor<T>& av = a.value();
  for_each_reduced(s, r, [&](std::size_t i, std::size_t j) { acc[j] += static_cast<Acc>(av[i]); });
  const std::size_t count = r.numel() == 0 ? 0 : s.numel() / r.numel();
  Tensor<T> out(r);
  for (std::size_t j = 0; j < acc.size(); ++j) {
    // mean is sum / n evaluated in T, bit-identical to dividing sum's output.
    out[j] = mean ? static_cast<T>(acc[j]) / static_cast<T>(count) : static_cast<T>(acc[j]);
  }
  const T scale = mean ? T(1) / static_cast<T>(count) : T(1);
  return make_result<T>(std::move(out), {a}, [scale](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    Tensor<T>& ga = in.grad_buffer();
    const Tensor<T>& g = self.grad;
    for_each_reduced(in.value.shape(), g.shape(),
                     [&](std::size_t i, std::size_t j) { ga[i] += scale * g[j]; });
  });
}

}  // namespace detail

template <typename T>
Var<T> sum(const Var<T>& a, unsigned axes = kAllAxes) {
  return detail::reduce_scaled(a, axes, false);
}

template <typename T>
Var<T> mean(const Var<T>& a, unsigned axes = kAllAxes) {
  return detail::reduce_scaled(a, axes, true);
}

}  // namespace srmnet
