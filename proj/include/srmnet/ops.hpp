// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "srmnet/autodiff.hpp"
#include "srmnet/gemm.hpp"

namespace srmnet {

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

/// Same-padded, stride-1 convolution with a square 1x1 or 3x3 kernel.
struct ConvSpec {
  std::size_t in_channels = 0;
  std::size_t out_channels = 0;
  std::size_t kernel = 3;
  bool bias = true;

  std::size_t padding() const { return kernel / 2; }
  std::size_t weight_count() const { return out_channels * in_channels * kernel * kernel; }
  std::size_t param_count() const { return weight_count() + (bias ? out_channels : 0); }
  Shape weight_shape() const { return {out_channels, in_channels, kernel, kernel}; }
  Shape bias_shape() const { return {1, out_channels, 1, 1}; }
};

enum class ConvAlgo { Naive, Im2col };

namespace detail {

template <typename T>
void im2col3x3(const T* img, std::size_t channels, std::size_t height, std::size_t width, T* col) {
  const std::size_t plane = height * width;
  for (std::size_t c = 0; c < channels; ++c) {
    const T* src = img + c * plane;
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        T* row = col + ((c * 3 + ky) * 3 + kx) * plane;
        for (std::size_t y = 0; y < height; ++y) {
          T* dst = row + y * width;
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(height)) {
            std::fill(dst, dst + width, T(0));
            continue;
          }
          const T* line = src + static_cast<std::size_t>(sy) * width;
          // kx = 0 reads x-1, kx = 2 reads x+1.
          if (kx == 0) {
            dst[0] = T(0);
            std::copy(line, line + width - 1, dst + 1);
          } else if (kx == 1) {
            std::copy(line, line + width, dst);
          } else {
            std::copy(line + 1, line + width, dst);
            dst[width - 1] = T(0);
          }
        }
      }
    }
  }
}

template <typename T>
void col2im3x3_add(const T* col, std::size_t channels, std::size_t height, std::size_t width,
                   T* img) {
  const std::size_t plane = height * width;
  for (std::size_t c = 0; c < channels; ++c) {
    T* dst = img + c * plane;
    for (std::size_t ky = 0; ky < 3; ++ky) {
      for (std::size_t kx = 0; kx < 3; ++kx) {
        const T* row = col + ((c * 3 + ky) * 3 + kx) * plane;
        for (std::size_t y = 0; y < height; ++y) {
          const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
          if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(height)) continue;
          T* line = dst + static_cast<std::size_t>(sy) * width;
          const T* src = row + y * width;
          if (kx == 0) {
            for (std::size_t x = 1; x < width; ++x) line[x - 1] += src[x];
          } else if (kx == 1) {
            for (std::size_t x = 0; x < width; ++x) line[x] += src[x];
          } else {
            for (std::size_t x = 0; x + 1 < width; ++x) line[x + 1] += src[x];
          }
        }
      }
    }
  }
}

inline ConvSpec conv_spec_from(const Shape& x, const Shape& weight, bool has_bias) {
  require(weight.h == weight.w && (weight.h == 1 || weight.h == 3), ErrorCode::ShapeMismatch,
          "conv2d: kernel must be 1x1 or 3x3, got " + weight.str());
  require(x.c == weight.c, ErrorCode::ShapeMismatch,
          "conv2d: input " + x.str() + " does not match weight " + weight.str());
  return {weight.c, weight.n, weight.h, has_bias};
}

template <typename T>
void add_bias(Tensor<T>& out, const Tensor<T>& bias) {
  const Shape& s = out.shape();
  for (std::size_t b = 0; b < s.n; ++b) {
    for (std::size_t c = 0; c < s.c; ++c) {
      T* p = out.ptr() + (b * s.c + c) * s.plane();
      const T v = bias[c];
      for (std::size_t i = 0; i < s.plane(); ++i) p[i] += v;
    }
  }
}

template <typename T>
void accumulate_bias_grad(const Tensor<T>& grad_out, Tensor<T>& grad_bias) {
  const Shape& s = grad_out.shape();
  for (std::size_t c = 0; c < s.c; ++c) {
    T acc = T(0);
    for (std::size_t b = 0; b < s.n; ++b) {
      const T* p = grad_out.ptr() + (b * s.c + c) * s.plane();
      for (std::size_t i = 0; i < s.plane(); ++i) acc += p[i];
    }
    grad_bias[c] += acc;
  }
}

template <typename T>
Tensor<T> conv_forward_naive(const Tensor<T>& x, const Tensor<T>& w, const ConvSpec& spec) {
  const Shape& s = x.shape();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(spec.padding());
  const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(s.h);
  const std::ptrdiff_t wd = static_cast<std::ptrdiff_t>(s.w);
  Tensor<T> out({s.n, spec.out_channels, s.h, s.w});
  for (std::size_t b = 0; b < s.n; ++b)
    for (std::size_t co = 0; co < spec.out_channels; ++co)
      for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t xx = 0; xx < wd; ++xx) {
          T acc = T(0);
          for (std::size_t ci = 0; ci < spec.in_channels; ++ci)
            for (std::size_t ky = 0; ky < spec.kernel; ++ky)
              for (std::size_t kx = 0; kx < spec.kernel; ++kx) {
                const std::ptrdiff_t sy = y + static_cast<std::ptrdiff_t>(ky) - pad;
                const std::ptrdiff_t sx = xx + static_cast<std::ptrdiff_t>(kx) - pad;
                if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                acc += w.at(co, ci, ky, kx) *
                       x.at(b, ci, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
              }
          out.at(b, co, static_cast<std::size_t>(y), static_cast<std::size_t>(xx)) = acc;
        }
  return out;
}

template <typename T>
void conv_backward_naive(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& g,
                         const ConvSpec& spec, Tensor<T>* gx, Tensor<T>* gw) {
  const Shape& s = x.shape();
  const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(spec.padding());
  const std::ptrdiff_t h = static_cast<std::ptrdiff_t>(s.h);
  const std::ptrdiff_t wd = static_cast<std::ptrdiff_t>(s.w);
  for (std::size_t b = 0; b < s.n; ++b)
    for (std::size_t co = 0; co < spec.out_channels; ++co)
      for (std::ptrdiff_t y = 0; y < h; ++y)
        for (std::ptrdiff_t xx = 0; xx < wd; ++xx) {
          const T go = g.at(b, co, static_cast<std::size_t>(y), static_cast<std::size_t>(xx));
          for (std::size_t ci = 0; ci < spec.in_channels; ++ci)
            for (std::size_t ky = 0; ky < spec.kernel; ++ky)
              for (std::size_t kx = 0; kx < spec.kernel; ++kx) {
                const std::ptrdiff_t sy = y + static_cast<std::ptrdiff_t>(ky) - pad;
                const std::ptrdiff_t sx = xx + static_cast<std::ptrdiff_t>(kx) - pad;
                if (sy < 0 || sy >= h || sx < 0 || sx >= wd) continue;
                const auto uy = static_cast<std::size_t>(sy);
                const auto ux = static_cast<std::size_t>(sx);
                if (gx) gx->at(b, ci, uy, ux) += go * w.at(co, ci, ky, kx);
                if (gw) gw->at(co, ci, ky, kx) += go * x.at(b, ci, uy, ux);
              }
        }
}

// Columns of the lowered input for one sample: (Cin*k*k) x (H*W).
template <typename T>
const T* lowered_input(const Tensor<T>& x, std::size_t b, const ConvSpec& spec,
                       std::vector<T>& scratch) {
  const Shape& s = x.shape();
  const T* sample = x.ptr() + b * s.c * s.plane();
  if (spec.kernel == 1) return sample;
  scratch.resize(s.c * 9 * s.plane());
  im2col3x3(sample, s.c, s.h, s.w, scratch.data());
  return scratch.data();
}

template <typename T>
Tensor<T> conv_forward_im2col(const Tensor<T>& x, const Tensor<T>& w, const ConvSpec& spec) {
  const Shape& s = x.shape();
  const std::size_t plane = s.plane();
  const std::size_t depth = spec.in_channels * spec.kernel * spec.kernel;
  Tensor<T> out({s.n, spec.out_channels, s.h, s.w});
  std::vector<T> col;
  for (std::size_t b = 0; b < s.n; ++b) {
    const T* lowered = lowered_input(x, b, spec, col);
    gemm::multiply(spec.out_channels, plane, depth, w.ptr(), depth, lowered, plane,
                   out.ptr() + b * spec.out_channels * plane, plane, false);
  }
  return out;
}

template <typename T>
void conv_backward_im2col(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& g,
                          const ConvSpec& spec, Tensor<T>* gx, Tensor<T>* gw) {
  const Shape& s = x.shape();
  const std::size_t plane = s.plane();
  const std::size_t depth = spec.in_channels * spec.kernel * spec.kernel;
  const std::size_t cout = spec.out_channels;
  std::vector<T> col;
  std::vector<T> col_t;
  std::vector<T> w_t;
  std::vector<T> dcol;
  if (gx) {
    w_t.resize(depth * cout);
    gemm::transpose(cout, depth, w.ptr(), w_t.data());
  }
  for (std::size_t b = 0; b < s.n; ++b) {
    const T* gb = g.ptr() + b * cout * plane;
    if (gw) {
      const T* lowered = lowered_input(x, b, spec, col);
      col_t.resize(plane * depth);
      gemm::transpose(depth, plane, lowered, col_t.data());
      gemm::multiply(cout, depth, plane, gb, plane, col_t.data(), depth, gw->ptr(), depth, true);
    }
    if (gx) {
      T* gxb = gx->ptr() + b * s.c * plane;
      if (spec.kernel == 1) {
        gemm::multiply(depth, plane, cout, w_t.data(), cout, gb, plane, gxb, plane, true);
      } else {
        dcol.resize(depth * plane);
        gemm::multiply(depth, plane, cout, w_t.data(), cout, gb, plane, dcol.data(), plane, false);
        col2im3x3_add(dcol.data(), s.c, s.h, s.w, gxb);
      }
    }
  }
}

}  // namespace detail

/// 2-D convolution. `weight` is (Cout, Cin, k, k); `bias`, when given, is
/// (1, Cout, 1, 1).
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const std::optional<Var<std::type_identity_t<T>>>& bias,
              ConvAlgo algo = ConvAlgo::Im2col) {
  const ConvSpec spec = detail::conv_spec_from(x.shape(), weight.shape(), bias.has_value());
  if (bias) {
    require(bias->shape() == spec.bias_shape(), ErrorCode::ShapeMismatch,
            "conv2d: bias " + bias->shape().str() + " expected " + spec.bias_shape().str());
  }
  Tensor<T> out = algo == ConvAlgo::Naive
                      ? detail::conv_forward_naive(x.value(), weight.value(), spec)
                      : detail::conv_forward_im2col(x.value(), weight.value(), spec);
  if (bias) detail::add_bias(out, bias->value());

  std::vector<Var<T>> inputs{x, weight};
  if (bias) inputs.push_back(*bias);
  return make_result<T>(std::move(out), std::move(inputs), [spec, algo](Node<T>& self) {
    Node<T>& nx = *self.inputs[0];
    Node<T>& nw = *self.inputs[1];
    Tensor<T>* gx = nx.requires_grad ? &nx.grad_buffer() : nullptr;
    Tensor<T>* gw = nw.requires_grad ? &nw.grad_buffer() : nullptr;
    if (algo == ConvAlgo::Naive) {
      detail::conv_backward_naive(nx.value, nw.value, self.grad, spec, gx, gw);
    } else {
      detail::conv_backward_im2col(nx.value, nw.value, self.grad, spec, gx, gw);
    }
    if (self.inputs.size() > 2 && self.inputs[2]->requires_grad) {
      detail::accumulate_bias_grad(self.grad, self.inputs[2]->grad_buffer());
    }
  });
}

// ---------------------------------------------------------------------------
// Activation, pooling, attention weights
// ---------------------------------------------------------------------------

inline constexpr double kLeakySlope = 0.2;

/// Leaky rectifier: x for x >= 0, slope * x otherwise.
template <typename T>
Var<T> leaky_relu(const Var<T>& x, T slope = static_cast<T>(kLeakySlope)) {
  Tensor<T> out = x.value();
  if (KinkTrace* trace = KinkTrace::active()) {
    for (T v : out.data()) trace->record(v >= T(0));
  }
  for (auto& v : out.data()) v = v >= T(0) ? v : slope * v;
  return make_result<T>(std::move(out), {x}, [slope](Node<T>& self) {
    Node<T>& in = *self.inputs[0];
    Tensor<T>& gx = in.grad_buffer();
    for (std::size_t i = 0; i < gx.size(); ++i) {
      gx[i] += in.value[i] >= T(0) ? self.grad[i] : slope * self.grad[i];
    }
  });
}

/// (B,C,H,W) -> (B,C,1,1) spatial mean.
template <typename T>
Var<T> global_avg_pool(const Var<T>& x) {
  return mean(x, kHeight | kWidth);
}

/// Softmax across L same-shape logit tensors, independently per element.
template <typename T>
std::vector<Var<T>> branch_softmax(const std::vector<Var<T>>& logits) {
  require(logits.size() >= 2, ErrorCode::BranchCountMismatch, "branch_softmax needs >= 2 branches");
  const Shape shape = logits.front().shape();
  for (const auto& l : logits) {
    require(l.shape() == shape, ErrorCode::ShapeMismatch,
            "branch_softmax: " + l.shape().str() + " vs " + shape.str());
  }
  const std::size_t branches = logits.size();
  const std::size_t count = shape.numel();
  std::vector<Tensor<T>> probs(branches, Tensor<T>(shape));
  for (std::size_t i = 0; i < count; ++i) {
    T peak = logits[0].value()[i];
    for (std::size_t l = 1; l < branches; ++l) peak = std::max(peak, logits[l].value()[i]);
    T total = T(0);
    for (std::size_t l = 0; l < branches; ++l) {
      probs[l][i] = std::exp(logits[l].value()[i] - peak);
      total += probs[l][i];
    }
    for (std::size_t l = 0; l < branches; ++l) probs[l][i] /= total;
  }

  // Output k depends on every logit; each output node carries the full
  // Jacobian row dp_k/dz_j = p_k (delta_kj - p_j).
  auto shared_probs = std::make_shared<std::vector<Tensor<T>>>(probs);
  std::vector<Var<T>> outputs;
  outputs.reserve(branches);
  for (std::size_t k = 0; k < branches; ++k) {
    outputs.push_back(make_result<T>(std::move(probs[k]), logits, [k, shared_probs](Node<T>& self) {
      const auto& p = *shared_probs;
      const Tensor<T>& g = self.grad;
      for (std::size_t j = 0; j < self.inputs.size(); ++j) {
        Node<T>& in = *self.inputs[j];
        if (!in.requires_grad) continue;
        Tensor<T>& gz = in.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const T delta = j == k ? T(1) : T(0);
          gz[i] += g[i] * p[k][i] * (delta - p[j][i]);
        }
      }
    }));
  }
  return outputs;
}

// ---------------------------------------------------------------------------
// Resizing
// ---------------------------------------------------------------------------

enum class ResizeDirection { Down, Up };

namespace detail {

template <typename T>
struct Tap {
  std::size_t lo;
  std::size_t hi;
  T frac;
};

// Half-pixel centres: source = (o + 0.5) * in / out - 0.5, clamped at 0.
template <typename T>
std::vector<Tap<T>> bilinear_taps(std::size_t in, std::size_t out) {
  std::vector<Tap<T>> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    auto lo = static_cast<std::size_t>(src);
    if (lo >= in - 1) {
      taps[o] = {in - 1, in - 1, T(0)};
    } else {
      taps[o] = {lo, lo + 1, static_cast<T>(src - static_cast<double>(lo))};
    }
  }
  return taps;
}

inline bool is_supported_factor(std::size_t factor) {
  return factor == 2 || factor == 4 || factor == 8;
}

}  // namespace detail

/// Bilinear resampling by 2, 4 or 8 (align_corners = false). Interpolation is
/// evaluated in lerp form a + t (b - a), so constant images stay exact.
template <typename T>
Var<T> bilinear_resize(const Var<T>& x, std::size_t factor, ResizeDirection direction) {
  require(detail::is_supported_factor(factor), ErrorCode::IndivisibleSize,
          "bilinear_resize: factor must be 2, 4 or 8");
  const Shape& s = x.shape();
  Shape o = s;
  if (direction == ResizeDirection::Down) {
    require(s.h % factor == 0 && s.w % factor == 0, ErrorCode::IndivisibleSize,
            "bilinear_resize: " + s.str() + " not divisible by " + std::to_string(factor));
    o.h = s.h / factor;
    o.w = s.w / factor;
  } else {
    o.h = s.h * factor;
    o.w = s.w * factor;
  }
  auto ty = std::make_shared<std::vector<detail::Tap<T>>>(detail::bilinear_taps<T>(s.h, o.h));
  auto tx = std::make_shared<std::vector<detail::Tap<T>>>(detail::bilinear_taps<T>(s.w, o.w));

  Tensor<T> out(o);
  const Tensor<T>& in = x.value();
  for (std::size_t p = 0; p < s.n * s.c; ++p) {
    const T* src = in.ptr() + p * s.plane();
    T* dst = out.ptr() + p * o.plane();
    for (std::size_t y = 0; y < o.h; ++y) {
      const auto& vy = (*ty)[y];
      const T* r0 = src + vy.lo * s.w;
      const T* r1 = src + vy.hi * s.w;
      for (std::size_t xx = 0; xx < o.w; ++xx) {
        const auto& vx = (*tx)[xx];
        const T top = r0[vx.lo] + vx.frac * (r0[vx.hi] - r0[vx.lo]);
        const T bottom = r1[vx.lo] + vx.frac * (r1[vx.hi] - r1[vx.lo]);
        dst[y * o.w + xx] = top + vy.frac * (bottom - top);
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [ty, tx](Node<T>& self) {
    Node<T>& nin = *self.inputs[0];
    const Shape& is = nin.value.shape();
    const Shape& os = self.grad.shape();
    Tensor<T>& gin = nin.grad_buffer();
    for (std::size_t p = 0; p < is.n * is.c; ++p) {
      T* dst = gin.ptr() + p * is.plane();
      const T* src = self.grad.ptr() + p * os.plane();
      for (std::size_t y = 0; y < os.h; ++y) {
        const auto& vy = (*ty)[y];
        for (std::size_t xx = 0; xx < os.w; ++xx) {
          const auto& vx = (*tx)[xx];
          const T g = src[y * os.w + xx];
          const T gt = g * (T(1) - vy.frac);
          const T gb = g * vy.frac;
          dst[vy.lo * is.w + vx.lo] += gt * (T(1) - vx.frac);
          dst[vy.lo * is.w + vx.hi] += gt * vx.frac;
          dst[vy.hi * is.w + vx.lo] += gb * (T(1) - vx.frac);
          dst[vy.hi * is.w + vx.hi] += gb * vx.frac;
        }
      }
    }
  });
}

namespace detail {

// Calls f(low_res_index, high_res_index) for the space-to-depth layout
// channel 4c + 2dy + dx <- (c, 2y + dy, 2x + dx).
template <typename F>
void for_each_shuffle_pair(const Shape& high, F&& f) {
  const Shape low{high.n, high.c * 4, high.h / 2, high.w / 2};
  for (std::size_t b = 0; b < high.n; ++b)
    for (std::size_t c = 0; c < high.c; ++c)
      for (std::size_t dy = 0; dy < 2; ++dy)
        for (std::size_t dx = 0; dx < 2; ++dx) {
          const std::size_t lc = 4 * c + 2 * dy + dx;
          for (std::size_t y = 0; y < low.h; ++y)
            for (std::size_t x = 0; x < low.w; ++x) {
              const std::size_t li = ((b * low.c + lc) * low.h + y) * low.w + x;
              const std::size_t hi = ((b * high.c + c) * high.h + 2 * y + dy) * high.w + 2 * x + dx;
              f(li, hi);
            }
        }
}

}  // namespace detail

/// (B,C,H,W) -> (B,4C,H/2,W/2).
template <typename T>
Var<T> pixel_unshuffle(const Var<T>& x) {
  const Shape& s = x.shape();
  require(s.h % 2 == 0 && s.w % 2 == 0, ErrorCode::IndivisibleSize,
          "pixel_unshuffle: odd spatial size " + s.str());
  Tensor<T> out({s.n, s.c * 4, s.h / 2, s.w / 2});
  const Tensor<T>& in = x.value();
  detail::for_each_shuffle_pair(s, [&](std::size_t lo, std::size_t hi) { out[lo] = in[hi]; });
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    Node<T>& nin = *self.inputs[0];
    Tensor<T>& gin = nin.grad_buffer();
    detail::for_each_shuffle_pair(nin.value.shape(),
                                  [&](std::size_t lo, std::size_t hi) { gin[hi] += self.grad[lo]; });
  });
}

/// (B,4C,H,W) -> (B,C,2H,2W); exact inverse of pixel_unshuffle.
template <typename T>
Var<T> pixel_shuffle(const Var<T>& x) {
  const Shape& s = x.shape();
  require(s.c % 4 == 0, ErrorCode::IndivisibleSize,
          "pixel_shuffle: channels not divisible by 4 in " + s.str());
  const Shape high{s.n, s.c / 4, s.h * 2, s.w * 2};
  Tensor<T> out(high);
  const Tensor<T>& in = x.value();
  detail::for_each_shuffle_pair(high, [&](std::size_t lo, std::size_t hi) { out[hi] = in[lo]; });
  return make_result<T>(std::move(out), {x}, [](Node<T>& self) {
    Tensor<T>& gin = self.inputs[0]->grad_buffer();
    detail::for_each_shuffle_pair(self.grad.shape(),
                                  [&](std::size_t lo, std::size_t hi) { gin[lo] += self.grad[hi]; });
  });
}

/// Concatenates along the channel axis.
template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  require(!parts.empty(), ErrorCode::ShapeMismatch, "concat_channels: no inputs");
  Shape s = parts.front().shape();
  s.c = 0;
  for (const auto& p : parts) {
    const Shape& ps = p.shape();
    require(ps.n == s.n && ps.h == s.h && ps.w == s.w, ErrorCode::ShapeMismatch,
            "concat_channels: " + ps.str() + " vs " + parts.front().shape().str());
    s.c += ps.c;
  }
  Tensor<T> out(s);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const Shape& ps = p.shape();
    for (std::size_t b = 0; b < s.n; ++b) {
      const T* src = p.value().ptr() + b * ps.c * ps.plane();
      std::copy(src, src + ps.c * ps.plane(), out.ptr() + (b * s.c + offset) * s.plane());
    }
    offset += ps.c;
  }
  return make_result<T>(std::move(out), parts, [](Node<T>& self) {
    const Shape& s = self.grad.shape();
    std::size_t offset = 0;
    for (auto& in : self.inputs) {
      const Shape& ps = in->value.shape();
      if (in->requires_grad) {
        Tensor<T>& g = in->grad_buffer();
        for (std::size_t b = 0; b < s.n; ++b) {
          const T* src = self.grad.ptr() + (b * s.c + offset) * s.plane();
          T* dst = g.ptr() + b * ps.c * ps.plane();
          for (std::size_t i = 0; i < ps.c * ps.plane(); ++i) dst[i] += src[i];
        }
      }
      offset += ps.c;
    }
  });
}

}  // namespace srmnet
