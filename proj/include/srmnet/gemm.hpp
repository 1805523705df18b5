// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "srmnet/parallel.hpp"

namespace srmnet::gemm {

// Register tile: kRows rows of C by kCols<T> columns. 64 bytes per vector
// lane group, two groups per row.
inline constexpr std::size_t kRows = 6;
template <typename T>
inline constexpr std::size_t kCols = 2 * 64 / sizeof(T);
inline constexpr std::size_t kDepthBlock = 256;

namespace detail {

template <typename T>
struct VecOf;
template <>
struct VecOf<float> {
  typedef float type __attribute__((vector_size(64)));
};
template <>
struct VecOf<double> {
  typedef double type __attribute__((vector_size(64)));
};
template <typename T>
using Vec = typename VecOf<T>::type;

template <typename T>
inline Vec<T> load(const T* p) {
  Vec<T> v;
  __builtin_memcpy(&v, p, sizeof(v));
  return v;
}

template <typename T, typename V>
inline void store(T* p, V v) {
  __builtin_memcpy(p, &v, sizeof(v));
}

// C[0:Rows, 0:kCols] += A[0:Rows, 0:depth] * B[0:depth, 0:kCols]
template <std::size_t Rows, typename T>
inline void micro_kernel(std::size_t depth, const T* a, std::size_t lda, const T* b,
                         std::size_t ldb, T* c, std::size_t ldc) {
  constexpr std::size_t lanes = 64 / sizeof(T);
  Vec<T> lo[Rows];
  Vec<T> hi[Rows];
  for (std::size_t r = 0; r < Rows; ++r) {
    lo[r] = load(c + r * ldc);
    hi[r] = load(c + r * ldc + lanes);
  }
  for (std::size_t k = 0; k < depth; ++k) {
    const Vec<T> b0 = load(b + k * ldb);
    const Vec<T> b1 = load(b + k * ldb + lanes);
#pragma GCC unroll 6
    for (std::size_t r = 0; r < Rows; ++r) {
      const T av = a[r * lda + k];
      lo[r] += av * b0;
      hi[r] += av * b1;
    }
  }
  for (std::size_t r = 0; r < Rows; ++r) {
    store(c + r * ldc, lo[r]);
    store(c + r * ldc + lanes, hi[r]);
  }
}

// Scalar edge path for partial tiles, same k order as the micro-kernel.
template <typename T>
inline void edge_kernel(std::size_t rows, std::size_t cols, std::size_t depth, const T* a,
                        std::size_t lda, const T* b, std::size_t ldb, T* c, std::size_t ldc) {
  for (std::size_t r = 0; r < rows; ++r) {
    T* crow = c + r * ldc;
    for (std::size_t k = 0; k < depth; ++k) {
      const T av = a[r * lda + k];
      const T* brow = b + k * ldb;
      for (std::size_t j = 0; j < cols; ++j) crow[j] += av * brow[j];
    }
  }
}

template <typename T>
void multiply_columns(std::size_t m, std::size_t col_begin, std::size_t col_end, std::size_t k,
                      const T* a, std::size_t lda, const T* b, std::size_t ldb, T* c,
                      std::size_t ldc) {
  constexpr std::size_t cols = kCols<T>;
  for (std::size_t k0 = 0; k0 < k; k0 += kDepthBlock) {
    const std::size_t depth = std::min(kDepthBlock, k - k0);
    for (std::size_t j = col_begin; j < col_end; j += cols) {
      const std::size_t width = std::min(cols, col_end - j);
      for (std::size_t i = 0; i < m; i += kRows) {
        const std::size_t rows = std::min(kRows, m - i);
        const T* ablock = a + i * lda + k0;
        const T* bblock = b + k0 * ldb + j;
        T* cblock = c + i * ldc + j;
        if (width == cols) {
          switch (rows) {
            case 6: micro_kernel<6>(depth, ablock, lda, bblock, ldb, cblock, ldc); break;
            case 5: micro_kernel<5>(depth, ablock, lda, bblock, ldb, cblock, ldc); break;
            case 4: micro_kernel<4>(depth, ablock, lda, bblock, ldb, cblock, ldc); break;
            case 3: micro_kernel<3>(depth, ablock, lda, bblock, ldb, cblock, ldc); break;
            case 2: micro_kernel<2>(depth, ablock, lda, bblock, ldb, cblock, ldc); break;
            default: micro_kernel<1>(depth, ablock, lda, bblock, ldb, cblock, ldc); break;
          }
        } else {
          edge_kernel(rows, width, depth, ablock, lda, bblock, ldb, cblock, ldc);
        }
      }
    }
  }
}

}  // namespace detail

/// C (m x n) = A (m x k) * B (k x n) [+ C when accumulate], all row-major.
///
/// Work is split across the pool along n in multiples of the register tile
/// width, so each element of C sees the same accumulation order no matter
/// how many threads run.
template <typename T>
void multiply(std::size_t m, std::size_t n, std::size_t k, const T* a, std::size_t lda, const T* b,
              std::size_t ldb, T* c, std::size_t ldc, bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, T(0));
  }
  if (m == 0 || n == 0 || k == 0) return;
  parallel_for(n, kCols<T>, [&](std::size_t begin, std::size_t end) {
    detail::multiply_columns(m, begin, end, k, a, lda, b, ldb, c, ldc);
  });
}

/// Row-major transpose: out (cols x rows) = in (rows x cols)^T.
template <typename T>
void transpose(std::size_t rows, std::size_t cols, const T* in, T* out) {
  constexpr std::size_t block = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += block) {
    for (std::size_t j0 = 0; j0 < cols; j0 += block) {
      const std::size_t i1 = std::min(rows, i0 + block);
      const std::size_t j1 = std::min(cols, j0 + block);
      for (std::size_t i = i0; i < i1; ++i) {
        for (std::size_t j = j0; j < j1; ++j) out[j * rows + i] = in[i * cols + j];
      }
    }
  }
}

}  // namespace srmnet::gemm
