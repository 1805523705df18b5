// Copyright 2026 The SRMNet Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <tuple>
#include <vector>

#include "srmnet/gemm.hpp"
#include "test_util.hpp"

namespace srmnet {
namespace {

template <typename T>
std::vector<T> reference_gemm(std::size_t m, std::size_t n, std::size_t k, const std::vector<T>& a,
                              const std::vector<T>& b) {
  std::vector<T> c(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      long double acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += static_cast<long double>(a[i * k + p]) * b[p * n + j];
      c[i * n + j] = static_cast<T>(acc);
    }
  return c;
}

template <typename T>
std::vector<T> random_vector(std::size_t size, Rng& rng) {
  std::vector<T> v(size);
  for (auto& x : v) x = static_cast<T>(rng.uniform(-1.0, 1.0));
  return v;
}

class GemmShapes : public ::testing::TestWithParam<std::tuple<std::size_t, std::size_t, std::size_t>> {};

TEST_P(GemmShapes, MatchesReference) {
  const auto [m, n, k] = GetParam();
  Rng rng(mix_seed(m, mix_seed(n, k)));
  const auto a = random_vector<float>(m * k, rng);
  const auto b = random_vector<float>(k * n, rng);
  std::vector<float> c(m * n, 99.0f);
  gemm::multiply(m, n, k, a.data(), k, b.data(), n, c.data(), n, false);
  const auto ref = reference_gemm(m, n, k, a, b);
  for (std::size_t i = 0; i < c.size(); ++i) ASSERT_NEAR(c[i], ref[i], 2e-6 * (1.0 + k)) << i;

  const auto ad = random_vector<double>(m * k, rng);
  const auto bd = random_vector<double>(k * n, rng);
  std::vector<double> cd(m * n);
  gemm::multiply(m, n, k, ad.data(), k, bd.data(), n, cd.data(), n, false);
  const auto refd = reference_gemm(m, n, k, ad, bd);
  for (std::size_t i = 0; i < cd.size(); ++i) ASSERT_NEAR(cd[i], refd[i], 1e-13 * (1.0 + k)) << i;
}

// Edge tiles in both dimensions, depth past one block, and degenerate sizes.
INSTANTIATE_TEST_SUITE_P(Sizes, GemmShapes,
                         ::testing::Values(std::make_tuple(1, 1, 1), std::make_tuple(6, 32, 9),
                                           std::make_tuple(7, 33, 27), std::make_tuple(16, 256, 144),
                                           std::make_tuple(13, 129, 300), std::make_tuple(3, 5, 600),
                                           std::make_tuple(64, 17, 1), std::make_tuple(2, 1000, 36)));

TEST(Gemm, AccumulateAddsIntoC) {
  Rng rng(4);
  const std::size_t m = 5, n = 40, k = 12;
  const auto a = random_vector<double>(m * k, rng);
  const auto b = random_vector<double>(k * n, rng);
  std::vector<double> c(m * n, 1.0);
  gemm::multiply(m, n, k, a.data(), k, b.data(), n, c.data(), n, true);
  const auto ref = reference_gemm(m, n, k, a, b);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], ref[i] + 1.0, 1e-12);
}

TEST(Gemm, StridedOperands) {
  Rng rng(5);
  const std::size_t m = 4, n = 10, k = 3, lda = 7, ldb = 13, ldc = 11;
  const auto a = random_vector<double>(m * lda, rng);
  const auto b = random_vector<double>(k * ldb, rng);
  std::vector<double> c(m * ldc, -5.0);
  gemm::multiply(m, n, k, a.data(), lda, b.data(), ldb, c.data(), ldc, false);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < ldc; ++j) {
      if (j >= n) {
        EXPECT_EQ(c[i * ldc + j], -5.0);
        continue;
      }
      double acc = 0;
      for (std::size_t p = 0; p < k; ++p) acc += a[i * lda + p] * b[p * ldb + j];
      EXPECT_NEAR(c[i * ldc + j], acc, 1e-14);
    }
}

TEST(Gemm, ThreadCountDoesNotChangeBits) {
  Rng rng(6);
  const std::size_t m = 24, n = 777, k = 300;
  const auto a = random_vector<float>(m * k, rng);
  const auto b = random_vector<float>(k * n, rng);
  std::vector<float> one(m * n), four(m * n);
  set_num_threads(1);
  gemm::multiply(m, n, k, a.data(), k, b.data(), n, one.data(), n, false);
  set_num_threads(4);
  gemm::multiply(m, n, k, a.data(), k, b.data(), n, four.data(), n, false);
  set_num_threads(1);
  EXPECT_EQ(one, four);
}

TEST(Gemm, Transpose) {
  std::vector<int> in{1, 2, 3, 4, 5, 6};
  std::vector<int> out(6);
  gemm::transpose(2, 3, in.data(), out.data());
  EXPECT_EQ(out, (std::vector<int>{1, 4, 2, 5, 3, 6}));
}

TEST(ThreadPool, ParallelForCoversRangeOnce) {
  set_num_threads(3);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 7, [&](std::size_t begin, std::size_t end) {
    EXPECT_EQ(begin % 7, 0u);
    for (std::size_t i = begin; i < end; ++i) ++hits[i];
  });
  set_num_threads(1);
  for (int h : hits) EXPECT_EQ(h, 1);
}

}  // namespace
}  // namespace srmnet
