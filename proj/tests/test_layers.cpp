// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "puzzlesim/errors.hpp"
#include "puzzlesim/layers.hpp"
#include "puzzlesim/parallel.hpp"

namespace puzzlesim {
namespace {

double max_relative_error(const Tensor& got, const Tensor& want) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    diff = std::max(diff, std::abs(static_cast<double>(got[i]) - want[i]));
    scale = std::max(scale, std::abs(static_cast<double>(want[i])));
  }
  return scale == 0.0 ? diff : diff / scale;
}

TEST(Conv2d, MatchesNestedLoopOracleProperty) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> ch(1, 40), sp(1, 23), k(1, 5), s(1, 3), p(0, 2);
  int checked = 0;
  while (checked < 150) {
    const int kh = k(rng), kw = rng() % 3 == 0 ? k(rng) : kh;
    const int stride = s(rng), pad = p(rng);
    const int h = sp(rng), w = sp(rng);
    if (h + 2 * pad < kh || w + 2 * pad < kw) continue;
    const int cin = ch(rng), cout = ch(rng);
    Tensor in = testing::random_tensor({cin, h, w}, rng);
    Tensor wt = testing::random_tensor({cout, cin, kh, kw}, rng);
    Tensor b = testing::random_tensor({cout}, rng);
    Tensor got = conv2d(in, wt, b, stride, pad);
    Tensor want = oracle::conv2d(in, wt, b, stride, pad);
    ASSERT_EQ(got.shape(), want.shape());
    ASSERT_LE(max_relative_error(got, want), 1e-5)
        << "cin=" << cin << " cout=" << cout << " " << h << "x" << w << " k=" << kh << "x" << kw << " s=" << stride
        << " p=" << pad;
    ++checked;
  }
}

TEST(Conv2d, ResultDoesNotDependOnThreadCount) {
  std::mt19937_64 rng(8);
  Tensor in = testing::random_tensor({19, 31, 29}, rng);
  Tensor wt = testing::random_tensor({37, 19, 3, 3}, rng);
  Tensor b = testing::random_tensor({37}, rng);
  set_max_threads(1);
  Tensor one = conv2d(in, wt, b, 1, 1);
  set_max_threads(4);
  Tensor four = conv2d(in, wt, b, 1, 1);
  set_max_threads(0);
  EXPECT_EQ(one, four);
}

TEST(Conv2d, ShapeErrors) {
  Tensor in({3, 8, 8});
  EXPECT_THROW(conv2d(in, Tensor({4, 2, 3, 3}), Tensor({4}), 1, 1), ShapeError);
  EXPECT_THROW(conv2d(in, Tensor({4, 3, 3, 3}), Tensor({5}), 1, 1), ShapeError);
  EXPECT_THROW(conv2d(in, Tensor({4, 3, 11, 11}), Tensor({4}), 1, 0), ShapeError);
  EXPECT_THROW(conv2d(Tensor({3, 8}), Tensor({4, 3, 3, 3}), Tensor({4}), 1, 1), ShapeError);
}

TEST(Conv2d, HandWorkedThreeByThree) {
  // All-ones 3x3 kernel over a 3x3 ramp with padding 1: corner sums.
  Tensor in({1, 3, 3}, std::vector<float>{1, 2, 3, 4, 5, 6, 7, 8, 9});
  Tensor out = conv2d(in, Tensor({1, 1, 3, 3}, 1.0f), Tensor({1}, 0.5f), 1, 1);
  EXPECT_FLOAT_EQ(out[0], 1 + 2 + 4 + 5 + 0.5f);
  EXPECT_FLOAT_EQ(out[4], 45.5f);
  EXPECT_FLOAT_EQ(out[8], 5 + 6 + 8 + 9 + 0.5f);
}

TEST(Relu, ClampsNegatives) {
  Tensor t({4}, std::vector<float>{-1.0f, 0.0f, 2.0f, -0.0f});
  Tensor r = relu(t);
  EXPECT_EQ(r[0], 0.0f);
  EXPECT_EQ(r[2], 2.0f);
}

TEST(MaxPool2d, OutputSizes) {
  EXPECT_EQ(pool_output_size(111, 3, 2, 0, true), 55);
  EXPECT_EQ(pool_output_size(55, 3, 2, 0, true), 27);
  EXPECT_EQ(pool_output_size(27, 3, 2, 0, true), 13);
  EXPECT_EQ(pool_output_size(6, 3, 2, 0, true), 3);
  EXPECT_EQ(pool_output_size(6, 3, 2, 0, false), 2);
  EXPECT_EQ(pool_output_size(224, 2, 2, 0, false), 112);
  // The trailing window would start in the right padding and is dropped.
  EXPECT_EQ(pool_output_size(5, 2, 2, 1, true), 3);
  EXPECT_EQ(conv_output_size(224, 3, 2, 0), 111);
  EXPECT_EQ(conv_output_size(224, 11, 4, 2), 55);
}

TEST(MaxPool2d, ExactAgainstOracleProperty) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> sp(1, 30), k(1, 4), s(1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int kernel = k(rng), stride = s(rng);
    const int pad = static_cast<int>(rng() % (kernel / 2 + 1));
    const int h = sp(rng), w = sp(rng);
    const bool ceil_mode = rng() % 2 == 0;
    if (h + 2 * pad < kernel || w + 2 * pad < kernel) continue;
    Tensor in = testing::random_tensor({3, h, w}, rng);
    EXPECT_EQ(maxpool2d(in, kernel, stride, pad, ceil_mode), oracle::maxpool2d(in, kernel, stride, pad, ceil_mode))
        << h << "x" << w << " k" << kernel << " s" << stride << " p" << pad << " ceil" << ceil_mode;
  }
}

TEST(MaxPool2d, RejectsOversizedPadding) {
  EXPECT_THROW(maxpool2d(Tensor({1, 4, 4}), 2, 2, 2, false), ArgumentError);
}

TEST(ConcatChannels, StacksAlongFirstAxis) {
  Tensor a({1, 1, 2}, std::vector<float>{1, 2});
  Tensor b({2, 1, 2}, std::vector<float>{3, 4, 5, 6});
  Tensor c = concat_channels(a, b);
  EXPECT_EQ(c.shape(), (std::vector<int>{3, 1, 2}));
  EXPECT_EQ(c[5], 6.0f);
  EXPECT_THROW(concat_channels(a, Tensor({1, 2, 2})), ShapeError);
}

}  // namespace
}  // namespace puzzlesim
