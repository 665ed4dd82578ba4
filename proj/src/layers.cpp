// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/layers.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "puzzlesim/errors.hpp"
#include "puzzlesim/parallel.hpp"

namespace puzzlesim {

int conv_output_size(int in, int kernel, int stride, int padding) {
  const int span = in + 2 * padding - kernel;
  if (span < 0) return 0;
  return span / stride + 1;
}

int pool_output_size(int in, int kernel, int stride, int padding, bool ceil_mode) {
  const int span = in + 2 * padding - kernel;
  if (span < 0) return 0;
  int out = (ceil_mode ? (span + stride - 1) / stride : span / stride) + 1;
  if (ceil_mode && (out - 1) * stride >= in + padding) --out;
  return out;
}

namespace {

constexpr int kOcBlock = 8;

Tensor zero_pad(const Tensor& input, int padding) {
  if (padding == 0) return input;
  const int c = input.dim(0);
  const int h = input.dim(1);
  const int w = input.dim(2);
  const int hp = h + 2 * padding;
  const int wp = w + 2 * padding;
  Tensor out({c, hp, wp}, 0.0f);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < h; ++y) {
      const float* src = input.data() + (static_cast<std::size_t>(ch) * h + y) * w;
      float* dst = out.data() + (static_cast<std::size_t>(ch) * hp + y + padding) * wp + padding;
      std::copy_n(src, w, dst);
    }
  }
  return out;
}

// One block of up to kOcBlock output channels for a single output row. The
// accumulator rows stay resident while every (ic, ky, kx) tap streams over them.
template <int kStride>
void conv_row_block(const float* padded, int cin, int hp, int wp, const float* weight, int kh, int kw, int oy,
                    int stride, int out_w, int oc_count, std::array<float*, kOcBlock> acc) {
  const int s = kStride > 0 ? kStride : stride;
  const std::size_t wstride_oc = static_cast<std::size_t>(cin) * kh * kw;
  for (int ic = 0; ic < cin; ++ic) {
    for (int ky = 0; ky < kh; ++ky) {
      const float* row = padded + (static_cast<std::size_t>(ic) * hp + static_cast<std::size_t>(oy) * s + ky) * wp;
      for (int kx = 0; kx < kw; ++kx) {
        std::array<float, kOcBlock> wv{};
        const std::size_t widx = (static_cast<std::size_t>(ic) * kh + ky) * kw + kx;
        for (int j = 0; j < oc_count; ++j) wv[static_cast<std::size_t>(j)] = weight[j * wstride_oc + widx];
        const float* src = row + kx;
        if (oc_count == kOcBlock) {
          for (int j = 0; j < kOcBlock; ++j) {
            float* a = acc[static_cast<std::size_t>(j)];
            const float wj = wv[static_cast<std::size_t>(j)];
            for (int ox = 0; ox < out_w; ++ox) a[ox] += wj * src[ox * s];
          }
        } else {
          for (int j = 0; j < oc_count; ++j) {
            float* a = acc[static_cast<std::size_t>(j)];
            const float wj = wv[static_cast<std::size_t>(j)];
            for (int ox = 0; ox < out_w; ++ox) a[ox] += wj * src[ox * s];
          }
        }
      }
    }
  }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride, int padding) {
  if (input.rank() != 3) throw ShapeError("conv2d input must be [Cin,H,W], got " + shape_string(input.shape()));
  if (weight.rank() != 4) throw ShapeError("conv2d weight must be [Cout,Cin,kh,kw], got " + shape_string(weight.shape()));
  if (bias.rank() != 1 || bias.dim(0) != weight.dim(0)) {
    throw ShapeError("conv2d bias must be [Cout], got " + shape_string(bias.shape()));
  }
  if (weight.dim(1) != input.dim(0)) {
    throw ShapeError("conv2d channel mismatch: input has " + std::to_string(input.dim(0)) + ", weight expects " +
                     std::to_string(weight.dim(1)));
  }
  if (stride < 1 || padding < 0) throw ArgumentError("conv2d stride must be >= 1 and padding >= 0");

  const int cin = input.dim(0);
  const int cout = weight.dim(0);
  const int kh = weight.dim(2);
  const int kw = weight.dim(3);
  const int out_h = conv_output_size(input.dim(1), kh, stride, padding);
  const int out_w = conv_output_size(input.dim(2), kw, stride, padding);
  if (out_h < 1 || out_w < 1) throw ShapeError("conv2d input smaller than kernel");

  const Tensor padded = zero_pad(input, padding);
  const int hp = padded.dim(1);
  const int wp = padded.dim(2);
  Tensor out({cout, out_h, out_w});
  const std::size_t out_plane = static_cast<std::size_t>(out_h) * out_w;
  const std::size_t blocks = static_cast<std::size_t>((cout + kOcBlock - 1) / kOcBlock);

  parallel_for(blocks, [&](std::size_t b) {
    const int oc0 = static_cast<int>(b) * kOcBlock;
    const int oc_count = std::min(kOcBlock, cout - oc0);
    const float* wblock = weight.data() + static_cast<std::size_t>(oc0) * cin * kh * kw;
    for (int oy = 0; oy < out_h; ++oy) {
      std::array<float*, kOcBlock> acc{};
      for (int j = 0; j < oc_count; ++j) {
        acc[static_cast<std::size_t>(j)] = out.data() + (oc0 + j) * out_plane + static_cast<std::size_t>(oy) * out_w;
        std::fill_n(acc[static_cast<std::size_t>(j)], out_w, bias[static_cast<std::size_t>(oc0 + j)]);
      }
      if (stride == 1) {
        conv_row_block<1>(padded.data(), cin, hp, wp, wblock, kh, kw, oy, stride, out_w, oc_count, acc);
      } else {
        conv_row_block<0>(padded.data(), cin, hp, wp, wblock, kh, kw, oy, stride, out_w, oc_count, acc);
      }
    }
  });
  return out;
}

Tensor relu(Tensor t) {
  for (float& v : t.values()) v = v > 0.0f ? v : 0.0f;
  return t;
}

Tensor maxpool2d(const Tensor& input, int kernel, int stride, int padding, bool ceil_mode) {
  if (input.rank() != 3) throw ShapeError("maxpool2d input must be [C,H,W]");
  if (kernel < 1 || stride < 1 || padding < 0 || 2 * padding > kernel) {
    throw ArgumentError("maxpool2d: invalid kernel/stride/padding");
  }
  const int c = input.dim(0);
  const int h = input.dim(1);
  const int w = input.dim(2);
  const int out_h = pool_output_size(h, kernel, stride, padding, ceil_mode);
  const int out_w = pool_output_size(w, kernel, stride, padding, ceil_mode);
  if (out_h < 1 || out_w < 1) throw ShapeError("maxpool2d input smaller than kernel");
  Tensor out({c, out_h, out_w});
  parallel_for(static_cast<std::size_t>(c), [&](std::size_t ch) {
    const float* src = input.data() + ch * static_cast<std::size_t>(h) * w;
    float* dst = out.data() + ch * static_cast<std::size_t>(out_h) * out_w;
    for (int oy = 0; oy < out_h; ++oy) {
      const int y0 = std::max(oy * stride - padding, 0);
      const int y1 = std::min(oy * stride - padding + kernel, h);
      for (int ox = 0; ox < out_w; ++ox) {
        const int x0 = std::max(ox * stride - padding, 0);
        const int x1 = std::min(ox * stride - padding + kernel, w);
        float m = -std::numeric_limits<float>::infinity();
        for (int y = y0; y < y1; ++y) {
          for (int x = x0; x < x1; ++x) m = std::max(m, src[static_cast<std::size_t>(y) * w + x]);
        }
        dst[static_cast<std::size_t>(oy) * out_w + ox] = m;
      }
    }
  });
  return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.rank() != 3 || b.rank() != 3 || a.dim(1) != b.dim(1) || a.dim(2) != b.dim(2)) {
    throw ShapeError("concat_channels: spatial shapes differ");
  }
  std::vector<float> data;
  data.reserve(a.size() + b.size());
  data.insert(data.end(), a.values().begin(), a.values().end());
  data.insert(data.end(), b.values().begin(), b.values().end());
  return Tensor({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)}, std::move(data));
}

}  // namespace puzzlesim
