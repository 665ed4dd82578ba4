// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "puzzlesim/tensor.hpp"

namespace puzzlesim {

// Zero-padded direct convolution.
//   input  [Cin,H,W], weight [Cout,Cin,kh,kw], bias [Cout]
//   output [Cout, (H+2p-kh)/s+1, (W+2p-kw)/s+1]
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int stride, int padding);

Tensor relu(Tensor t);

// Padding positions never win the max. With ceil_mode, a trailing partial
// window is kept as long as it starts inside the (left-padded) input.
Tensor maxpool2d(const Tensor& input, int kernel, int stride, int padding, bool ceil_mode);

int conv_output_size(int in, int kernel, int stride, int padding);
int pool_output_size(int in, int kernel, int stride, int padding, bool ceil_mode);

// Channel concatenation of [C1,H,W] and [C2,H,W].
Tensor concat_channels(const Tensor& a, const Tensor& b);

}  // namespace puzzlesim
