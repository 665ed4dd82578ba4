// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace puzzlesim {

// Row-major rows x cols view.
struct MatrixView {
  std::span<const float> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  const float* row(std::size_t r) const { return data.data() + r * cols; }
};

struct TileSizes {
  std::size_t query = 256;
  std::size_t ref = 4096;
};

inline constexpr std::size_t kDefaultMemoryBudget = std::size_t{512} << 20;

// Shrinks tiles (reference side first, then query side, halving each time)
// until threads * (query*ref + (query+ref)*channels) floats fit in the budget.
TileSizes autotune_tiles(TileSizes requested, std::size_t channels, std::size_t memory_budget_bytes, int threads);

// out[q] = max_r dot(query[q], index[r]).
//
// The reference rows are visited one tile at a time and every tile is folded
// into a running per-query max before the next tile is touched, so at most
// tile.query x tile.ref products exist at once. Each dot product is evaluated
// by the same instruction sequence wherever it falls inside a tile, so the
// result does not depend on the tile sizes or on the thread count.
//
// Throws ShapeError on a channel mismatch and ArgumentError when the index is
// empty or a tile size is zero.
std::vector<float> max_cosine_tiled(MatrixView query, MatrixView index, TileSizes tiles);

}  // namespace puzzlesim
