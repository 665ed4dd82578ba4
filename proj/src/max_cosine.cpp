// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/max_cosine.hpp"

#include <algorithm>
#include <array>
#include <limits>

#include "puzzlesim/errors.hpp"
#include "puzzlesim/parallel.hpp"

namespace puzzlesim {

namespace {

// Micro-tile: kRows queries against kLanes*kVecs packed reference columns.
constexpr int kLanes = 16;
constexpr int kVecs = 2;
constexpr int kRows = 6;
constexpr std::size_t kPanel = kLanes * kVecs;

// Wide channels accumulate in double.
constexpr std::size_t kDoubleAccumThreshold = 4096;

typedef float Vec __attribute__((vector_size(kLanes * sizeof(float))));

constexpr float kNegInf = -std::numeric_limits<float>::infinity();

// Packs `count` reference rows starting at `first` into panels of kPanel
// columns laid out [panel][channel][kPanel]; missing columns are zero.
void pack_reference_tile(const MatrixView& index, std::size_t first, std::size_t count, std::vector<float>& packed) {
  const std::size_t c = index.cols;
  const std::size_t panels = (count + kPanel - 1) / kPanel;
  packed.assign(panels * c * kPanel, 0.0f);
  for (std::size_t j = 0; j < count; ++j) {
    const float* src = index.row(first + j);
    float* dst = packed.data() + (j / kPanel) * c * kPanel + (j % kPanel);
    for (std::size_t k = 0; k < c; ++k) dst[k * kPanel] = src[k];
  }
}

// Running max for kRows query rows (rows beyond `rows` are zero padding)
// against one packed panel with `cols` valid columns.
void micro_kernel(const float* const* qrows, const float* panel, std::size_t channels, std::size_t cols,
                  float* running_max, std::size_t rows) {
  Vec acc[kRows][kVecs];
  for (int i = 0; i < kRows; ++i) {
    for (int v = 0; v < kVecs; ++v) acc[i][v] = Vec{};
  }
  for (std::size_t k = 0; k < channels; ++k) {
    Vec b[kVecs];
    for (int v = 0; v < kVecs; ++v) __builtin_memcpy(&b[v], panel + k * kPanel + v * kLanes, sizeof(Vec));
#pragma GCC unroll 6
    for (int i = 0; i < kRows; ++i) {
      const float a = qrows[i][k];
      for (int v = 0; v < kVecs; ++v) acc[i][v] += a * b[v];
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    float m = running_max[i];
    for (std::size_t j = 0; j < cols; ++j) m = std::max(m, acc[i][j / kLanes][j % kLanes]);
    running_max[i] = m;
  }
}

void scalar_double_tile(const MatrixView& query, std::size_t q0, std::size_t qn, const MatrixView& index,
                        std::size_t r0, std::size_t rn, float* running_max) {
  for (std::size_t i = 0; i < qn; ++i) {
    const float* q = query.row(q0 + i);
    float m = running_max[i];
    for (std::size_t j = 0; j < rn; ++j) {
      const float* r = index.row(r0 + j);
      double dot = 0.0;
      for (std::size_t k = 0; k < query.cols; ++k) dot += static_cast<double>(q[k]) * r[k];
      m = std::max(m, static_cast<float>(dot));
    }
    running_max[i] = m;
  }
}

}  // namespace

TileSizes autotune_tiles(TileSizes requested, std::size_t channels, std::size_t memory_budget_bytes, int threads) {
  if (requested.query == 0 || requested.ref == 0) throw ArgumentError("tile sizes must be >= 1");
  const std::size_t workers = static_cast<std::size_t>(std::max(threads, 1));
  auto bytes = [&](const TileSizes& t) {
    return workers * (t.query * t.ref + (t.query + t.ref) * channels) * sizeof(float);
  };
  TileSizes t = requested;
  while (bytes(t) > memory_budget_bytes && (t.ref > 1 || t.query > 1)) {
    if (t.ref > kPanel || t.query == 1) {
      t.ref = std::max<std::size_t>(1, t.ref / 2);
    } else {
      t.query = std::max<std::size_t>(1, t.query / 2);
    }
  }
  return t;
}

std::vector<float> max_cosine_tiled(MatrixView query, MatrixView index, TileSizes tiles) {
  if (query.cols != index.cols) {
    throw ShapeError("max_cosine_tiled: query has " + std::to_string(query.cols) + " channels, index has " +
                     std::to_string(index.cols));
  }
  if (index.rows == 0) throw ArgumentError("max_cosine_tiled: reference index is empty");
  if (tiles.query == 0 || tiles.ref == 0) throw ArgumentError("max_cosine_tiled: tile sizes must be >= 1");
  if (query.data.size() < query.rows * query.cols || index.data.size() < index.rows * index.cols) {
    throw ShapeError("max_cosine_tiled: matrix view smaller than rows x cols");
  }

  std::vector<float> out(query.rows, kNegInf);
  if (query.rows == 0) return out;
  const std::size_t channels = query.cols;
  const std::size_t query_tiles = (query.rows + tiles.query - 1) / tiles.query;
  const bool wide = channels > kDoubleAccumThreshold;
  const std::vector<float> zero_row(channels, 0.0f);

  parallel_for(query_tiles, [&](std::size_t t) {
    const std::size_t q0 = t * tiles.query;
    const std::size_t qn = std::min(tiles.query, query.rows - q0);
    float* running = out.data() + q0;
    std::vector<float> packed;
    for (std::size_t r0 = 0; r0 < index.rows; r0 += tiles.ref) {
      const std::size_t rn = std::min(tiles.ref, index.rows - r0);
      if (wide) {
        scalar_double_tile(query, q0, qn, index, r0, rn, running);
        continue;
      }
      pack_reference_tile(index, r0, rn, packed);
      const std::size_t panels = (rn + kPanel - 1) / kPanel;
      for (std::size_t p = 0; p < panels; ++p) {
        const float* panel = packed.data() + p * channels * kPanel;
        const std::size_t cols = std::min(kPanel, rn - p * kPanel);
        for (std::size_t i = 0; i < qn; i += kRows) {
          const std::size_t rows = std::min<std::size_t>(kRows, qn - i);
          std::array<const float*, kRows> qrows{};
          for (std::size_t k = 0; k < static_cast<std::size_t>(kRows); ++k) {
            qrows[k] = k < rows ? query.row(q0 + i + k) : zero_row.data();
          }
          micro_kernel(qrows.data(), panel, channels, cols, running + i, rows);
        }
      }
    }
  });
  return out;
}

}  // namespace puzzlesim
