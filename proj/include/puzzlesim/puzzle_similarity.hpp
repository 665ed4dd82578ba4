// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "puzzlesim/max_cosine.hpp"
#include "puzzlesim/network.hpp"
#include "puzzlesim/tensor.hpp"

namespace puzzlesim {

// Spatial position of an index row: reference image n, row y, column x.
struct RowOrigin {
  std::uint32_t image = 0;
  std::uint32_t y = 0;
  std::uint32_t x = 0;

  bool operator==(const RowOrigin&) const = default;
};

struct IndexTap {
  std::string name;
  Tensor rows;  // [R, C], unit rows
  std::vector<RowOrigin> origins;
  // Zero-norm feature vectors left out of `rows`.
  std::uint64_t degenerate_excluded = 0;

  std::size_t row_count() const { return static_cast<std::size_t>(rows.dim(0)); }
  std::size_t channels() const { return static_cast<std::size_t>(rows.dim(1)); }
  MatrixView view() const { return {rows.values(), row_count(), channels()}; }
};

// Unit-normalized feature vectors of every reference image, flattened per tap.
//
// On disk ("PZIX", version 1): magic, u32 version, then the PZTA entry and
// metadata sections. Entries "tap/<name>/rows" [R,C] and
// "tap/<name>/origins" [R,3]; metadata "spec.name", "taps" (comma list),
// "references" (newline list) and "tap/<name>/degenerate".
struct ReferenceIndex {
  std::string spec_name;
  std::vector<std::string> reference_names;
  std::vector<IndexTap> taps;

  const IndexTap& tap(const std::string& name) const;
};

// Flattens [C,H,W] features into unit rows [H*W, C]. Positions whose norm is
// zero get an all-zero row and a 1 in `degenerate`.
struct NormalizedRows {
  std::vector<float> rows;
  std::vector<std::uint8_t> degenerate;
  std::size_t count = 0;
  std::size_t channels = 0;
};
NormalizedRows normalize_positions(const Tensor& features);

// Throws ArgumentError for an empty reference list and ValidationError if a
// tap ends up with no usable rows. `names` may be empty.
ReferenceIndex build_index(std::span<const ImageTensor> refs, const Backbone& backbone,
                           std::vector<std::string> names = {});

std::vector<std::uint8_t> encode_index(const ReferenceIndex& index);
ReferenceIndex decode_index(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");
void save_index(const ReferenceIndex& index, const std::filesystem::path& path);
ReferenceIndex load_index(const std::filesystem::path& path);

struct SimilarityOptions {
  TileSizes tiles;
  std::size_t memory_budget_bytes = kDefaultMemoryBudget;
};

struct SimilarityLayer {
  std::string name;
  double weight = 0.0;
  Tensor values;      // [H_l, W_l], S_l before upsampling
  Tensor degenerate;  // [H_l, W_l], 1 where the query vector had zero norm
};

struct SimilarityMap {
  Tensor values;  // [H, W], fused
  std::vector<SimilarityLayer> layers;
};

// Per tap: best cosine match of every test position against the index, then
// S = sum_l w_l * Upsample(S_l) at the test image resolution. Zero-norm query
// positions score 0. Throws IndexMismatchError when the index was built with a
// different network.
SimilarityMap puzzle_similarity(const ImageTensor& test, const ReferenceIndex& index, const Backbone& backbone,
                                const SimilarityOptions& options = {});

}  // namespace puzzlesim
