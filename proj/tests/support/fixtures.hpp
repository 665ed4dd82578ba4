// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

// Deterministic fixtures shared by the unit, integration and acceptance
// suites: backbone archives with seeded weights and a procedural scene that
// can be viewed from several unaligned crops.

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "puzzlesim/archive.hpp"
#include "puzzlesim/network.hpp"
#include "puzzlesim/tensor.hpp"

namespace puzzlesim::testing {

// He-normal conv weights, small biases, ImageNet preprocessing metadata. The
// key layout matches the spec's weight keys exactly.
TensorArchive synthetic_archive(const NetworkSpec& spec, std::uint64_t seed = 7);

// The SqueezeNet archive used by the heavier suites: the file named by
// $PUZZLESIM_SQUEEZENET_PZTA when set, otherwise synthetic_archive().
TensorArchive squeezenet_archive();
bool using_exported_archive();

// Textured procedural canvas (smooth colour fields, blobs, stripes, checks).
ImageTensor scene_canvas(int height, int width, std::uint64_t seed = 1);
ImageTensor crop(const ImageTensor& image, int y0, int x0, int height, int width);

struct SceneViews {
  std::vector<ImageTensor> references;
  ImageTensor held_out;
};

// `count` reference crops plus one held-out crop at a different offset, all
// `size` x `size`, cut from a canvas about 1.5x larger.
SceneViews scene_views(int size, int count, std::uint64_t seed = 1);

// Overwrites a square region with uniform noise; returns the [H,W] 0/1 mask
// of the region.
Tensor add_noise_patch(ImageTensor& image, int y0, int x0, int side, std::uint64_t seed = 3);

Tensor random_tensor(const std::vector<int>& shape, std::mt19937_64& rng, float lo = -1.0f, float hi = 1.0f);

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace puzzlesim::testing
