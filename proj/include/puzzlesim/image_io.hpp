// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "puzzlesim/tensor.hpp"

namespace puzzlesim {

// Decodes an 8- or 16-bit PNG or 8-bit JPEG. Gray is replicated to RGB and
// alpha is dropped; 8-bit samples scale by 1/255, 16-bit by 1/65535.
ImageTensor load_image(const std::filesystem::path& path);
ImageTensor decode_image(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");

// 8-bit RGB PNG, values rounded to nearest.
std::vector<std::uint8_t> encode_png(const ImageTensor& image);
void save_png(const ImageTensor& image, const std::filesystem::path& path);

// 1-bit grayscale PNG of a {0,1} map (white where the map is nonzero).
std::vector<std::uint8_t> encode_mask_png(const Tensor& mask);

enum class Colormap { kViridis, kTurbo, kGray };

Colormap parse_colormap(const std::string& name);

// Writes the min-max normalized, colormapped PNG at `path` and the raw values
// to the PZSM sidecar at sidecar_path(path).
void save_heatmap(const Tensor& map, const std::filesystem::path& path, Colormap colormap);

std::filesystem::path sidecar_path(const std::filesystem::path& png_path);

// PZSM: "PZSM", u32 H, u32 W, u32 reserved (0), then H*W little-endian f32.
std::vector<std::uint8_t> encode_sidecar(const Tensor& map);
Tensor decode_sidecar(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");
void write_sidecar(const Tensor& map, const std::filesystem::path& path);
Tensor read_sidecar(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace puzzlesim
