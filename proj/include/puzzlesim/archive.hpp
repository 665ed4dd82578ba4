// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "puzzlesim/tensor.hpp"

namespace puzzlesim {

struct Preprocess {
  std::array<float, 3> mean{0.0f, 0.0f, 0.0f};
  std::array<float, 3> std{1.0f, 1.0f, 1.0f};

  bool operator==(const Preprocess&) const = default;
};

// Named weight tensors plus string metadata. A loadable archive always carries
// "preprocess.mean", "preprocess.std" and "spec.name".
//
// File layout ("PZTA", version 1, little-endian):
//   magic[4] u32 version u32 entry_count
//   entry_count x { u16 key_len, key bytes, u8 rank, u32 dims[rank], f32 data[] }
//   u32 metadata_count
//   metadata_count x { u32 key_len, key bytes, u32 value_len, value bytes }
struct TensorArchive {
  std::map<std::string, Tensor> entries;
  std::map<std::string, std::string> metadata;

  // Throws ValidationError when the key is absent.
  const Tensor& tensor(const std::string& key) const;
  const std::string& meta(const std::string& key) const;
  std::string spec_name() const { return meta("spec.name"); }
  Preprocess preprocess() const;
};

inline constexpr std::uint32_t kArchiveVersion = 1;

TensorArchive decode_archive(std::span<const std::uint8_t> bytes, const std::string& origin = "<memory>");
TensorArchive load_archive(const std::filesystem::path& path);

// Entries and metadata are written in sorted key order, so output is a pure
// function of content.
std::vector<std::uint8_t> encode_archive(const TensorArchive& archive);
void save_archive(const TensorArchive& archive, const std::filesystem::path& path);

std::string format_triple(const std::array<float, 3>& v);
std::array<float, 3> parse_triple(const std::string& text, const std::string& what);

}  // namespace puzzlesim
