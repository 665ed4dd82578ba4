// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/archive.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "archive_codec.hpp"
#include "puzzlesim/errors.hpp"
#include "puzzlesim/image_io.hpp"

namespace puzzlesim {

namespace detail {

void write_entries(ByteWriter& out, const std::map<std::string, Tensor>& entries) {
  out.u32(static_cast<std::uint32_t>(entries.size()));
  for (const auto& [key, t] : entries) {
    out.str16(key);
    if (t.rank() > 255) throw ArgumentError("tensor rank exceeds 255 for key " + key);
    out.u8(static_cast<std::uint8_t>(t.rank()));
    for (int d : t.shape()) out.u32(static_cast<std::uint32_t>(d));
    out.f32s(t.values());
  }
}

void write_metadata(ByteWriter& out, const std::map<std::string, std::string>& metadata) {
  out.u32(static_cast<std::uint32_t>(metadata.size()));
  for (const auto& [key, value] : metadata) {
    out.str32(key);
    out.str32(value);
  }
}

std::map<std::string, Tensor> read_entries(ByteReader& in) {
  std::map<std::string, Tensor> entries;
  const std::uint32_t count = in.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string key = in.str16();
    const int rank = in.u8();
    if (rank == 0) in.fail("entry '" + key + "' has rank 0");
    std::vector<int> shape(static_cast<std::size_t>(rank));
    std::size_t elements = 1;
    for (int& d : shape) {
      const std::uint32_t v = in.u32();
      if (v == 0 || v > 0x7FFFFFFFu) in.fail("entry '" + key + "' has invalid dimension");
      d = static_cast<int>(v);
      elements *= v;
    }
    if (elements > in.remaining() / sizeof(float)) in.fail("entry '" + key + "' exceeds file size");
    Tensor t(shape);
    in.f32s(t.values());
    if (!entries.emplace(std::move(key), std::move(t)).second) in.fail("duplicate entry key");
  }
  return entries;
}

std::map<std::string, std::string> read_metadata(ByteReader& in) {
  std::map<std::string, std::string> metadata;
  const std::uint32_t count = in.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string key = in.str32();
    std::string value = in.str32();
    if (!metadata.emplace(std::move(key), std::move(value)).second) in.fail("duplicate metadata key");
  }
  return metadata;
}

}  // namespace detail

const Tensor& TensorArchive::tensor(const std::string& key) const {
  auto it = entries.find(key);
  if (it == entries.end()) throw ValidationError("archive has no tensor '" + key + "'");
  return it->second;
}

const std::string& TensorArchive::meta(const std::string& key) const {
  auto it = metadata.find(key);
  if (it == metadata.end()) throw ValidationError("archive metadata is missing '" + key + "'");
  return it->second;
}

std::string format_triple(const std::array<float, 3>& v) {
  // %.9g round-trips any float exactly.
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g", static_cast<double>(v[0]), static_cast<double>(v[1]),
                static_cast<double>(v[2]));
  return buf;
}

std::array<float, 3> parse_triple(const std::string& text, const std::string& what) {
  std::array<float, 3> v{};
  std::istringstream in(text);
  std::string part;
  std::size_t n = 0;
  while (std::getline(in, part, ',')) {
    if (n == 3) throw ValidationError(what + ": expected 3 comma-separated values");
    try {
      std::size_t used = 0;
      v[n] = std::stof(part, &used);
      if (used == 0) throw std::invalid_argument("empty");
    } catch (const std::exception&) {
      throw ValidationError(what + ": cannot parse '" + part + "'");
    }
    if (!std::isfinite(v[n])) throw ValidationError(what + ": non-finite value");
    ++n;
  }
  if (n != 3) throw ValidationError(what + ": expected 3 comma-separated values");
  return v;
}

Preprocess TensorArchive::preprocess() const {
  Preprocess p;
  p.mean = parse_triple(meta("preprocess.mean"), "preprocess.mean");
  p.std = parse_triple(meta("preprocess.std"), "preprocess.std");
  for (float s : p.std) {
    if (!(s > 0.0f)) throw ValidationError("preprocess.std entries must be positive");
  }
  return p;
}

TensorArchive decode_archive(std::span<const std::uint8_t> bytes, const std::string& origin) {
  detail::ByteReader in(bytes, origin);
  in.expect_magic("PZTA");
  const std::uint32_t version = in.u32();
  if (version != kArchiveVersion) in.fail("unsupported archive version " + std::to_string(version));
  TensorArchive archive;
  archive.entries = detail::read_entries(in);
  archive.metadata = detail::read_metadata(in);
  if (!in.at_end()) in.fail("trailing bytes after metadata");
  for (const char* key : {"preprocess.mean", "preprocess.std", "spec.name"}) {
    if (!archive.metadata.contains(key)) {
      throw ValidationError(origin + ": archive metadata is missing '" + key + "'");
    }
  }
  archive.preprocess();
  return archive;
}

TensorArchive load_archive(const std::filesystem::path& path) {
  return decode_archive(read_file_bytes(path), path.string());
}

std::vector<std::uint8_t> encode_archive(const TensorArchive& archive) {
  detail::ByteWriter out;
  out.magic("PZTA");
  out.u32(kArchiveVersion);
  detail::write_entries(out, archive.entries);
  detail::write_metadata(out, archive.metadata);
  return std::move(out.bytes());
}

void save_archive(const TensorArchive& archive, const std::filesystem::path& path) {
  write_file_bytes(path, encode_archive(archive));
}

}  // namespace puzzlesim
