// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>
#include <zlib.h>

#include <cstdio>
#include <cstring>
#include <limits>
#include <random>

#include <jpeglib.h>

#include "fixtures.hpp"
#include "puzzlesim/errors.hpp"
#include "puzzlesim/image_io.hpp"

namespace puzzlesim {
namespace {

// Minimal PNG writer built directly on zlib, independent of the library's
// libpng path. Rows are given already serialized (no filter byte).
std::vector<std::uint8_t> raw_png(int w, int h, int bit_depth, int color_type,
                                  const std::vector<std::vector<std::uint8_t>>& rows,
                                  const std::vector<std::uint8_t>& palette = {}) {
  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  auto be32 = [](std::vector<std::uint8_t>& v, std::uint32_t x) {
    for (int s = 24; s >= 0; s -= 8) v.push_back(static_cast<std::uint8_t>(x >> s));
  };
  auto chunk = [&](const char* type, const std::vector<std::uint8_t>& data) {
    be32(out, static_cast<std::uint32_t>(data.size()));
    std::vector<std::uint8_t> body(type, type + 4);
    body.insert(body.end(), data.begin(), data.end());
    out.insert(out.end(), body.begin(), body.end());
    be32(out, static_cast<std::uint32_t>(crc32(0, body.data(), static_cast<uInt>(body.size()))));
  };
  std::vector<std::uint8_t> ihdr;
  be32(ihdr, static_cast<std::uint32_t>(w));
  be32(ihdr, static_cast<std::uint32_t>(h));
  ihdr.insert(ihdr.end(), {static_cast<std::uint8_t>(bit_depth), static_cast<std::uint8_t>(color_type), 0, 0, 0});
  chunk("IHDR", ihdr);
  if (!palette.empty()) chunk("PLTE", palette);
  std::vector<std::uint8_t> raw;
  for (const auto& r : rows) {
    raw.push_back(0);
    raw.insert(raw.end(), r.begin(), r.end());
  }
  uLongf len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> z(len);
  compress(z.data(), &len, raw.data(), static_cast<uLong>(raw.size()));
  z.resize(len);
  chunk("IDAT", z);
  chunk("IEND", {});
  return out;
}

TEST(DecodeImage, WhitePngIsAllOnes) {
  auto png = raw_png(2, 2, 8, 2, {{255, 255, 255, 255, 255, 255}, {255, 255, 255, 255, 255, 255}});
  ImageTensor img = decode_image(png);
  ASSERT_EQ(img.height(), 2);
  ASSERT_EQ(img.width(), 2);
  for (float v : img.planar().values()) EXPECT_EQ(v, 1.0f);
}

TEST(DecodeImage, BlackPixelIsZero) {
  ImageTensor img = decode_image(raw_png(1, 1, 8, 2, {{0, 0, 0}}));
  for (float v : img.planar().values()) EXPECT_EQ(v, 0.0f);
}

TEST(DecodeImage, EightBitScalesBy255) {
  ImageTensor img = decode_image(raw_png(1, 1, 8, 2, {{128, 1, 254}}));
  EXPECT_NEAR(img.at(0, 0, 0), 0.50196, 1e-5);
  EXPECT_FLOAT_EQ(img.at(0, 0, 0), 128.0f / 255.0f);
  EXPECT_FLOAT_EQ(img.at(1, 0, 0), 1.0f / 255.0f);
  EXPECT_FLOAT_EQ(img.at(2, 0, 0), 254.0f / 255.0f);
}

TEST(DecodeImage, SixteenBitScalesBy65535) {
  // Big-endian samples 0x8000, 0x0001, 0xFFFF.
  ImageTensor img = decode_image(raw_png(1, 1, 16, 2, {{0x80, 0x00, 0x00, 0x01, 0xFF, 0xFF}}));
  EXPECT_FLOAT_EQ(img.at(0, 0, 0), 32768.0f / 65535.0f);
  EXPECT_FLOAT_EQ(img.at(1, 0, 0), 1.0f / 65535.0f);
  EXPECT_FLOAT_EQ(img.at(2, 0, 0), 1.0f);
}

TEST(DecodeImage, GrayIsReplicatedAndAlphaDropped) {
  ImageTensor gray = decode_image(raw_png(2, 1, 8, 0, {{51, 204}}));
  for (int c = 0; c < 3; ++c) {
    EXPECT_FLOAT_EQ(gray.at(c, 0, 0), 0.2f);
    EXPECT_FLOAT_EQ(gray.at(c, 0, 1), 0.8f);
  }
  ImageTensor rgba = decode_image(raw_png(1, 1, 8, 6, {{10, 20, 30, 0}}));
  EXPECT_FLOAT_EQ(rgba.at(0, 0, 0), 10.0f / 255.0f);
  EXPECT_FLOAT_EQ(rgba.at(2, 0, 0), 30.0f / 255.0f);
}

TEST(DecodeImage, PaletteAndOneBitGray) {
  ImageTensor pal = decode_image(raw_png(2, 1, 8, 3, {{1, 0}}, {0, 0, 0, 255, 128, 0}));
  EXPECT_FLOAT_EQ(pal.at(0, 0, 0), 1.0f);
  EXPECT_FLOAT_EQ(pal.at(1, 0, 0), 128.0f / 255.0f);
  EXPECT_FLOAT_EQ(pal.at(0, 0, 1), 0.0f);
  ImageTensor bits = decode_image(raw_png(3, 1, 1, 0, {{0b10100000}}));
  EXPECT_FLOAT_EQ(bits.at(0, 0, 0), 1.0f);
  EXPECT_FLOAT_EQ(bits.at(0, 0, 1), 0.0f);
  EXPECT_FLOAT_EQ(bits.at(0, 0, 2), 1.0f);
}

TEST(DecodeImage, GarbageIsAFormatError) {
  std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_THROW(decode_image(junk), FormatError);
  auto png = raw_png(4, 4, 8, 2, std::vector<std::vector<std::uint8_t>>(4, std::vector<std::uint8_t>(12, 9)));
  png.resize(png.size() - 30);
  EXPECT_THROW(decode_image(png), FormatError);
}

TEST(LoadImage, MissingFileIsAnIoError) {
  EXPECT_THROW(load_image("/nonexistent/definitely/missing.png"), IoError);
}

std::vector<std::uint8_t> gray_jpeg(int w, int h, std::uint8_t value) {
  jpeg_compress_struct cinfo{};
  jpeg_error_mgr jerr{};
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  unsigned char* buf = nullptr;
  unsigned long size = 0;
  jpeg_mem_dest(&cinfo, &buf, &size);
  cinfo.image_width = static_cast<JDIMENSION>(w);
  cinfo.image_height = static_cast<JDIMENSION>(h);
  cinfo.input_components = 1;
  cinfo.in_color_space = JCS_GRAYSCALE;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 100, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w), value);
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW r = row.data();
    jpeg_write_scanlines(&cinfo, &r, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> out(buf, buf + size);
  jpeg_destroy_compress(&cinfo);
  std::free(buf);
  return out;
}

TEST(DecodeImage, JpegGrayConstant) {
  ImageTensor img = decode_image(gray_jpeg(16, 8, 100));
  ASSERT_EQ(img.width(), 16);
  ASSERT_EQ(img.height(), 8);
  for (float v : img.planar().values()) EXPECT_NEAR(v, 100.0f / 255.0f, 1.5f / 255.0f);
}

TEST(EncodePng, RoundTripsEightBitValues) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(0, 255);
  Tensor t({3, 5, 7});
  for (float& v : t.values()) v = static_cast<float>(u(rng)) / 255.0f;
  ImageTensor img(t);
  EXPECT_EQ(decode_image(encode_png(img)), img);
}

TEST(MaskPng, WhiteMeansSet) {
  Tensor mask({2, 3}, std::vector<float>{1, 0, 0, 0, 1, 1});
  ImageTensor back = decode_image(encode_mask_png(mask));
  EXPECT_EQ(back.at(0, 0, 0), 1.0f);
  EXPECT_EQ(back.at(0, 0, 1), 0.0f);
  EXPECT_EQ(back.at(2, 1, 2), 1.0f);
}

TEST(Sidecar, HeaderLayout) {
  Tensor map({2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  auto bytes = encode_sidecar(map);
  ASSERT_EQ(bytes.size(), 16u + 6 * 4);
  EXPECT_EQ(std::memcmp(bytes.data(), "PZSM", 4), 0);
  std::uint32_t h, w, reserved;
  std::memcpy(&h, bytes.data() + 4, 4);
  std::memcpy(&w, bytes.data() + 8, 4);
  std::memcpy(&reserved, bytes.data() + 12, 4);
  EXPECT_EQ(h, 2u);
  EXPECT_EQ(w, 3u);
  EXPECT_EQ(reserved, 0u);
  float third;
  std::memcpy(&third, bytes.data() + 16 + 2 * 4, 4);
  EXPECT_EQ(third, 3.0f);
}

TEST(Sidecar, RoundTripIsExactProperty) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int trial = 0; trial < 50; ++trial) {
    Tensor map({1 + trial % 7, 1 + trial % 5});
    for (float& v : map.values()) {
      do {
        std::uint32_t b = bits(rng);
        std::memcpy(&v, &b, 4);
      } while (!std::isfinite(v));
    }
    map[0] = std::numeric_limits<float>::denorm_min();
    Tensor back = decode_sidecar(encode_sidecar(map));
    ASSERT_EQ(back.shape(), map.shape());
    ASSERT_EQ(std::memcmp(back.data(), map.data(), map.size() * 4), 0);
  }
}

TEST(Sidecar, RejectsTruncationAndBadMagic) {
  auto bytes = encode_sidecar(Tensor({2, 2}, 1.0f));
  auto cut = bytes;
  cut.pop_back();
  EXPECT_THROW(decode_sidecar(cut), FormatError);
  bytes[0] = 'X';
  EXPECT_THROW(decode_sidecar(bytes), FormatError);
}

TEST(SaveHeatmap, GrayEndpointsAndSidecar) {
  testing::TempDir dir;
  Tensor map({2, 1}, std::vector<float>{0.0f, 1.0f});
  save_heatmap(map, dir / "m.png", Colormap::kGray);
  ImageTensor png = load_image(dir / "m.png");
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(png.at(c, 0, 0), 0.0f);
    EXPECT_EQ(png.at(c, 1, 0), 1.0f);
  }
  EXPECT_EQ(sidecar_path(dir / "m.png"), dir / "m.pzsm");
  EXPECT_EQ(read_sidecar(dir / "m.pzsm"), map);
}

TEST(SaveHeatmap, ConstantMapIsUniform) {
  testing::TempDir dir;
  Tensor map({4, 5}, 0.3f);
  for (Colormap cm : {Colormap::kViridis, Colormap::kTurbo, Colormap::kGray}) {
    save_heatmap(map, dir / "c.png", cm);
    ImageTensor png = load_image(dir / "c.png");
    for (int c = 0; c < 3; ++c) {
      for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 5; ++x) EXPECT_EQ(png.at(c, y, x), png.at(c, 0, 0));
      }
    }
    Tensor side = read_sidecar(dir / "c.pzsm");
    for (float v : side.values()) EXPECT_EQ(v, 0.3f);
  }
}

TEST(SaveHeatmap, UnwritablePathIsAnIoError) {
  EXPECT_THROW(save_heatmap(Tensor({1, 1}), "/nonexistent/dir/x.png", Colormap::kGray), IoError);
}

TEST(Colormap, ParsesNames) {
  EXPECT_EQ(parse_colormap("viridis"), Colormap::kViridis);
  EXPECT_EQ(parse_colormap("turbo"), Colormap::kTurbo);
  EXPECT_EQ(parse_colormap("gray"), Colormap::kGray);
  EXPECT_THROW(parse_colormap("jet"), ArgumentError);
}

}  // namespace
}  // namespace puzzlesim
