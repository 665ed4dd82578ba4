// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "puzzlesim/errors.hpp"

namespace puzzlesim {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed for " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

// ---------------------------------------------------------------------------
// PNG

struct PngMemReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<PngMemReader*>(png_get_io_ptr(png));
  if (src->bytes.size() - src->pos < n) png_error(png, "truncated PNG stream");
  std::copy_n(src->bytes.data() + src->pos, n, out);
  src->pos += n;
}

void png_write_mem(png_structp png, png_bytep data, png_size_t n) {
  auto* dst = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  dst->insert(dst->end(), data, data + n);
}

void png_flush_noop(png_structp) {}

void png_error_jump(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  if (message) *message = msg;
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

struct DecodedPixels {
  int width = 0;
  int height = 0;
  int channels = 0;   // 1 or 3 after transforms
  int bit_depth = 0;  // 8 or 16
  std::vector<std::uint8_t> rows;
};

// Returns false and fills `error` on failure. No C++ objects with nontrivial
// destructors may be created between setjmp and the longjmp sites here.
bool decode_png_raw(std::span<const std::uint8_t> bytes, DecodedPixels& out, std::string& error) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_jump, png_warning_ignore);
  if (!png) {
    error = "png_create_read_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    error = "png_create_info_struct failed";
    return false;
  }
  PngMemReader reader{bytes, 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &reader, png_read_mem);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  out.rows.resize(rowbytes * static_cast<std::size_t>(out.height));
  for (int y = 0; y < out.height; ++y) {
    png_read_row(png, out.rows.data() + rowbytes * static_cast<std::size_t>(y), nullptr);
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

ImageTensor pixels_to_image(const DecodedPixels& px, const std::string& origin) {
  if (px.bit_depth != 8 && px.bit_depth != 16) {
    throw FormatError(origin + ": unsupported bit depth " + std::to_string(px.bit_depth));
  }
  if (px.channels != 1 && px.channels != 3) {
    throw FormatError(origin + ": unsupported channel count " + std::to_string(px.channels));
  }
  Tensor planar({3, px.height, px.width});
  const std::size_t plane = static_cast<std::size_t>(px.height) * px.width;
  const std::size_t samples_per_row = static_cast<std::size_t>(px.width) * px.channels;
  for (int y = 0; y < px.height; ++y) {
    for (int x = 0; x < px.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const int src_c = px.channels == 1 ? 0 : c;
        const std::size_t s = static_cast<std::size_t>(y) * samples_per_row +
                              static_cast<std::size_t>(x) * px.channels + src_c;
        float v;
        if (px.bit_depth == 8) {
          v = static_cast<float>(px.rows[s]) / 255.0f;
        } else {
          // PNG stores 16-bit samples big-endian.
          const unsigned hi = px.rows[2 * s];
          const unsigned lo = px.rows[2 * s + 1];
          v = static_cast<float>((hi << 8) | lo) / 65535.0f;
        }
        planar[c * plane + static_cast<std::size_t>(y) * px.width + x] = v;
      }
    }
  }
  return ImageTensor(std::move(planar));
}

bool encode_png_raw(const std::uint8_t* rows, int width, int height, int color_type, int bit_depth,
                    std::vector<std::uint8_t>& out, std::string& error) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_jump, png_warning_ignore);
  if (!png) {
    error = "png_create_write_struct failed";
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    error = "png_create_info_struct failed";
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, png_write_mem, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const int samples = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = (static_cast<std::size_t>(width) * samples * bit_depth + 7) / 8;
  for (int y = 0; y < height; ++y) {
    png_write_row(png, rows + rowbytes * static_cast<std::size_t>(y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

std::vector<std::uint8_t> encode_rgb8(const std::vector<std::uint8_t>& rgb, int width, int height) {
  std::vector<std::uint8_t> out;
  std::string error;
  if (!encode_png_raw(rgb.data(), width, height, PNG_COLOR_TYPE_RGB, 8, out, error)) {
    throw IoError("PNG encode failed: " + error);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JPEG

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_jump(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

bool decode_jpeg_raw(std::span<const std::uint8_t> bytes, DecodedPixels& out, std::string& error) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_jump;
  jerr.message[0] = '\0';
  if (setjmp(jerr.jump)) {
    error = jerr.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.data_precision != 8) {
    std::snprintf(jerr.message, sizeof jerr.message, "unsupported bit depth %d", cinfo.data_precision);
    error = jerr.message;
    jpeg_destroy_decompress(&cinfo);
    out.bit_depth = cinfo.data_precision;
    return false;
  }
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.channels = cinfo.output_components;
  out.bit_depth = 8;
  const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
  out.rows.resize(stride * static_cast<std::size_t>(out.height));
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.rows.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

bool is_png(std::span<const std::uint8_t> b) {
  static constexpr std::array<std::uint8_t, 8> sig = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  return b.size() >= sig.size() && std::equal(sig.begin(), sig.end(), b.begin());
}

bool is_jpeg(std::span<const std::uint8_t> b) { return b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF; }

std::uint8_t to_u8(float v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)); }

// ---------------------------------------------------------------------------
// Colormaps (polynomial fits of matplotlib's viridis and Google's turbo).

std::array<float, 3> viridis(float t) {
  static constexpr double c[7][3] = {
      {0.2777273272234177, 0.005407344544966578, 0.3340998053353061},
      {0.1050930431085774, 1.404613529898575, 1.384590162594685},
      {-0.3308618287255563, 0.214847559468213, 0.09509516302823659},
      {-4.634230498983486, -5.799100973351585, -19.33244095627987},
      {6.228269936347081, 14.17993336680509, 56.69055260068105},
      {4.776384997670288, -13.74514537774601, -65.35303263337234},
      {-5.435455855934631, 4.645852612178535, 26.3124352495832},
  };
  std::array<float, 3> rgb{};
  for (int k = 0; k < 3; ++k) {
    double v = c[6][k];
    for (int i = 5; i >= 0; --i) v = c[i][k] + t * v;
    rgb[static_cast<std::size_t>(k)] = static_cast<float>(v);
  }
  return rgb;
}

std::array<float, 3> turbo(float t) {
  static constexpr double c[3][6] = {
      {0.13572138, 4.61539260, -42.66032258, 132.13108234, -152.94239396, 59.28637943},
      {0.09140261, 2.19418839, 4.84296658, -14.18503333, 4.27729857, 2.82956604},
      {0.10667330, 12.64194608, -60.58204836, 110.36276771, -89.90310912, 27.34824973},
  };
  std::array<float, 3> rgb{};
  for (int k = 0; k < 3; ++k) {
    double v = c[k][5];
    for (int i = 4; i >= 0; --i) v = c[k][i] + t * v;
    rgb[static_cast<std::size_t>(k)] = static_cast<float>(v);
  }
  return rgb;
}

}  // namespace

ImageTensor decode_image(std::span<const std::uint8_t> bytes, const std::string& origin) {
  DecodedPixels px;
  std::string error;
  if (is_png(bytes)) {
    if (!decode_png_raw(bytes, px, error)) throw FormatError(origin + ": " + error);
  } else if (is_jpeg(bytes)) {
    if (!decode_jpeg_raw(bytes, px, error)) throw FormatError(origin + ": " + error);
  } else {
    throw FormatError(origin + ": not a PNG or JPEG stream");
  }
  return pixels_to_image(px, origin);
}

ImageTensor load_image(const std::filesystem::path& path) { return decode_image(read_file_bytes(path), path.string()); }

std::vector<std::uint8_t> encode_png(const ImageTensor& image) {
  const int h = image.height();
  const int w = image.width();
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(h) * w * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        rgb[(static_cast<std::size_t>(y) * w + x) * 3 + c] = to_u8(image.at(c, y, x));
      }
    }
  }
  return encode_rgb8(rgb, w, h);
}

void save_png(const ImageTensor& image, const std::filesystem::path& path) {
  write_file_bytes(path, encode_png(image));
}

std::vector<std::uint8_t> encode_mask_png(const Tensor& mask) {
  if (mask.rank() != 2) throw ShapeError("mask must be [H,W]");
  const int h = mask.dim(0);
  const int w = mask.dim(1);
  const std::size_t rowbytes = (static_cast<std::size_t>(w) + 7) / 8;
  std::vector<std::uint8_t> packed(rowbytes * static_cast<std::size_t>(h), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask[static_cast<std::size_t>(y) * w + x] != 0.0f) {
        packed[rowbytes * static_cast<std::size_t>(y) + static_cast<std::size_t>(x / 8)] |=
            static_cast<std::uint8_t>(0x80u >> (x % 8));
      }
    }
  }
  std::vector<std::uint8_t> out;
  std::string error;
  if (!encode_png_raw(packed.data(), w, h, PNG_COLOR_TYPE_GRAY, 1, out, error)) {
    throw IoError("PNG encode failed: " + error);
  }
  return out;
}

Colormap parse_colormap(const std::string& name) {
  if (name == "viridis") return Colormap::kViridis;
  if (name == "turbo") return Colormap::kTurbo;
  if (name == "gray") return Colormap::kGray;
  throw ArgumentError("unknown colormap '" + name + "' (expected viridis, turbo or gray)");
}

std::filesystem::path sidecar_path(const std::filesystem::path& png_path) {
  std::filesystem::path p = png_path;
  p.replace_extension(".pzsm");
  return p;
}

void save_heatmap(const Tensor& map, const std::filesystem::path& path, Colormap colormap) {
  if (map.rank() != 2) throw ShapeError("heatmap must be [H,W], got " + shape_string(map.shape()));
  if (!all_finite(map)) throw ArgumentError("heatmap values must be finite");
  const int h = map.dim(0);
  const int w = map.dim(1);
  const float lo = min_value(map);
  const float hi = max_value(map);
  const float range = hi - lo;
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(h) * w * 3);
  for (std::size_t i = 0; i < map.size(); ++i) {
    const float t = range > 0.0f ? (map[i] - lo) / range : 0.0f;
    std::array<float, 3> c{};
    switch (colormap) {
      case Colormap::kViridis: c = viridis(t); break;
      case Colormap::kTurbo: c = turbo(t); break;
      case Colormap::kGray: c = {t, t, t}; break;
    }
    for (int k = 0; k < 3; ++k) rgb[i * 3 + static_cast<std::size_t>(k)] = to_u8(c[static_cast<std::size_t>(k)]);
  }
  write_file_bytes(path, encode_rgb8(rgb, w, h));
  write_sidecar(map, sidecar_path(path));
}

std::vector<std::uint8_t> encode_sidecar(const Tensor& map) {
  if (map.rank() != 2) throw ShapeError("sidecar map must be [H,W]");
  detail::ByteWriter out;
  out.magic("PZSM");
  out.u32(static_cast<std::uint32_t>(map.dim(0)));
  out.u32(static_cast<std::uint32_t>(map.dim(1)));
  out.u32(0);
  out.f32s(map.values());
  return std::move(out.bytes());
}

Tensor decode_sidecar(std::span<const std::uint8_t> bytes, const std::string& origin) {
  detail::ByteReader in(bytes, origin);
  in.expect_magic("PZSM");
  const std::uint32_t h = in.u32();
  const std::uint32_t w = in.u32();
  in.u32();
  if (h == 0 || w == 0) in.fail("zero-sized map");
  if (in.remaining() != static_cast<std::size_t>(h) * w * sizeof(float)) in.fail("payload size mismatch");
  Tensor map({static_cast<int>(h), static_cast<int>(w)});
  in.f32s(map.values());
  return map;
}

void write_sidecar(const Tensor& map, const std::filesystem::path& path) {
  write_file_bytes(path, encode_sidecar(map));
}

Tensor read_sidecar(const std::filesystem::path& path) {
  return decode_sidecar(read_file_bytes(path), path.string());
}

}  // namespace puzzlesim
