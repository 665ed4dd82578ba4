// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "fixtures.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

namespace puzzlesim::testing {

namespace fs = std::filesystem;

Tensor random_tensor(const std::vector<int>& shape, std::mt19937_64& rng, float lo, float hi) {
  std::uniform_real_distribution<float> dist(lo, hi);
  Tensor t(shape);
  for (float& v : t.values()) v = dist(rng);
  return t;
}

TensorArchive synthetic_archive(const NetworkSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TensorArchive archive;
  auto conv_weights = [&](const std::string& wkey, const std::string& bkey, int out, int in, int kh, int kw) {
    std::normal_distribution<float> dist(0.0f, std::sqrt(2.0f / static_cast<float>(in * kh * kw)));
    Tensor w({out, in, kh, kw});
    for (float& v : w.values()) v = dist(rng);
    // Zero-mean filters, as trained filters roughly are. Plain He draws make
    // every post-ReLU vector point the same way and flatten all cosines.
    const std::size_t per = static_cast<std::size_t>(in) * kh * kw;
    if (per > 1) {
      for (int o = 0; o < out; ++o) {
        auto f = w.values().subspan(o * per, per);
        double mean = 0.0;
        for (float v : f) mean += v;
        mean /= static_cast<double>(per);
        for (float& v : f) v = static_cast<float>(v - mean);
      }
    }
    std::uniform_real_distribution<float> bias(-0.05f, 0.05f);
    Tensor b({out});
    for (float& v : b.values()) v = bias(rng);
    archive.entries[wkey] = std::move(w);
    archive.entries[bkey] = std::move(b);
  };
  for (const LayerDesc& l : spec.layers) {
    const auto& k = l.weight_keys;
    if (l.kind == LayerKind::kConv2d) {
      conv_weights(k[0], k[1], l.out_channels, l.in_channels, l.kernel_h, l.kernel_w);
    } else if (l.kind == LayerKind::kFire) {
      conv_weights(k[0], k[1], l.squeeze, l.in_channels, 1, 1);
      conv_weights(k[2], k[3], l.expand1x1, l.squeeze, 1, 1);
      conv_weights(k[4], k[5], l.expand3x3, l.squeeze, 3, 3);
    }
  }
  archive.metadata["preprocess.mean"] = format_triple({0.485f, 0.456f, 0.406f});
  archive.metadata["preprocess.std"] = format_triple({0.229f, 0.224f, 0.225f});
  archive.metadata["spec.name"] = spec.name;
  return archive;
}

bool using_exported_archive() {
  const char* env = std::getenv("PUZZLESIM_SQUEEZENET_PZTA");
  return env && *env;
}

TensorArchive squeezenet_archive() {
  if (using_exported_archive()) return load_archive(std::getenv("PUZZLESIM_SQUEEZENET_PZTA"));
  return synthetic_archive(builtin_spec("squeezenet1_1"));
}

ImageTensor scene_canvas(int height, int width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor t({3, height, width});
  const std::size_t plane = static_cast<std::size_t>(height) * width;

  // Low-frequency colour field.
  struct Wave {
    float fy, fx, phase, amp;
  };
  std::vector<Wave> waves[3];
  for (auto& ch : waves) {
    for (int k = 0; k < 4; ++k) ch.push_back({u(rng) * 0.02f, u(rng) * 0.02f, u(rng) * 6.28f, 0.08f + 0.08f * u(rng)});
  }
  for (int c = 0; c < 3; ++c) {
    const float base = 0.3f + 0.4f * u(rng);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        float v = base;
        for (const Wave& w : waves[c]) v += w.amp * std::sin(w.fy * y + w.fx * x + w.phase);
        t[c * plane + static_cast<std::size_t>(y) * width + x] = v;
      }
    }
  }

  // Solid discs, striped discs and checkered rectangles.
  const int shapes = std::max(12, height * width / 9000);
  for (int s = 0; s < shapes; ++s) {
    const float cy = u(rng) * height;
    const float cx = u(rng) * width;
    const float r = 10.0f + u(rng) * 40.0f;
    const float col[3] = {u(rng), u(rng), u(rng)};
    const float col2[3] = {u(rng), u(rng), u(rng)};
    const int kind = static_cast<int>(u(rng) * 3.0f);
    const float period = 4.0f + u(rng) * 10.0f;
    const float angle = u(rng) * std::numbers::pi_v<float>;
    const int y0 = std::max(0, static_cast<int>(cy - r));
    const int y1 = std::min(height, static_cast<int>(cy + r) + 1);
    const int x0 = std::max(0, static_cast<int>(cx - r));
    const int x1 = std::min(width, static_cast<int>(cx + r) + 1);
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const float dy = y - cy;
        const float dx = x - cx;
        bool inside = kind == 2 ? true : dy * dy + dx * dx <= r * r;
        if (!inside) continue;
        bool second = false;
        if (kind == 1) {
          second = std::fmod(std::abs(dx * std::cos(angle) + dy * std::sin(angle)), period) < period * 0.5f;
        } else if (kind == 2) {
          second = ((static_cast<int>(std::floor(dx / period)) + static_cast<int>(std::floor(dy / period))) & 1) != 0;
        }
        for (int c = 0; c < 3; ++c) {
          t[c * plane + static_cast<std::size_t>(y) * width + x] = second ? col2[c] : col[c];
        }
      }
    }
  }
  for (float& v : t.values()) v = std::clamp(v, 0.0f, 1.0f);
  return ImageTensor(std::move(t));
}

ImageTensor crop(const ImageTensor& image, int y0, int x0, int height, int width) {
  if (y0 < 0 || x0 < 0 || y0 + height > image.height() || x0 + width > image.width()) {
    throw std::out_of_range("crop outside image");
  }
  Tensor t({3, height, width});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        t[(static_cast<std::size_t>(c) * height + y) * width + x] = image.at(c, y0 + y, x0 + x);
      }
    }
  }
  return ImageTensor(std::move(t));
}

SceneViews scene_views(int size, int count, std::uint64_t seed) {
  const int canvas = size + size / 2;
  const ImageTensor full = scene_canvas(canvas, canvas, seed);
  const int span = canvas - size;
  SceneViews views;
  // Reference offsets walk around the canvas; the held-out view sits between
  // them so every part of it is covered by some reference.
  for (int i = 0; i < count; ++i) {
    const double a = 2.0 * std::numbers::pi * i / std::max(count, 1);
    const int y = static_cast<int>(std::lround(span * (0.5 + 0.5 * std::sin(a))));
    const int x = static_cast<int>(std::lround(span * (0.5 + 0.5 * std::cos(a))));
    views.references.push_back(crop(full, y, x, size, size));
  }
  views.held_out = crop(full, span * 3 / 8, span * 5 / 8, size, size);
  return views;
}

Tensor add_noise_patch(ImageTensor& image, int y0, int x0, int side, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor mask({image.height(), image.width()}, 0.0f);
  for (int y = y0; y < std::min(y0 + side, image.height()); ++y) {
    for (int x = x0; x < std::min(x0 + side, image.width()); ++x) {
      for (int c = 0; c < 3; ++c) image.set(c, y, x, u(rng));
      mask[static_cast<std::size_t>(y) * image.width() + x] = 1.0f;
    }
  }
  return mask;
}

TempDir::TempDir() {
  std::string tmpl = (fs::temp_directory_path() / "puzzlesim-test-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace puzzlesim::testing
