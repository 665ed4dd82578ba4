// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "puzzlesim/errors.hpp"

namespace puzzlesim {

std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

std::string shape_string(const std::vector<int>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void check_shape(const std::vector<int>& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  for (int d : shape) {
    if (d < 1) throw ShapeError("tensor dimensions must be positive, got " + shape_string(shape));
  }
}

}  // namespace

Tensor::Tensor(std::vector<int> shape, float fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_product(shape_), fill);
}

Tensor::Tensor(std::vector<int> shape, std::vector<float> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  check_shape(shape_);
  if (data_.size() != shape_product(shape_)) {
    throw ShapeError("data length " + std::to_string(data_.size()) + " does not match shape " +
                     shape_string(shape_));
  }
}

int Tensor::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) throw ArgumentError("axis out of range");
  return shape_[static_cast<std::size_t>(axis)];
}

Tensor Tensor::reshaped(std::vector<int> shape) const { return Tensor(std::move(shape), data_); }

float min_value(const Tensor& t) {
  if (t.empty()) throw ArgumentError("min of empty tensor");
  return *std::min_element(t.values().begin(), t.values().end());
}

float max_value(const Tensor& t) {
  if (t.empty()) throw ArgumentError("max of empty tensor");
  return *std::max_element(t.values().begin(), t.values().end());
}

double mean_value(const Tensor& t) {
  if (t.empty()) throw ArgumentError("mean of empty tensor");
  double sum = 0.0;
  for (float v : t.values()) sum += v;
  return sum / static_cast<double>(t.size());
}

bool all_finite(const Tensor& t) {
  return std::all_of(t.values().begin(), t.values().end(), [](float v) { return std::isfinite(v); });
}

namespace {

// Source coordinate and blend weight for each output index, align-corners.
struct Tap1D {
  int lo;
  int hi;
  float frac;
};

std::vector<Tap1D> axis_taps(int in, int out) {
  std::vector<Tap1D> taps(static_cast<std::size_t>(out));
  const double scale = out > 1 ? static_cast<double>(in - 1) / (out - 1) : 0.0;
  for (int i = 0; i < out; ++i) {
    const double src = scale * i;
    int lo = static_cast<int>(std::floor(src));
    lo = std::clamp(lo, 0, in - 1);
    const int hi = std::min(lo + 1, in - 1);
    taps[static_cast<std::size_t>(i)] = {lo, hi, static_cast<float>(src - lo)};
  }
  return taps;
}

}  // namespace

Tensor bilinear_resize(const Tensor& t, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw ArgumentError("bilinear_resize: output size must be >= 1");
  if (t.rank() != 2 && t.rank() != 3) throw ShapeError("bilinear_resize expects [H,W] or [C,H,W]");
  const int channels = t.rank() == 3 ? t.dim(0) : 1;
  const int in_h = t.dim(-2);
  const int in_w = t.dim(-1);
  if (in_h == out_h && in_w == out_w) return t;

  std::vector<int> shape = t.shape();
  shape[shape.size() - 2] = out_h;
  shape[shape.size() - 1] = out_w;
  Tensor out(shape);

  const auto ty = axis_taps(in_h, out_h);
  const auto tx = axis_taps(in_w, out_w);
  const std::size_t in_plane = static_cast<std::size_t>(in_h) * in_w;
  const std::size_t out_plane = static_cast<std::size_t>(out_h) * out_w;
  for (int c = 0; c < channels; ++c) {
    const float* src = t.data() + c * in_plane;
    float* dst = out.data() + c * out_plane;
    for (int y = 0; y < out_h; ++y) {
      const Tap1D& ry = ty[static_cast<std::size_t>(y)];
      const float* row0 = src + static_cast<std::size_t>(ry.lo) * in_w;
      const float* row1 = src + static_cast<std::size_t>(ry.hi) * in_w;
      for (int x = 0; x < out_w; ++x) {
        const Tap1D& rx = tx[static_cast<std::size_t>(x)];
        const float top = row0[rx.lo] + rx.frac * (row0[rx.hi] - row0[rx.lo]);
        const float bottom = row1[rx.lo] + rx.frac * (row1[rx.hi] - row1[rx.lo]);
        float v = top + ry.frac * (bottom - top);
        // Keep the convex-combination bound exact under rounding.
        const float lo = std::min(std::min(row0[rx.lo], row0[rx.hi]), std::min(row1[rx.lo], row1[rx.hi]));
        const float hi = std::max(std::max(row0[rx.lo], row0[rx.hi]), std::max(row1[rx.lo], row1[rx.hi]));
        dst[static_cast<std::size_t>(y) * out_w + x] = std::clamp(v, lo, hi);
      }
    }
  }
  return out;
}

ImageTensor::ImageTensor(Tensor planar) : planar_(std::move(planar)) {
  if (planar_.rank() != 3 || planar_.dim(0) != 3) {
    throw ValidationError("image tensor must be [3,H,W], got " + shape_string(planar_.shape()));
  }
  for (float v : planar_.values()) {
    if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("image values must lie in [0,1]");
  }
}

ImageTensor::ImageTensor(int height, int width, float fill) {
  if (!(fill >= 0.0f && fill <= 1.0f)) throw ValidationError("image values must lie in [0,1]");
  planar_ = Tensor({3, height, width}, fill);
}

void ImageTensor::set(int c, int y, int x, float v) {
  if (!(v >= 0.0f && v <= 1.0f)) throw ValidationError("image values must lie in [0,1]");
  planar_[(static_cast<std::size_t>(c) * height() + y) * width() + x] = v;
}

}  // namespace puzzlesim
